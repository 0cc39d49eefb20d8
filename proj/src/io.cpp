#include "fracevo/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fracevo {

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string ensemble_to_csv(const ModeEnsemble& ensemble) {
    std::string out = "replicate,mode,t,value\n";
    out.reserve(out.size() + ensemble.paths.size() * 24);
    for (std::size_t r = 0; r < ensemble.replicates; ++r)
        for (std::size_t j = 0; j < ensemble.modes; ++j)
            for (std::size_t k = 0; k < ensemble.grid.n; ++k) {
                out += std::to_string(r);
                out += ',';
                out += std::to_string(j);
                out += ',';
                out += format_double(ensemble.grid.node(k));
                out += ',';
                out += format_double(ensemble.at(r, j, k));
                out += '\n';
            }
    return out;
}

namespace {

constexpr char kMagic[5] = {'F', 'R', 'E', 'V', '1'};
constexpr std::size_t kHeaderSize = 32;

}  // namespace

void write_ensemble_binary(const std::string& path, const ModeEnsemble& ensemble) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_ensemble_binary: cannot open " + path);
    char header[kHeaderSize] = {};
    std::memcpy(header, kMagic, sizeof(kMagic));
    const auto modes = static_cast<std::uint32_t>(ensemble.modes);
    const auto n = static_cast<std::uint32_t>(ensemble.grid.n);
    const auto reps = static_cast<std::uint32_t>(ensemble.replicates);
    std::memcpy(header + 8, &modes, 4);
    std::memcpy(header + 12, &n, 4);
    std::memcpy(header + 16, &reps, 4);
    std::memcpy(header + 24, &ensemble.gamma, 8);
    out.write(header, kHeaderSize);
    out.write(reinterpret_cast<const char*>(ensemble.paths.data()),
              static_cast<std::streamsize>(ensemble.paths.size() * sizeof(double)));
    // Grid bounds trail the array so the dump round-trips.
    out.write(reinterpret_cast<const char*>(&ensemble.grid.t0), 8);
    out.write(reinterpret_cast<const char*>(&ensemble.grid.t1), 8);
    if (!out) throw std::runtime_error("write_ensemble_binary: write failed for " + path);
}

ModeEnsemble read_ensemble_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_ensemble_binary: cannot open " + path);
    char header[kHeaderSize] = {};
    in.read(header, kHeaderSize);
    if (!in || std::memcmp(header, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("read_ensemble_binary: bad magic in " + path);
    std::uint32_t modes = 0, n = 0, reps = 0;
    double gamma = 0.0;
    std::memcpy(&modes, header + 8, 4);
    std::memcpy(&n, header + 12, 4);
    std::memcpy(&reps, header + 16, 4);
    std::memcpy(&gamma, header + 24, 8);

    ModeEnsemble ens;
    ens.replicates = reps;
    ens.modes = modes;
    ens.gamma = gamma;
    ens.construction = "binary";
    ens.paths.resize(static_cast<std::size_t>(reps) * modes * n);
    in.read(reinterpret_cast<char*>(ens.paths.data()),
            static_cast<std::streamsize>(ens.paths.size() * sizeof(double)));
    double t0 = 0.0, t1 = 1.0;
    in.read(reinterpret_cast<char*>(&t0), 8);
    in.read(reinterpret_cast<char*>(&t1), 8);
    if (!in) throw std::runtime_error("read_ensemble_binary: truncated file " + path);
    ens.grid = TimeGrid(t0, t1, n);
    return ens;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write_text_file: write failed for " + path);
}

}  // namespace fracevo
