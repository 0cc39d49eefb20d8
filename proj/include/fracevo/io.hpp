#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracevo/sampler.hpp"

namespace fracevo {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// "replicate,mode,t,value" rows, one per sample; UTF-8, LF line endings.
std::string ensemble_to_csv(const ModeEnsemble& ensemble);

// Compact dump: magic "FREV1", 32-byte header (u32 J, u32 n, u32 replicates,
// f64 gamma), then the path array as little-endian f64 in
// [replicate][mode][time] order.
void write_ensemble_binary(const std::string& path, const ModeEnsemble& ensemble);
ModeEnsemble read_ensemble_binary(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace fracevo
