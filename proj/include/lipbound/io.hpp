#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipbound/graph.hpp"
#include "lipbound/sequential.hpp"

namespace lipbound {

// LNM container: canonical manifest JSON, the two bytes "\n\0", then the
// weight blob (IEEE-754 f32, little-endian, row-major, packed in layer order).

std::vector<std::uint8_t> lnm_bytes(const SequentialNet& net);
SequentialNet lnm_parse(const std::vector<std::uint8_t>& bytes);

/// Weights are rounded to f32 on save; load widens back to f64.
void save_lnm(const SequentialNet& net, const std::filesystem::path& path);
SequentialNet load_lnm(const std::filesystem::path& path);

/// Manifest part of an LNM file, for inspection.
nlohmann::json lnm_manifest(const std::vector<std::uint8_t>& bytes);

/// {"nodes": [{"id", "kind", "inputs", "params"}...], "output": id}.
/// Kinds: input {size}, constant {value}, dense {weight (rows), bias?},
/// activation {name, alpha?}, add, subtract, product, abs, sin,
/// scale {c}, maxpool {channels, in_h, in_w, window}.
ComputationGraph parse_graph_json(const nlohmann::json& doc);
ComputationGraph load_graph_json(const std::filesystem::path& path);

/// One point per row, comma separated, no header. Blank lines are skipped.
std::vector<Vector> load_points_csv(const std::filesystem::path& path);
std::vector<Vector> parse_points_csv(const std::string& text);

/// Dense layers of the given widths (widths[0] = input). Weights are
/// N(0, 1/fan_in), biases N(0, 0.01^2), all rounded to f32 so that an LNM
/// round trip is exact.
SequentialNet random_net(const std::vector<int>& widths, const Activation& act, std::uint64_t seed);
SequentialNet random_net(const std::vector<int>& widths, std::uint64_t seed);

/// Fixed-family CNN of depth n >= 4 on a 1 x hw x hw input: conv 32 5x5/2,
/// conv 64 3x3/2, (n-4) x conv 64 3x3/1 pad 1, conv 128 3x3/2, conv 10 2x2/1,
/// ReLU after all but the last. Kaiming-scaled Gaussian kernels, f32-rounded.
SequentialNet random_cnn(int depth, std::uint64_t seed, std::size_t input_hw = 28);

}  // namespace lipbound
