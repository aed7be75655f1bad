#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace lipbound {

enum class BoundDirection { Upper, Lower, Estimate };

std::string_view to_string(BoundDirection d);

/// Result of any estimator. `breakdown` holds per-layer norms or per-factor
/// maxima; for SeqLip methods the entries multiply to `value`.
struct BoundReport {
  std::string method;
  BoundDirection direction = BoundDirection::Upper;
  double value = 0.0;
  std::vector<double> breakdown;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> notes;
  double wall_clock_seconds = 0.0;

  /// Canonical JSON (sorted keys, shortest round-trip doubles). Timing is
  /// left out unless asked for so reports are reproducible byte for byte.
  nlohmann::json to_json(bool include_timing = false) const;
  std::string to_text() const;
};

}  // namespace lipbound
