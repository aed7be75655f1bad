#include "lipbound/report.hpp"

#include <iomanip>
#include <sstream>

namespace lipbound {

std::string_view to_string(BoundDirection d) {
  switch (d) {
    case BoundDirection::Upper: return "upper";
    case BoundDirection::Lower: return "lower";
    case BoundDirection::Estimate: return "estimate";
  }
  return "unknown";
}

nlohmann::json BoundReport::to_json(bool include_timing) const {
  nlohmann::json j;
  j["method"] = method;
  j["direction"] = std::string(to_string(direction));
  j["value"] = value;
  j["breakdown"] = breakdown;
  j["config"] = config;
  j["notes"] = notes;
  if (include_timing) j["wall_clock_seconds"] = wall_clock_seconds;
  return j;
}

std::string BoundReport::to_text() const {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "method:     " << method << '\n';
  os << "direction:  " << to_string(direction) << '\n';
  os << "value:      " << value << '\n';
  if (!breakdown.empty()) {
    os << "breakdown: ";
    for (double b : breakdown) os << ' ' << b;
    os << '\n';
  }
  for (const auto& n : notes) os << "note:       " << n << '\n';
  if (!config.empty()) os << "config:     " << config.dump() << '\n';
  os << "wall-clock: " << std::setprecision(4) << wall_clock_seconds << " s\n";
  return os.str();
}

}  // namespace lipbound
