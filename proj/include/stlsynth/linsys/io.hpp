#pragma once

#include "stlsynth/linsys/system.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace stlsynth {

struct SystemFile {
  LinearSystem system;
  std::optional<Eigen::VectorXd> x0;
};

/// JSON object with A, B (row-major arrays of arrays), ts, state_names,
/// input_names and an optional x0.
SystemFile parseSystemJson(const std::string& text);
SystemFile loadSystemFile(const std::string& path);

/// CSV with header `t,<names...>` and 17 significant digits. Missing final
/// inputs are written as empty fields.
void writeRunCsv(std::ostream& os, const Run& run, const std::vector<std::string>& stateNames,
                 const std::vector<std::string>& inputNames);

struct RunTable {
  std::vector<std::string> names;  ///< column names without t
  Run run;
};

/// Reads a run CSV. The first `stateCount` columns after t are states and the
/// rest inputs; with stateCount < 0 every column is a state. Ts is taken from
/// the t column (1 for a single row).
RunTable readRunCsv(std::istream& is, int stateCount = -1);

std::string gainsToJson(const GainSchedule& gains, std::optional<int> loopStart);

struct GainsFile {
  GainSchedule gains;  ///< costs left empty
  std::optional<int> loopStart;
};
GainsFile parseGainsJson(const std::string& text);

std::string readTextFile(const std::string& path);

}  // namespace stlsynth
