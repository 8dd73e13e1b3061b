#pragma once

#include "stlsynth/stl/formula.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace stlsynth {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return msg_; }

 private:
  std::string msg_;
  int line_;
  int column_;
};

/// Parses a formula over the given variable names (states then inputs).
///
/// Besides the core grammar the text may contain `#` comments, chained
/// comparisons (`0 < x < 30` is a conjunction), linear expressions on either
/// side of a comparison, and named definitions `name := formula;` that later
/// definitions and the final formula may refer to.
Formula parse_formula(const std::string& text, const std::vector<std::string>& varNames);

}  // namespace stlsynth
