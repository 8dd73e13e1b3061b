#include "stlsynth/linsys/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stlsynth {

using nlohmann::json;

namespace {

Eigen::MatrixXd matrixFrom(const json& j, const char* name) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string(name) + " must be a non-empty array of rows");
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Eigen::MatrixXd M(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols)
      throw std::invalid_argument(std::string(name) + " rows must all have the same length");
    for (size_t c = 0; c < cols; ++c) M(r, c) = j[r][c].get<double>();
  }
  return M;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

SystemFile parseSystemJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("system file: ") + e.what());
  }
  try {
    SystemFile f;
    auto& s = f.system;
    s.A = matrixFrom(j.at("A"), "A");
    s.B = matrixFrom(j.at("B"), "B");
    s.Ts = j.at("ts").get<double>();
    s.stateNames = j.at("state_names").get<std::vector<std::string>>();
    s.inputNames = j.at("input_names").get<std::vector<std::string>>();
    if (j.contains("x0")) {
      auto v = j["x0"].get<std::vector<double>>();
      f.x0 = Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
      if (f.x0->size() != s.n()) throw std::invalid_argument("x0 has the wrong dimension");
    }
    s.validate();
    return f;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("system file: ") + e.what());
  }
}

std::string readTextFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemFile loadSystemFile(const std::string& path) { return parseSystemJson(readTextFile(path)); }

void writeRunCsv(std::ostream& os, const Run& run, const std::vector<std::string>& stateNames,
                 const std::vector<std::string>& inputNames) {
  os << "t";
  for (auto& n : stateNames) os << ',' << n;
  for (auto& n : inputNames) os << ',' << n;
  os << '\n';
  for (size_t k = 0; k < run.size(); ++k) {
    os << fmt17(static_cast<double>(k) * run.Ts);
    for (int i = 0; i < run.states[k].size(); ++i) os << ',' << fmt17(run.states[k][i]);
    for (size_t i = 0; i < inputNames.size(); ++i) {
      os << ',';
      if (k < run.inputs.size()) os << fmt17(run.inputs[k][static_cast<int>(i)]);
    }
    os << '\n';
  }
}

RunTable readRunCsv(std::istream& is, int stateCount) {
  RunTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    for (auto& c : out) {
      while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
      while (!c.empty() && c.front() == ' ') c.erase(c.begin());
    }
    return out;
  };
  if (!std::getline(is, line)) throw std::invalid_argument("run file is empty");
  auto header = split(line);
  if (header.empty() || header[0] != "t") throw std::invalid_argument("run file header must start with t");
  t.names.assign(header.begin() + 1, header.end());
  const int cols = static_cast<int>(t.names.size());
  const int n = stateCount < 0 ? cols : stateCount;
  if (n > cols) throw std::invalid_argument("run file has fewer columns than states");
  std::vector<double> times;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (static_cast<int>(cells.size()) != cols + 1)
      throw std::invalid_argument("run file row " + std::to_string(row) + " has the wrong number of fields");
    auto num = [&](const std::string& c) {
      try {
        size_t used = 0;
        double v = std::stod(c, &used);
        if (used != c.size()) throw std::invalid_argument("");
        return v;
      } catch (const std::exception&) {
        throw std::invalid_argument("run file row " + std::to_string(row) + ": bad number '" + c + "'");
      }
    };
    times.push_back(num(cells[0]));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = num(cells[1 + i]);
    t.run.states.push_back(x);
    bool missing = true;
    for (int i = n; i < cols; ++i) missing = missing && cells[1 + i].empty();
    if (cols > n && !missing) {
      Eigen::VectorXd u(cols - n);
      for (int i = n; i < cols; ++i) u[i - n] = num(cells[1 + i]);
      if (t.run.inputs.size() + 1 != t.run.states.size())
        throw std::invalid_argument("run file has inputs after a row without inputs");
      t.run.inputs.push_back(u);
    }
  }
  if (t.run.states.empty()) throw std::invalid_argument("run file has no samples");
  t.run.Ts = times.size() > 1 ? times[1] - times[0] : 1.0;
  t.run.validate();
  return t;
}

std::string gainsToJson(const GainSchedule& gains, std::optional<int> loopStart) {
  json j;
  j["horizon"] = gains.horizon();
  j["loop_index"] = loopStart ? json(*loopStart) : json(nullptr);
  json arr = json::array();
  for (auto& F : gains.gains) {
    json rows = json::array();
    for (int r = 0; r < F.rows(); ++r) {
      json row = json::array();
      for (int c = 0; c < F.cols(); ++c) row.push_back(F(r, c));
      rows.push_back(row);
    }
    arr.push_back(rows);
  }
  j["gains"] = arr;
  return j.dump(2) + "\n";
}

GainsFile parseGainsJson(const std::string& text) {
  try {
    json j = json::parse(text);
    GainsFile g;
    for (auto& F : j.at("gains")) g.gains.gains.push_back(matrixFrom(F, "gain"));
    if (j.contains("loop_index") && !j["loop_index"].is_null()) g.loopStart = j["loop_index"].get<int>();
    return g;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("gains file: ") + e.what());
  }
}

}  // namespace stlsynth
