#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stlsynth {

class SmtError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text channel to an SMT-LIB2 solver.
class SmtBackend {
 public:
  virtual ~SmtBackend() = default;
  /// Sends a command that produces no output.
  virtual void send(const std::string& command) = 0;
  /// Sends a command and returns its complete response (one s-expression or atom).
  virtual std::string query(const std::string& command) = 0;
};

/// Solver child process speaking SMT-LIB2 over stdin/stdout.
class SmtProcess : public SmtBackend {
 public:
  explicit SmtProcess(const std::vector<std::string>& argv);
  ~SmtProcess() override;
  SmtProcess(const SmtProcess&) = delete;
  SmtProcess& operator=(const SmtProcess&) = delete;

  void send(const std::string& command) override;
  std::string query(const std::string& command) override;

 private:
  void writeAll(const std::string& s);
  std::string readResponse();
  int pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buffer_;
};

/// Command line for a backend name: "z3", "cvc5", or a path to a z3-compatible
/// binary. STLSYNTH_SMT_SOLVER overrides the executable.
std::vector<std::string> solverCommand(const std::string& backend);
std::unique_ptr<SmtBackend> openSolver(const std::string& backend = "z3");

/// Parses a get-value response into name -> value. Rationals such as
/// (/ 1.0 3.0) and negations (- 2.0) are evaluated in double precision.
std::map<std::string, double> parseValues(const std::string& response);

enum class Sort { Bool, Int, Real };

/// Assertion stack over a backend with a registry of declared constants.
class SolverSession {
 public:
  explicit SolverSession(std::unique_ptr<SmtBackend> backend, const std::string& logic = "QF_LIRA");

  void declare(const std::string& name, Sort sort);
  bool declared(const std::string& name) const { return sorts_.count(name) != 0; }
  size_t count(Sort sort) const;

  void assertTerm(const std::string& term);
  void push();
  void pop();
  int depth() const { return depth_; }

  /// "sat", "unsat" or "unknown".
  std::string check();
  std::map<std::string, double> values(const std::vector<std::string>& names);

  /// Every asserted term with the stack depth it was asserted at.
  const std::vector<std::pair<int, std::string>>& log() const { return log_; }

 private:
  std::unique_ptr<SmtBackend> backend_;
  std::map<std::string, Sort> sorts_;
  int depth_ = 0;
  std::vector<std::pair<int, std::string>> log_;
};

}  // namespace stlsynth
