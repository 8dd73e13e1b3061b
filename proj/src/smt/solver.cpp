#include "stlsynth/smt/solver.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <sys/wait.h>
#include <unistd.h>

namespace stlsynth {

namespace {

void ignoreSigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

SmtProcess::SmtProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw SmtError("empty solver command");
  ignoreSigpipe();
  int toChild[2], fromChild[2];
  if (pipe(toChild) != 0) throw SmtError("pipe failed");
  if (pipe(fromChild) != 0) {
    close(toChild[0]);
    close(toChild[1]);
    throw SmtError("pipe failed");
  }
  // The exec-failure report goes through a close-on-exec pipe.
  int status[2];
  if (pipe2(status, O_CLOEXEC) != 0) throw SmtError("pipe failed");

  std::vector<char*> args;
  for (auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = fork();
  if (pid < 0) throw SmtError("fork failed");
  if (pid == 0) {
    dup2(toChild[0], STDIN_FILENO);
    dup2(fromChild[1], STDOUT_FILENO);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, STDERR_FILENO);
    close(toChild[0]);
    close(toChild[1]);
    close(fromChild[0]);
    close(fromChild[1]);
    close(status[0]);
    execvp(args[0], args.data());
    int err = errno;
    (void)!write(status[1], &err, sizeof err);
    _exit(127);
  }
  close(toChild[0]);
  close(fromChild[1]);
  close(status[1]);
  int err = 0;
  ssize_t got = read(status[0], &err, sizeof err);
  close(status[0]);
  pid_ = pid;
  in_ = toChild[1];
  out_ = fromChild[0];
  if (got == static_cast<ssize_t>(sizeof err)) {
    close(in_);
    close(out_);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
    throw SmtError("cannot start solver '" + argv[0] + "': " + std::strerror(err));
  }
}

SmtProcess::~SmtProcess() {
  if (pid_ < 0) return;
  const char bye[] = "(exit)\n";
  (void)!write(in_, bye, sizeof bye - 1);
  close(in_);
  close(out_);
  int st = 0;
  for (int i = 0; i < 200; ++i) {
    if (waitpid(pid_, &st, WNOHANG) != 0) return;
    usleep(5000);
  }
  kill(pid_, SIGKILL);
  waitpid(pid_, &st, 0);
}

void SmtProcess::writeAll(const std::string& s) {
  size_t done = 0;
  while (done < s.size()) {
    ssize_t w = write(in_, s.data() + done, s.size() - done);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw SmtError("solver process closed its input");
    }
    done += static_cast<size_t>(w);
  }
}

void SmtProcess::send(const std::string& command) { writeAll(command + "\n"); }

std::string SmtProcess::query(const std::string& command) {
  writeAll(command + "\n");
  return readResponse();
}

std::string SmtProcess::readResponse() {
  // One response: a bare atom line, or a balanced parenthesized expression.
  std::string resp;
  int depth = 0;
  bool started = false, inString = false;
  size_t i = 0;
  while (true) {
    for (; i < buffer_.size(); ++i) {
      char c = buffer_[i];
      if (!started) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        started = true;
      }
      resp.push_back(c);
      if (inString) {
        if (c == '"') inString = false;
        continue;
      }
      if (c == '"') inString = true;
      else if (c == '(') ++depth;
      else if (c == ')') --depth;
      bool atomDone = depth == 0 && resp.front() != '(' && c == '\n';
      bool listDone = depth == 0 && resp.front() == '(' && c == ')';
      if (atomDone || listDone) {
        buffer_.erase(0, i + 1);
        while (!resp.empty() && std::isspace(static_cast<unsigned char>(resp.back()))) resp.pop_back();
        if (resp.rfind("(error", 0) == 0) throw SmtError("solver error: " + resp);
        return resp;
      }
    }
    buffer_.clear();
    i = 0;
    char chunk[65536];
    ssize_t r = read(out_, chunk, sizeof chunk);
    if (r < 0 && errno == EINTR) continue;
    if (r <= 0) throw SmtError("solver process terminated unexpectedly");
    buffer_.assign(chunk, static_cast<size_t>(r));
  }
}

std::vector<std::string> solverCommand(const std::string& backend) {
  const char* env = std::getenv("STLSYNTH_SMT_SOLVER");
  std::string exe = env && *env ? env : "";
  if (backend == "z3" || backend.empty()) return {exe.empty() ? "z3" : exe, "-in", "-smt2"};
  if (backend == "cvc5")
    return {exe.empty() ? "cvc5" : exe, "--lang=smt2", "--incremental", "--produce-models"};
  return {backend, "-in", "-smt2"};
}

std::unique_ptr<SmtBackend> openSolver(const std::string& backend) {
  return std::make_unique<SmtProcess>(solverCommand(backend));
}

namespace {

struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool isList = false;
};

SExpr parseSExpr(const std::string& s, size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  if (i >= s.size()) throw SmtError("truncated solver response");
  SExpr e;
  if (s[i] == '(') {
    e.isList = true;
    ++i;
    while (true) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size()) throw SmtError("unbalanced solver response");
      if (s[i] == ')') {
        ++i;
        break;
      }
      e.list.push_back(parseSExpr(s, i));
    }
    return e;
  }
  if (s[i] == ')') throw SmtError("unexpected ')' in solver response");
  size_t j = i;
  while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
  e.atom = s.substr(i, j - i);
  i = j;
  return e;
}

double evalNumber(const SExpr& e) {
  if (!e.isList) {
    if (e.atom == "true") return 1.0;
    if (e.atom == "false") return 0.0;
    char* end = nullptr;
    double v = std::strtod(e.atom.c_str(), &end);
    if (end == e.atom.c_str() || *end != '\0') throw SmtError("unexpected value '" + e.atom + "'");
    return v;
  }
  if (e.list.empty() || e.list[0].isList) throw SmtError("unexpected value expression");
  const std::string& op = e.list[0].atom;
  if (op == "-" && e.list.size() == 2) return -evalNumber(e.list[1]);
  if (op == "-" && e.list.size() == 3) return evalNumber(e.list[1]) - evalNumber(e.list[2]);
  if (op == "/" && e.list.size() == 3) return evalNumber(e.list[1]) / evalNumber(e.list[2]);
  if (op == "+" ) {
    double s = 0;
    for (size_t i = 1; i < e.list.size(); ++i) s += evalNumber(e.list[i]);
    return s;
  }
  throw SmtError("unsupported value operator '" + op + "'");
}

}  // namespace

std::map<std::string, double> parseValues(const std::string& response) {
  size_t i = 0;
  SExpr root = parseSExpr(response, i);
  if (!root.isList) throw SmtError("get-value response is not a list: " + response);
  std::map<std::string, double> out;
  for (auto& pair : root.list) {
    if (!pair.isList || pair.list.size() != 2 || pair.list[0].isList)
      throw SmtError("malformed get-value entry");
    out[pair.list[0].atom] = evalNumber(pair.list[1]);
  }
  return out;
}

SolverSession::SolverSession(std::unique_ptr<SmtBackend> backend, const std::string& logic)
    : backend_(std::move(backend)) {
  backend_->send("(set-option :print-success false)");
  backend_->send("(set-option :produce-models true)");
  backend_->send("(set-logic " + logic + ")");
}

void SolverSession::declare(const std::string& name, Sort sort) {
  if (depth_ != 0) throw SmtError("declarations are only allowed at the base level");
  if (!sorts_.emplace(name, sort).second) throw SmtError("duplicate declaration of " + name);
  const char* s = sort == Sort::Bool ? "Bool" : sort == Sort::Int ? "Int" : "Real";
  backend_->send("(declare-const " + name + " " + s + ")");
}

size_t SolverSession::count(Sort sort) const {
  size_t c = 0;
  for (auto& [_, s] : sorts_) c += s == sort;
  return c;
}

void SolverSession::assertTerm(const std::string& term) {
  if (term == "true") return;
  backend_->send("(assert " + term + ")");
  log_.emplace_back(depth_, term);
}

void SolverSession::push() {
  backend_->send("(push 1)");
  ++depth_;
}

void SolverSession::pop() {
  if (depth_ == 0) throw SmtError("pop at the base level");
  backend_->send("(pop 1)");
  while (!log_.empty() && log_.back().first == depth_) log_.pop_back();
  --depth_;
}

std::string SolverSession::check() {
  std::string r = backend_->query("(check-sat)");
  if (r != "sat" && r != "unsat" && r != "unknown") throw SmtError("unexpected check-sat response: " + r);
  return r;
}

std::map<std::string, double> SolverSession::values(const std::vector<std::string>& names) {
  std::map<std::string, double> out;
  // Chunked to keep individual responses small.
  for (size_t i = 0; i < names.size(); i += 256) {
    std::string cmd = "(get-value (";
    for (size_t j = i; j < std::min(names.size(), i + 256); ++j) cmd += names[j] + " ";
    cmd += "))";
    auto part = parseValues(backend_->query(cmd));
    out.insert(part.begin(), part.end());
  }
  return out;
}

}  // namespace stlsynth
