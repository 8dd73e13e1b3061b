#include "stlsynth/cli.hpp"

#include "stlsynth/abstraction/abstraction.hpp"
#include "stlsynth/driver.hpp"
#include "stlsynth/linsys/io.hpp"
#include "stlsynth/smt/solver.hpp"
#include "stlsynth/stl/parser.hpp"
#include "stlsynth/stl/semantics.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <iostream>
#include <sstream>

namespace stlsynth {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Eigen::VectorXd parseVector(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      size_t used = 0;
      v.push_back(std::stod(cell, &used));
      while (used < cell.size() && cell[used] == ' ') ++used;
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError("bad number in vector: '" + cell + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
}

void writeFile(const std::string& path, const std::string& content) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw UsageError("cannot write " + path);
  o << content;
}

std::string runCsv(const Run& run, const LinearSystem& sys) {
  std::ostringstream os;
  writeRunCsv(os, run, sys.stateNames, sys.inputNames);
  return os.str();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Options {
  std::string spec, system, x0, run, gains, smtBackend = "z3";
  std::string outRun, outPlan, outGains;
  double tol = 1e-6, q = 1.0, r = 1.0, qf = 10.0, noise = 0.0, x0Noise = 0.0;
  int kmax = -1;
  unsigned long long seed = 0;
  bool verbose = false;
};

Eigen::VectorXd initialState(const Options& o, const SystemFile& sf) {
  if (!o.x0.empty()) {
    auto x = parseVector(o.x0);
    if (x.size() != sf.system.n()) throw UsageError("--x0 needs " + std::to_string(sf.system.n()) + " entries");
    return x;
  }
  if (!sf.x0) throw UsageError("no initial state: pass --x0 or set x0 in the system file");
  return *sf.x0;
}

int cmdSynthesize(const Options& o, std::ostream& out, std::ostream& err) {
  SystemFile sf = loadSystemFile(o.system);
  SynthesisConfig cfg;
  cfg.system = sf.system;
  cfg.formula = parse_formula(readTextFile(o.spec), sf.system.variableNames());
  cfg.xInit = initialState(o, sf);
  cfg.delta = o.tol;
  const int n = sf.system.n(), m = sf.system.m();
  cfg.Q = o.q * Eigen::MatrixXd::Identity(n, n);
  cfg.Qf = o.qf * Eigen::MatrixXd::Identity(n, n);
  cfg.R = o.r * Eigen::MatrixXd::Identity(m, m);
  if (o.kmax >= 0) cfg.kMax = o.kmax;
  cfg.smtBackend = o.smtBackend;
  if (o.verbose) cfg.log = [&err](const std::string& s) { err << s << '\n'; };

  SynthesisResult res = synthesize(cfg);
  const auto& d = res.diagnostics;
  out << "status: " << toString(res.status) << '\n';
  if (res.status == SynthesisStatus::Satisfied) {
    out << "plan: K=" << res.plan.K() << " L=" << res.plan.loopIndex << " stretched length "
        << res.prefix.length() << '\n';
    out << "plan robustness: " << fmt(res.planRobustness) << '\n';
    out << "robustness: " << fmt(res.robustness) << '\n';
    if (!o.outRun.empty()) writeFile(o.outRun, runCsv(horizonRun(cfg.formula, res.run, res.loopStart), sf.system));
    if (!o.outPlan.empty()) writeFile(o.outPlan, planToJson(res.plan));
    if (!o.outGains.empty()) writeFile(o.outGains, gainsToJson(res.gains, res.loopStart));
  }
  out << "K reached: " << d.kReached << " of " << d.kMax << ", smt checks " << d.smtChecks << ", lp solves "
      << d.lpCalls << ", time " << fmt(d.wallSeconds) << " s\n";
  switch (res.status) {
    case SynthesisStatus::Satisfied: return ExitSatisfied;
    case SynthesisStatus::Unsatisfiable: return ExitUnsatisfiable;
    case SynthesisStatus::InfeasibleDynamics: return ExitInfeasible;
  }
  return ExitBackend;
}

int cmdCheck(const Options& o, std::ostream& out, std::ostream&) {
  std::ifstream in(o.run);
  if (!in) throw UsageError("cannot open " + o.run);
  RunTable t = readRunCsv(in);
  Formula f = parse_formula(readTextFile(o.spec), t.names);
  double rho = robustnessFinite(f, t.run, 0);
  int need = horizonSteps(f, t.run.Ts) + 1;
  out << "robustness: " << fmt(rho) << '\n';
  if (static_cast<int>(t.run.size()) < need)
    out << "note: run has " << t.run.size() << " samples, the formula looks at " << need
        << "; missing samples count as violations\n";
  return rho > 0 ? ExitSatisfied : ExitUnsatisfiable;
}

int cmdSimulate(const Options& o, std::ostream& out, std::ostream&) {
  SystemFile sf = loadSystemFile(o.system);
  const auto& sys = sf.system;
  std::ifstream in(o.run);
  if (!in) throw UsageError("cannot open " + o.run);
  RunTable t = readRunCsv(in, sys.n());
  if (static_cast<int>(t.names.size()) != sys.n() + sys.m()) throw UsageError("run columns do not match the system");
  Run nominal = t.run;
  nominal.Ts = sys.Ts;
  if (nominal.inputs.size() + 1 < nominal.size()) throw UsageError("nominal run lacks inputs");

  GainSchedule gains;
  std::optional<int> loopStart;
  if (!o.gains.empty()) {
    GainsFile g = parseGainsJson(readTextFile(o.gains));
    gains = std::move(g.gains);
    loopStart = g.loopStart;
  } else {
    const int n = sys.n(), m = sys.m();
    gains = lqr_gains(sys, o.qf * Eigen::MatrixXd::Identity(n, n), o.q * Eigen::MatrixXd::Identity(n, n),
                      o.r * Eigen::MatrixXd::Identity(m, m), static_cast<int>(nominal.size()) - 1);
  }
  Eigen::VectorXd x0 = nominal.states[0];
  if (!o.x0.empty()) x0 = initialState(o, sf);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  if (o.x0Noise > 0)
    for (int i = 0; i < x0.size(); ++i) x0[i] += o.x0Noise * unit(rng);
  Disturbance w = o.noise > 0 ? uniformBoxDisturbance(o.seed + 1, o.noise, sys.n()) : Disturbance{};
  Run exec = track(sys, nominal, gains, x0, w, loopStart);

  double err = 0.0;
  for (size_t k = 0; k < nominal.size(); ++k)
    err = std::max(err, (exec.states[k] - nominal.states[k]).cwiseAbs().maxCoeff());
  out << "max tracking error: " << fmt(err) << '\n';
  if (!o.outRun.empty()) writeFile(o.outRun, runCsv(exec, sys));
  if (!o.spec.empty()) {
    Formula f = parse_formula(readTextFile(o.spec), sys.variableNames());
    double rho = robustnessFinite(f, exec, 0);
    out << "robustness: " << fmt(rho) << '\n';
    return rho > 0 ? ExitSatisfied : ExitUnsatisfiable;
  }
  return ExitSatisfied;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Synthesis of controllers for linear systems from bounded STL specifications"};
  app.require_subcommand(1);
  Options o;

  auto* syn = app.add_subcommand("synthesize", "find a nominal run, plan and tracking gains");
  syn->add_option("--spec", o.spec, "formula file")->required();
  syn->add_option("--system", o.system, "system JSON")->required();
  syn->add_option("--x0", o.x0, "initial state, comma separated (overrides the system file)");
  syn->add_option("--tol", o.tol, "dynamics tolerance delta")->check(CLI::PositiveNumber);
  syn->add_option("--kmax", o.kmax, "largest plan length K")->check(CLI::NonNegativeNumber);
  syn->add_option("--q", o.q, "state weight (times identity)")->check(CLI::PositiveNumber);
  syn->add_option("--r", o.r, "input weight (times identity)")->check(CLI::PositiveNumber);
  syn->add_option("--qf", o.qf, "terminal weight (times identity)")->check(CLI::PositiveNumber);
  syn->add_option("--seed", o.seed, "unused by synthesis, accepted for symmetry");
  syn->add_option("--smt-backend", o.smtBackend, "z3, cvc5 or a solver executable");
  syn->add_option("--out-run", o.outRun, "nominal run CSV");
  syn->add_option("--out-plan", o.outPlan, "plan JSON");
  syn->add_option("--out-gains", o.outGains, "gain schedule JSON");
  syn->add_flag("--verbose", o.verbose, "progress on stderr");

  auto* chk = app.add_subcommand("check", "robustness of a run CSV");
  chk->add_option("--spec", o.spec, "formula file over the CSV column names")->required();
  chk->add_option("--run", o.run, "run CSV")->required();

  auto* sim = app.add_subcommand("simulate", "closed-loop tracking of a nominal run");
  sim->add_option("--system", o.system, "system JSON")->required();
  sim->add_option("--run", o.run, "nominal run CSV (states then inputs)")->required();
  sim->add_option("--gains", o.gains, "gain schedule JSON; LQR from --q/--r/--qf when absent");
  sim->add_option("--spec", o.spec, "formula to evaluate on the executed run");
  sim->add_option("--x0", o.x0, "initial state, comma separated");
  sim->add_option("--x0-noise", o.x0Noise, "uniform perturbation bound on the initial state")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--noise", o.noise, "per-step disturbance bound")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", o.seed, "disturbance seed");
  sim->add_option("--q", o.q, "state weight")->check(CLI::PositiveNumber);
  sim->add_option("--r", o.r, "input weight")->check(CLI::PositiveNumber);
  sim->add_option("--qf", o.qf, "terminal weight")->check(CLI::PositiveNumber);
  sim->add_option("--out-run", o.outRun, "executed run CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : ExitUsage;
  }

  try {
    if (*syn) return cmdSynthesize(o, out, err);
    if (*chk) return cmdCheck(o, out, err);
    return cmdSimulate(o, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return ExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return ExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return ExitUsage;
  } catch (const std::exception& e) {
    err << "backend error: " << e.what() << '\n';
    return ExitBackend;
  }
}

}  // namespace stlsynth
