// phasesync command-line tool: solve, certify, simulate, sweep.
//
// Exit codes: 0 ok, 1 I/O failure, 2 parse/usage error, 3 solver
// non-convergence, 4 certificate rejected.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phasesync/phasesync.hpp"

namespace ps = phasesync;

namespace {

enum ExitCode : int { kOk = 0, kIo = 1, kParse = 2, kNoConvergence = 3, kCertFail = 4 };

struct IoFailure {
  std::string what;
};

ps::HermitianMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure{"cannot open " + path};
  return ps::read_matrix(in);
}

ps::PhaseVector load_phases(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure{"cannot open " + path};
  auto res = ps::read_phases(in);
  for (const auto& w : res.warnings) std::cerr << "warning: " << path << ": " << w << '\n';
  return std::move(res.phases);
}

template <typename Writer>
void save(const std::string& path, Writer&& write) {
  std::ofstream out(path);
  if (!out) throw IoFailure{"cannot open " + path + " for writing"};
  write(out);
  out.flush();
  if (!out) throw IoFailure{"failed writing " + path};
}

ps::EigenMethod parse_eig_method(const std::string& s) {
  return s == "dense" ? ps::EigenMethod::kDense : ps::EigenMethod::kPower;
}

std::string basename_without_csv(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return path.substr(0, path.size() - 4);
  return path;
}

struct SolveArgs {
  std::string matrix;
  std::string method = "gpm";
  std::string out;
  std::uint64_t seed = 0;
  double tol = 0.0;
  double alpha_margin = 0.0;
  std::size_t max_iter = 0;
  std::string eig_method = "dense";
};

int cmd_solve(const SolveArgs& a) {
  const ps::HermitianMatrix c = load_matrix(a.matrix);
  const std::size_t n = c.order();
  const ps::EigenOptions eig{parse_eig_method(a.eig_method), ps::kDefaultEigTol, 0, a.seed};
  bool converged = true;
  std::size_t iterations = 0;
  std::optional<ps::PhaseVector> x;
  double tol = a.tol;

  if (a.method == "eig") {
    x = ps::eigenvector_estimator(c, eig);
    if (tol == 0.0) tol = 1e-5;
  } else if (a.method == "gpm") {
    ps::GpmConfig cfg;
    cfg.alpha_margin = a.alpha_margin;
    cfg.max_iter = a.max_iter;
    cfg.eig = eig;
    const ps::GpmResult g = ps::gpm_run(c, cfg);
    converged = g.converged;
    iterations = g.iterations;
    x = g.estimate;
    if (tol == 0.0) tol = 1e-5;
  } else {
    ps::AscentConfig cfg;
    cfg.max_iter = a.max_iter;
    cfg.eig = eig;
    cfg.record_trace = false;
    const ps::AscentResult r = ps::riemannian_ascent(c, ps::generate_signal(n, ps::derive_seed(a.seed, "ascent-start")), cfg);
    converged = r.converged;
    iterations = r.iterations;
    x = r.estimate;
    if (tol == 0.0) tol = 1e-9;
  }

  const ps::Certificate cert = ps::certify(c, *x, tol, eig);
  std::cout << "f_value=" << ps::format_real(ps::cost(c, *x)) << '\n'
            << "cert_ratio=" << ps::format_real(cert.ratio) << '\n'
            << "cert_pass=" << (cert.pass ? 1 : 0) << '\n'
            << "iterations=" << iterations << '\n'
            << "converged=" << (converged ? 1 : 0) << '\n';
  if (!a.out.empty()) save(a.out, [&](std::ostream& o) { ps::write_phases(o, *x); });
  return converged ? kOk : kNoConvergence;
}

struct CertifyArgs {
  std::string matrix;
  std::string phases;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  std::string eig_method = "dense";
};

int cmd_certify(const CertifyArgs& a) {
  const ps::HermitianMatrix c = load_matrix(a.matrix);
  const ps::PhaseVector x = load_phases(a.phases);
  if (x.size() != c.order()) {
    std::cerr << "error: matrix order " << c.order() << " does not match phase count " << x.size() << '\n';
    return kParse;
  }
  const ps::Certificate cert =
      ps::certify(c, x, a.tol, ps::EigenOptions{parse_eig_method(a.eig_method), ps::kDefaultEigTol, 0, a.seed});
  std::cout << "lambda_min_S=" << ps::format_real(cert.lambda_min_S) << '\n'
            << "lambda_max_S=" << ps::format_real(cert.lambda_max_S) << '\n'
            << "ratio=" << ps::format_real(cert.ratio) << '\n'
            << "gap_bound=" << ps::format_real(cert.gap_bound) << '\n'
            << "pass=" << (cert.pass ? 1 : 0) << '\n';
  return cert.pass ? kOk : kCertFail;
}

struct SimulateArgs {
  std::size_t n = 100;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  std::string out_prefix = "instance";
};

int cmd_simulate(const SimulateArgs& a) {
  const ps::ProblemInstance inst = ps::assemble_instance(a.n, a.sigma, a.seed);
  const std::string cpath = a.out_prefix + ".herm";
  const std::string zpath = a.out_prefix + ".phases";
  save(cpath, [&](std::ostream& o) { ps::write_matrix(o, inst.data); });
  save(zpath, [&](std::ostream& o) { ps::write_phases(o, inst.signal); });
  std::cout << "matrix=" << cpath << '\n' << "signal=" << zpath << '\n';
  return kOk;
}

struct SweepArgs {
  std::vector<std::size_t> n_values{25, 50, 100, 200, 400};
  std::vector<double> sigma_rel{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2};
  std::vector<double> sigma_abs;
  std::size_t trials = 50;
  bool full_trials = false;
  std::vector<std::string> methods{"EIG", "GPM", "ASCENT"};
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::string out = "sweep.csv";
  bool no_timing = false;
  std::string eig_method = "dense";
};

int cmd_sweep(const SweepArgs& a) {
  ps::SweepPlan plan;
  plan.n_values = a.n_values;
  if (!a.sigma_abs.empty()) {
    plan.sigmas = ps::AbsoluteSigmas{a.sigma_abs};
  } else {
    plan.sigmas = ps::RelativeSigmas{a.sigma_rel};
  }
  plan.trials = a.full_trials ? 100 : a.trials;
  plan.methods.clear();
  for (const auto& m : a.methods) plan.methods.push_back(ps::parse_method(m));
  plan.master_seed = a.seed;
  plan.record_runtime = !a.no_timing;
  plan.eig_method = parse_eig_method(a.eig_method);
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }

  // The CSV is written under a .partial name and renamed once complete.
  const std::string partial = a.out + ".partial";
  ps::SweepSummary summary;
  {
    std::ofstream out(partial);
    if (!out) throw IoFailure{"cannot open " + partial + " for writing"};
    summary = ps::run_sweep(plan, &out, a.jobs);
  }
  std::error_code ec;
  std::filesystem::rename(partial, a.out, ec);
  if (ec) throw IoFailure{"cannot rename " + partial + " to " + a.out + ": " + ec.message()};
  const std::string meta = basename_without_csv(a.out) + ".meta.json";
  save(meta, [&](std::ostream& o) { o << ps::plan_metadata(plan, a.jobs).dump(2) << '\n'; });

  std::printf("%6s %10s %-16s %6s %9s %10s %9s %9s\n", "n", "sigma", "method", "trials", "cert_pass",
              "mean_iter", "rtr>eig", "eig>z");
  for (const auto& c : summary.cells) {
    std::printf("%6zu %10.4f %-16s %6zu %9.3f %10.1f %9.3f %9.3f\n", c.n, c.sigma,
                std::string(ps::method_name(c.method)).c_str(), c.count, c.cert_pass_rate, c.mean_iterations,
                c.rtr_beats_eig_rate, c.eig_beats_signal_rate);
  }
  std::cout << "wrote " << summary.records.size() << " records to " << a.out << " (metadata " << meta << ")\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase synchronization: eigenvector method, generalized power method, Riemannian ascent, "
               "and global-optimality certificates"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ps::kVersion));

  SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Estimate phases from a HERM matrix file and certify the result");
  s->add_option("matrix", solve.matrix, "HERM matrix file")->required();
  s->add_option("--method", solve.method, "Solver")->check(CLI::IsMember({"gpm", "ascent", "eig"}));
  s->add_option("--out", solve.out, "Write the estimate as a PHASES file");
  s->add_option("--seed", solve.seed, "Seed for eigen-iteration and ascent start vectors");
  s->add_option("--tol", solve.tol, "Certificate tolerance (0: 1e-5 for gpm/eig, 1e-9 for ascent)");
  s->add_option("--alpha-margin", solve.alpha_margin, "Extra inertia added to alpha (gpm)")
      ->check(CLI::NonNegativeNumber);
  s->add_option("--max-iter", solve.max_iter, "Iteration cap (0: 10n+5000 for gpm, 100n+10000 for ascent)");
  s->add_option("--eig-method", solve.eig_method, "Eigen route")->check(CLI::IsMember({"power", "dense"}));

  CertifyArgs cert;
  auto* c = app.add_subcommand("certify", "Check global optimality of a phase vector via S(x)");
  c->add_option("matrix", cert.matrix, "HERM matrix file")->required();
  c->add_option("phases", cert.phases, "PHASES file")->required();
  c->add_option("--tol", cert.tol, "Pass iff lambda_min/|lambda_max| >= -tol")->check(CLI::PositiveNumber);
  c->add_option("--seed", cert.seed, "Seed for eigen-iteration start vectors");
  c->add_option("--eig-method", cert.eig_method, "Eigen route")->check(CLI::IsMember({"power", "dense"}));

  SimulateArgs sim;
  auto* m = app.add_subcommand("simulate", "Write a planted instance C = zz* + sigma W and its signal z");
  m->add_option("--n", sim.n, "Problem size")->check(CLI::PositiveNumber);
  m->add_option("--sigma", sim.sigma, "Noise level")->check(CLI::NonNegativeNumber);
  m->add_option("--seed", sim.seed, "Instance seed");
  m->add_option("--out-prefix", sim.out_prefix, "Writes <prefix>.herm and <prefix>.phases");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "Monte Carlo sweep over an (n, sigma) grid");
  w->add_option("--n", sw.n_values, "Problem sizes")->delimiter(',');
  auto* rel = w->add_option("--sigma-rel", sw.sigma_rel, "Noise levels as multiples of sqrt(n)")->delimiter(',');
  auto* abs = w->add_option("--sigma-abs", sw.sigma_abs, "Absolute noise levels")->delimiter(',');
  rel->excludes(abs);
  w->add_option("--trials", sw.trials, "Trials per cell")->check(CLI::PositiveNumber);
  w->add_flag("--full-trials", sw.full_trials, "Use 100 trials per cell");
  w->add_option("--methods", sw.methods, "Subset of EIG,GPM,ASCENT,ASCENT_EIG_INIT")
      ->delimiter(',')
      ->check(CLI::IsMember({"EIG", "GPM", "ASCENT", "ASCENT_EIG_INIT"}));
  w->add_option("--seed", sw.seed, "Master seed");
  w->add_option("--jobs", sw.jobs, "Worker threads")->check(CLI::PositiveNumber);
  w->add_option("--out", sw.out, "CSV output path (metadata goes to <base>.meta.json)");
  w->add_flag("--no-timing", sw.no_timing, "Write runtime_ms as 0 so output is byte-reproducible");
  w->add_option("--eig-method", sw.eig_method, "Eigen route")->check(CLI::IsMember({"power", "dense"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParse;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*c) return cmd_certify(cert);
    if (*m) return cmd_simulate(sim);
    if (*w) return cmd_sweep(sw);
  } catch (const ps::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const IoFailure& e) {
    std::cerr << "I/O error: " << e.what << '\n';
    return kIo;
  } catch (const ps::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ps::ConvergenceError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  }
  return kOk;
}
