#pragma once

// Monte Carlo sweeps over (n, sigma) grids. Every trial is an independent
// job whose record depends only on (plan, n, sigma index, trial); the only
// scheduling-dependent column is runtime_ms, which can be switched off.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "phasesync/estimators.hpp"
#include "phasesync/io.hpp"
#include "phasesync/manifold.hpp"
#include "phasesync/model.hpp"
#include "phasesync/version.hpp"

namespace phasesync {

enum class Method { kEig, kGpm, kAscent, kAscentEigInit };

inline constexpr std::string_view method_name(Method m) {
  switch (m) {
    case Method::kEig: return "EIG";
    case Method::kGpm: return "GPM";
    case Method::kAscent: return "ASCENT";
    case Method::kAscentEigInit: return "ASCENT_EIG_INIT";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::kEig, Method::kGpm, Method::kAscent, Method::kAscentEigInit}) {
    if (s == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

inline bool is_ascent(Method m) { return m == Method::kAscent || m == Method::kAscentEigInit; }

struct AbsoluteSigmas {
  std::vector<double> values;
};
/// sigma = multiple * sqrt(n).
struct RelativeSigmas {
  std::vector<double> multiples;
};
using SigmaGrid = std::variant<AbsoluteSigmas, RelativeSigmas>;

struct SweepPlan {
  std::vector<std::size_t> n_values{25, 50, 100, 200, 400};
  SigmaGrid sigmas = RelativeSigmas{{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2}};
  std::size_t trials = 50;
  std::vector<Method> methods{Method::kEig, Method::kGpm, Method::kAscent};
  std::uint64_t master_seed = 1;
  double tol_gpm = 1e-5;     // also used for EIG
  double tol_ascent = 1e-9;
  double ascent_grad_tol = 1e-6;
  EigenMethod eig_method = EigenMethod::kDense;
  bool record_runtime = true;
  bool record_traces = false;  // GPM cost / l1 traces, passed to the observer

  std::size_t sigma_count() const {
    return std::visit([](const auto& g) {
      if constexpr (std::is_same_v<std::decay_t<decltype(g)>, AbsoluteSigmas>) return g.values.size();
      else return g.multiples.size();
    }, sigmas);
  }

  double sigma(std::size_t n, std::size_t index) const {
    if (const auto* abs = std::get_if<AbsoluteSigmas>(&sigmas)) return abs->values.at(index);
    return std::get<RelativeSigmas>(sigmas).multiples.at(index) * std::sqrt(static_cast<double>(n));
  }

  double tolerance(Method m) const { return is_ascent(m) ? tol_ascent : tol_gpm; }

  void validate() const {
    if (trials < 1) throw std::invalid_argument("SweepPlan: trials must be >= 1");
    if (n_values.empty()) throw std::invalid_argument("SweepPlan: n_values must be nonempty");
    if (methods.empty()) throw std::invalid_argument("SweepPlan: methods must be nonempty");
    if (sigma_count() == 0) throw std::invalid_argument("SweepPlan: sigma grid must be nonempty");
    for (std::size_t n : n_values) {
      if (n == 0) throw std::invalid_argument("SweepPlan: n must be >= 1");
      for (std::size_t k = 0; k < sigma_count(); ++k) {
        const double s = sigma(n, k);
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("SweepPlan: sigma must be >= 0");
      }
    }
  }
};

struct SweepRecord {
  std::size_t n = 0;
  double sigma = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  Method method = Method::kEig;
  std::string status = "ok";
  std::size_t iterations = 0;
  double f_value = 0.0;
  double cert_ratio = 0.0;
  bool cert_pass = false;
  double dist_to_signal = 0.0;
  double eig_dist_to_signal = 0.0;
  bool rtr_beats_eig = false;
  bool eig_beats_signal = false;
  double runtime_ms = 0.0;

  auto sort_key() const { return std::make_tuple(n, sigma, trial, static_cast<int>(method)); }
  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

inline std::uint64_t trial_seed(std::uint64_t master, std::size_t n, std::size_t sigma_index,
                                std::size_t trial) {
  return derive_seed(derive_seed(derive_seed(master, n), sigma_index), trial);
}

/// Full per-method output of one trial, for observers that need more than
/// the CSV row (traces, the instance itself).
struct MethodOutcome {
  Method method;
  PhaseVector estimate;
  Certificate certificate;
  std::optional<GpmResult> gpm;
  std::optional<AscentResult> ascent;
};

struct CellDetail {
  const ProblemInstance& instance;
  std::size_t sigma_index;
  std::size_t trial;
  const PhaseVector& eig_estimate;
  const std::vector<MethodOutcome>& outcomes;
};

/// Called once per trial. With jobs > 1 it is invoked under a lock.
using CellObserver = std::function<void(const CellDetail&)>;

/// Runs every method of the plan on one instance; one record per method.
/// Solver failures become rows with a non-"ok" status.
inline std::vector<SweepRecord> run_cell(std::size_t n, std::size_t sigma_index, std::size_t trial,
                                         const SweepPlan& plan, const CellObserver& observer = {}) {
  using Clock = std::chrono::steady_clock;
  const double sigma = plan.sigma(n, sigma_index);
  const std::uint64_t seed = trial_seed(plan.master_seed, n, sigma_index, trial);
  const ProblemInstance inst = assemble_instance(n, sigma, seed);
  const EigenOptions eig{plan.eig_method, kDefaultEigTol, 0, derive_seed(seed, "eig")};

  std::vector<SweepRecord> records;
  std::vector<MethodOutcome> outcomes;

  const auto t_eig = Clock::now();
  std::optional<PhaseVector> vhat;
  std::string eig_error;
  try {
    vhat = eigenvector_estimator(inst.data, eig);
  } catch (const std::exception& e) {
    eig_error = e.what();
  }
  const double eig_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_eig).count();

  const double eig_dist = vhat ? distance(inst.signal, *vhat) : std::nan("");
  const bool eig_beats_signal = vhat && cost(inst.data, *vhat) > cost(inst.data, inst.signal);

  for (Method m : plan.methods) {
    SweepRecord r;
    r.n = n;
    r.sigma = sigma;
    r.trial = trial;
    r.seed = seed;
    r.method = m;
    r.eig_dist_to_signal = eig_dist;
    r.eig_beats_signal = eig_beats_signal;
    const auto t0 = Clock::now();
    try {
      if (!vhat && m != Method::kAscent) throw std::runtime_error("eigenvector estimator failed: " + eig_error);
      MethodOutcome out{m, vhat ? *vhat : PhaseVector::ones(n), {}, std::nullopt, std::nullopt};
      switch (m) {
        case Method::kEig:
          break;
        case Method::kGpm: {
          GpmConfig cfg;
          cfg.eig = eig.with_seed(derive_seed(seed, "gpm"));
          cfg.record_trace = plan.record_traces;
          GpmResult g = gpm_run(inst.data, *vhat, cfg);
          r.iterations = g.iterations;
          if (!g.converged) r.status = g.zero_image ? "zero_image" : "unconverged";
          out.estimate = g.estimate;
          out.gpm = std::move(g);
          break;
        }
        case Method::kAscent:
        case Method::kAscentEigInit: {
          AscentConfig cfg;
          cfg.grad_tol = plan.ascent_grad_tol;
          cfg.eig = eig;
          cfg.record_trace = plan.record_traces;
          const PhaseVector x0 = m == Method::kAscent
                                     ? generate_signal(n, derive_seed(seed, "ascent-start"))
                                     : *vhat;
          AscentResult a = riemannian_ascent(inst.data, x0, cfg);
          r.iterations = a.iterations;
          if (a.line_search_failed) r.status = "line_search_failed";
          else if (!a.converged) r.status = "unconverged";
          out.estimate = a.estimate;
          out.ascent = std::move(a);
          break;
        }
      }
      out.certificate = certify(inst.data, out.estimate, plan.tolerance(m), eig);
      r.f_value = cost(inst.data, out.estimate);
      r.cert_ratio = out.certificate.ratio;
      r.cert_pass = out.certificate.pass;
      r.dist_to_signal = distance(inst.signal, out.estimate);
      r.rtr_beats_eig = is_ascent(m) && r.dist_to_signal < eig_dist;
      outcomes.push_back(std::move(out));
    } catch (const std::exception& e) {
      r.status = "error";
      r.f_value = r.cert_ratio = r.dist_to_signal = std::nan("");
      r.cert_pass = false;
      r.rtr_beats_eig = false;
    }
    if (plan.record_runtime) {
      r.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
      if (m != Method::kAscent) r.runtime_ms += eig_ms;
    }
    records.push_back(std::move(r));
  }
  if (observer && vhat) observer(CellDetail{inst, sigma_index, trial, *vhat, outcomes});
  return records;
}

struct CellAggregate {
  std::size_t n = 0;
  double sigma = 0.0;
  Method method = Method::kEig;
  std::size_t count = 0;
  std::size_t failed = 0;  // status != "ok"
  double cert_pass_rate = 0.0;
  double mean_iterations = 0.0;
  double rtr_beats_eig_rate = 0.0;
  double eig_beats_signal_rate = 0.0;

  friend bool operator==(const CellAggregate&, const CellAggregate&) = default;
};

/// Per-(n, sigma, method) means over trials. Sums run in sorted record
/// order, so the result is independent of how records were produced.
inline std::vector<CellAggregate> aggregate(std::vector<SweepRecord> records) {
  std::sort(records.begin(), records.end(),
            [](const SweepRecord& a, const SweepRecord& b) { return a.sort_key() < b.sort_key(); });
  std::map<std::tuple<std::size_t, double, int>, CellAggregate> cells;
  for (const auto& r : records) {
    auto& c = cells[{r.n, r.sigma, static_cast<int>(r.method)}];
    c.n = r.n;
    c.sigma = r.sigma;
    c.method = r.method;
    ++c.count;
    if (r.status != "ok") ++c.failed;
    c.cert_pass_rate += r.cert_pass ? 1.0 : 0.0;
    c.mean_iterations += static_cast<double>(r.iterations);
    c.rtr_beats_eig_rate += r.rtr_beats_eig ? 1.0 : 0.0;
    c.eig_beats_signal_rate += r.eig_beats_signal ? 1.0 : 0.0;
  }
  std::vector<CellAggregate> out;
  out.reserve(cells.size());
  for (auto& [key, c] : cells) {
    const double k = static_cast<double>(c.count);
    c.cert_pass_rate /= k;
    c.mean_iterations /= k;
    c.rtr_beats_eig_rate /= k;
    c.eig_beats_signal_rate /= k;
    out.push_back(c);
  }
  return out;
}

inline constexpr std::string_view kCsvHeader =
    "n,sigma,trial,seed,method,status,iterations,f_value,cert_ratio,cert_pass,dist_to_signal,"
    "eig_dist_to_signal,rtr_beats_eig,eig_beats_signal,runtime_ms";

inline void write_csv_row(std::ostream& out, const SweepRecord& r) {
  out << r.n << ',' << format_real(r.sigma) << ',' << r.trial << ',' << r.seed << ','
      << method_name(r.method) << ',' << r.status << ',' << r.iterations << ','
      << format_real(r.f_value) << ',' << format_real(r.cert_ratio) << ',' << (r.cert_pass ? 1 : 0)
      << ',' << format_real(r.dist_to_signal) << ',' << format_real(r.eig_dist_to_signal) << ','
      << (r.rtr_beats_eig ? 1 : 0) << ',' << (r.eig_beats_signal ? 1 : 0) << ','
      << format_real(r.runtime_ms) << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<SweepRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) write_csv_row(out, r);
}

inline std::vector<SweepRecord> read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError(1, "unexpected CSV header");
  std::vector<SweepRecord> out;
  auto parse_double = [&](const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw ParseError(line_no, "bad number '" + s + "'");
    return v;
  };
  auto parse_uint = [&](const std::string& s) -> std::uint64_t {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') throw ParseError(line_no, "bad integer '" + s + "'");
    return v;
  };
  auto parse_flag = [&](const std::string& s) {
    if (s == "0") return false;
    if (s == "1") return true;
    throw ParseError(line_no, "bad flag '" + s + "'");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string tok; std::getline(ss, tok, ',');) f.push_back(tok);
    if (f.size() != 15) throw ParseError(line_no, "expected 15 fields");
    SweepRecord r;
    r.n = parse_uint(f[0]);
    r.sigma = parse_double(f[1]);
    r.trial = parse_uint(f[2]);
    r.seed = parse_uint(f[3]);
    try {
      r.method = parse_method(f[4]);
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
    r.status = f[5];
    r.iterations = parse_uint(f[6]);
    r.f_value = parse_double(f[7]);
    r.cert_ratio = parse_double(f[8]);
    r.cert_pass = parse_flag(f[9]);
    r.dist_to_signal = parse_double(f[10]);
    r.eig_dist_to_signal = parse_double(f[11]);
    r.rtr_beats_eig = parse_flag(f[12]);
    r.eig_beats_signal = parse_flag(f[13]);
    r.runtime_ms = parse_double(f[14]);
    out.push_back(std::move(r));
  }
  return out;
}

struct SweepSummary {
  std::vector<SweepRecord> records;  // sorted by (n, sigma, trial, method)
  std::vector<CellAggregate> cells;
};

/// Runs the whole grid on `jobs` threads, sorts the records, and writes the
/// CSV to `sink`. Throws IoError if the stream goes bad.
inline SweepSummary run_sweep(const SweepPlan& plan, std::ostream* sink, std::size_t jobs = 1,
                              const CellObserver& observer = {}) {
  plan.validate();
  struct Job {
    std::size_t n, sigma_index, trial;
  };
  std::vector<Job> work;
  for (std::size_t n : plan.n_values) {
    for (std::size_t k = 0; k < plan.sigma_count(); ++k) {
      for (std::size_t t = 0; t < plan.trials; ++t) work.push_back({n, k, t});
    }
  }
  std::vector<std::vector<SweepRecord>> results(work.size());
  std::mutex observer_mutex;
  CellObserver locked;
  if (observer) {
    locked = [&](const CellDetail& d) {
      std::lock_guard<std::mutex> lock(observer_mutex);
      observer(d);
    };
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      results[i] = run_cell(work[i].n, work[i].sigma_index, work[i].trial, plan, locked);
    }
  };
  jobs = std::max<std::size_t>(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepSummary summary;
  for (auto& r : results) {
    for (auto& rec : r) summary.records.push_back(std::move(rec));
  }
  std::sort(summary.records.begin(), summary.records.end(),
            [](const SweepRecord& a, const SweepRecord& b) { return a.sort_key() < b.sort_key(); });
  summary.cells = aggregate(summary.records);
  if (sink) {
    write_csv(*sink, summary.records);
    sink->flush();
    if (!*sink) throw IoError("failed writing sweep CSV");
  }
  return summary;
}

/// Sidecar describing the plan that produced a CSV.
inline nlohmann::json plan_metadata(const SweepPlan& plan, std::size_t jobs) {
  nlohmann::json j;
  j["artifact"] = "phasesync";
  j["version"] = std::string(kVersion);
  j["n_values"] = plan.n_values;
  if (const auto* abs = std::get_if<AbsoluteSigmas>(&plan.sigmas)) {
    j["sigma_mode"] = "absolute";
    j["sigma_values"] = abs->values;
  } else {
    j["sigma_mode"] = "relative_sqrt_n";
    j["sigma_values"] = std::get<RelativeSigmas>(plan.sigmas).multiples;
  }
  j["trials"] = plan.trials;
  std::vector<std::string> methods;
  for (Method m : plan.methods) methods.emplace_back(method_name(m));
  j["methods"] = methods;
  j["master_seed"] = plan.master_seed;
  j["tol_gpm"] = plan.tol_gpm;
  j["tol_ascent"] = plan.tol_ascent;
  j["ascent_grad_tol"] = plan.ascent_grad_tol;
  j["eig_method"] = plan.eig_method == EigenMethod::kDense ? "dense" : "power";
  j["signal_sampling"] = "fresh signal and noise per trial";
  j["record_runtime"] = plan.record_runtime;
  j["jobs"] = jobs;
  return j;
}

}  // namespace phasesync
