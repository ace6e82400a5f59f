#include "minmaxloc/experiment.hpp"

#include "minmaxloc/baseline.hpp"
#include "minmaxloc/central.hpp"
#include "minmaxloc/errors.hpp"
#include "minmaxloc/json_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace mmloc {

double rmse(const std::map<NodeId, Point2>& estimates, const std::map<NodeId, Point2>& truth) {
  if (estimates.size() != truth.size()) throw InvalidInput("rmse: estimate and truth sets differ in size");
  if (truth.empty()) throw InvalidInput("rmse: no sensors");
  double sum = 0.0;
  for (const auto& [id, p] : truth) {
    auto it = estimates.find(id);
    if (it == estimates.end()) throw InvalidInput("rmse: no estimate for sensor " + std::to_string(id));
    sum += (it->second - p).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(truth.size()));
}

std::string to_string(ErrorFamily family) {
  switch (family) {
    case ErrorFamily::Uniform: return "uniform";
    case ErrorFamily::Gaussian: return "gaussian";
    case ErrorFamily::Mixture: return "mixture";
  }
  return "unknown";
}

ErrorFamily parse_error_family(const std::string& name) {
  if (name == "uniform") return ErrorFamily::Uniform;
  if (name == "gaussian") return ErrorFamily::Gaussian;
  if (name == "mixture") return ErrorFamily::Mixture;
  throw InvalidInput("unknown error family '" + name + "'");
}

void ExperimentSpec::validate() const {
  if (scenario.n_sensors < 1) throw InvalidInput("n_sensors must be at least 1");
  if (trials < 0) throw InvalidInput("trials must be nonnegative");
  for (const auto& e : estimators) {
    if (e != kMinmaxSdp && e != kDisMinmax && e != kBaselineLs) throw InvalidInput("unknown estimator '" + e + "'");
  }
  for (double v : sweep_values) check_error_model(error_model(v));
  dist.validate();
  solver.validate();
}

ErrorModel ExperimentSpec::error_model(double v) const {
  switch (family) {
    case ErrorFamily::Uniform: return UniformError{v};
    case ErrorFamily::Gaussian: return GaussianError{v};
    case ErrorFamily::Mixture: return MixtureError{mixture_sigma, v};
  }
  throw InvalidInput("unknown error family");
}

TrialSeeds trial_seeds(std::uint64_t master, int trial) {
  const std::uint64_t base = derive_seed(master, static_cast<std::uint64_t>(trial));
  return {derive_seed(base, 0), derive_seed(base, 1), derive_seed(base, 2)};
}

const Aggregate& ExperimentReport::aggregate(double sweep_value, const std::string& estimator) const {
  for (const auto& a : aggregates) {
    if (a.sweep_value == sweep_value && a.estimator == estimator) return a;
  }
  throw InvalidInput("no aggregate for " + estimator);
}

std::vector<Aggregate> aggregate_records(const std::vector<TrialRecord>& records) {
  std::vector<Aggregate> out;
  std::vector<std::vector<double>> samples;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate& a) {
      return a.sweep_value == r.sweep_value && a.estimator == r.estimator;
    });
    if (it == out.end()) {
      out.push_back({r.sweep_value, r.estimator, 0, 0.0, 0.0});
      samples.emplace_back();
      it = out.end() - 1;
    }
    if (r.ok) samples[static_cast<std::size_t>(it - out.begin())].push_back(r.rmse);
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto& s = samples[k];
    out[k].count = static_cast<int>(s.size());
    if (s.empty()) continue;
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= static_cast<double>(s.size());
    double var = 0.0;
    for (double v : s) var += (v - mean) * (v - mean);
    out[k].mean_rmse = mean;
    out[k].stdev_rmse = s.size() > 1 ? std::sqrt(var / static_cast<double>(s.size() - 1)) : 0.0;
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TrialRecord run_estimator(const ExperimentSpec& spec, const NetworkScenario& noisy, const std::string& estimator,
                          const TrialSeeds& seeds) {
  TrialRecord rec;
  rec.estimator = estimator;
  rec.errors_in_bound = errors_within_bound(noisy);
  const auto start = Clock::now();
  try {
    if (estimator == kMinmaxSdp) {
      const CentralEstimate est = solve_minmax_sdp(noisy, spec.solver);
      rec.rmse = rmse(est.positions, noisy.true_positions);
      rec.worst_case_value = est.worst_case_value;
      rec.rounds = est.iterations;
      if (est.solver_status != sdp::SdpStatus::Optimal) rec.error = "solver status " + sdp::to_string(est.solver_status);
    } else if (estimator == kDisMinmax) {
      const DisMinMaxTrace trace = run_dis_minmax(noisy, spec.dist);
      for (const auto& round : trace.rounds) {
        std::map<NodeId, Point2> pos;
        for (const auto& [id, s] : round.states) pos.emplace(id, s.estimate);
        rec.rmse_by_round.push_back(rmse(pos, noisy.true_positions));
        rec.rmse_upper_bound_by_round.push_back(round.rmse_upper_bound);
      }
      rec.rmse = rec.rmse_by_round.back();
      for (const auto& [id, s] : trace.final_round().states) rec.worst_case_value += s.radius_sq;
      rec.rounds = static_cast<int>(trace.rounds.size()) - 1;
      if (trace.status != "ok") rec.error = trace.status;
      if (trace.rounds.size() == 1 && trace.status != "ok") rec.ok = false;
    } else {
      const BaselineResult res = baseline_least_squares(noisy, seeds.baseline, {}, spec.scenario.area_min,
                                                        spec.scenario.area_max);
      rec.rmse = rmse(res.positions, noisy.true_positions);
      rec.rounds = res.iterations;
      if (!res.converged) rec.error = "not converged";
    }
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  rec.seconds = seconds_since(start);
  return rec;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  ExperimentReport report;
  report.spec = spec;
  const std::size_t points = spec.sweep_values.size();
  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  std::vector<std::vector<TrialRecord>> cells(points * trials);

  auto run_cell = [&](std::size_t cell) {
    const std::size_t p = cell / trials;
    const int trial = static_cast<int>(cell % trials);
    const TrialSeeds seeds = trial_seeds(spec.seed, trial);
    std::vector<TrialRecord>& out = cells[cell];
    try {
      const NetworkScenario clean = generate_scenario(spec.scenario, seeds.scenario);
      const NetworkScenario noisy = apply_errors(clean, spec.error_model(spec.sweep_values[p]), seeds.errors);
      for (const auto& est : spec.estimators) out.push_back(run_estimator(spec, noisy, est, seeds));
    } catch (const Error& e) {
      out.clear();
      for (const auto& est : spec.estimators) {
        TrialRecord rec;
        rec.estimator = est;
        rec.ok = false;
        rec.error = e.what();
        out.push_back(rec);
      }
    }
    for (auto& rec : out) {
      rec.sweep_value = spec.sweep_values[p];
      rec.trial = trial;
      rec.seed = seeds.scenario;
    }
  };

  const std::size_t workers = std::min<std::size_t>(cells.size(), static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < cells.size(); c += workers) run_cell(c);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& cell : cells) {
    for (auto& rec : cell) report.records.push_back(std::move(rec));
  }
  report.aggregates = aggregate_records(report.records);
  return report;
}

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(const ExperimentReport& report, std::ostream& out, bool include_timing) {
  out << "sweep_value,estimator,trial,rmse,worst_case_value,rounds,seconds\n";
  for (const auto& r : report.records) {
    out << format_number(r.sweep_value) << ',' << r.estimator << ',' << r.trial << ','
        << (r.ok ? format_number(r.rmse) : "nan") << ',' << (r.ok ? format_number(r.worst_case_value) : "nan") << ','
        << r.rounds << ',' << (include_timing ? format_number(r.seconds) : "") << '\n';
  }
}

void emit_outputs(const ExperimentReport& report, const std::string& csv_path, const std::string& json_path) {
  std::ostringstream csv;
  write_csv(report, csv);
  write_text_file(csv_path, csv.str());
  write_text_file(json_path, report_to_json(report).dump(2) + "\n");
}

}  // namespace mmloc
