#pragma once

// Monte Carlo harness: sweeps an error parameter, runs the estimators on
// common random scenarios and collects RMSE, bounds and timings.

#include "minmaxloc/dist.hpp"
#include "minmaxloc/model.hpp"
#include "minmaxloc/sdp.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mmloc {

/// sqrt(mean |x_est - x|^2). Throws InvalidInput on mismatched keys.
double rmse(const std::map<NodeId, Point2>& estimates, const std::map<NodeId, Point2>& truth);

/// Error family swept by an experiment. The sweep value is gamma for
/// Uniform, sigma for Gaussian and the outlier ratio for Mixture.
enum class ErrorFamily { Uniform, Gaussian, Mixture };

std::string to_string(ErrorFamily family);
ErrorFamily parse_error_family(const std::string& name);

inline const char* const kMinmaxSdp = "minmax_sdp";
inline const char* const kDisMinmax = "dis_minmax";
inline const char* const kBaselineLs = "baseline_ls";

struct ExperimentSpec {
  ScenarioConfig scenario;
  ErrorFamily family = ErrorFamily::Uniform;
  std::vector<double> sweep_values;
  double mixture_sigma = 0.02;  // sigma of the mixture sweep
  std::vector<std::string> estimators{kMinmaxSdp, kBaselineLs};
  int trials = 20;
  std::uint64_t seed = 1;
  DisMinMaxConfig dist;
  sdp::SolverConfig solver;

  void validate() const;
  ErrorModel error_model(double sweep_value) const;
};

/// Seeds of one trial; identical across sweep points.
struct TrialSeeds {
  std::uint64_t scenario = 0;
  std::uint64_t errors = 0;
  std::uint64_t baseline = 0;
};
TrialSeeds trial_seeds(std::uint64_t master, int trial);

struct TrialRecord {
  double sweep_value = 0.0;
  std::string estimator;
  int trial = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double rmse = 0.0;
  double worst_case_value = 0.0;  // central bound, or sum of final radii for dis_minmax; 0 for the baseline
  int rounds = 0;
  double seconds = 0.0;
  bool errors_in_bound = false;
  std::vector<double> rmse_by_round;
  std::vector<double> rmse_upper_bound_by_round;
};

struct Aggregate {
  double sweep_value = 0.0;
  std::string estimator;
  int count = 0;
  double mean_rmse = 0.0;
  double stdev_rmse = 0.0;
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<TrialRecord> records;  // sweep point, then trial, then estimator order
  std::vector<Aggregate> aggregates;

  /// Aggregate for a sweep point and estimator; throws InvalidInput if absent.
  const Aggregate& aggregate(double sweep_value, const std::string& estimator) const;
};

/// Mean and sample standard deviation of successful rows per (sweep value,
/// estimator), in record order.
std::vector<Aggregate> aggregate_records(const std::vector<TrialRecord>& records);

/// Trials may run on `threads` workers; records are ordered deterministically.
ExperimentReport run_experiment(const ExperimentSpec& spec, int threads = 1);

/// Columns: sweep_value,estimator,trial,rmse,worst_case_value,rounds,seconds.
void write_csv(const ExperimentReport& report, std::ostream& out, bool include_timing = true);

/// Writes the CSV and the JSON report. Throws IoError naming the path.
void emit_outputs(const ExperimentReport& report, const std::string& csv_path, const std::string& json_path);

}  // namespace mmloc
