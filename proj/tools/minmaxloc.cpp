// Command-line driver: scenario generation, centralized and distributed
// solves, the single-sensor grid oracle, and Monte Carlo sweeps.
//
// Exit codes: 0 success, 1 usage or invalid input, 2 numerical failure,
// 3 I/O error.

#include "minmaxloc/central.hpp"
#include "minmaxloc/dist.hpp"
#include "minmaxloc/errors.hpp"
#include "minmaxloc/experiment.hpp"
#include "minmaxloc/geom.hpp"
#include "minmaxloc/json_io.hpp"
#include "minmaxloc/model.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace mmloc;

namespace {

enum Exit { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

struct ErrorFlags {
  std::optional<double> gamma;
  std::optional<double> sigma;
  std::optional<double> ratio;

  void add_to(CLI::App* app) {
    app->add_option("--gamma", gamma, "uniform error bound");
    app->add_option("--sigma", sigma, "Gaussian error standard deviation");
    app->add_option("--ratio", ratio, "outlier ratio (mixture, needs --sigma)");
  }

  std::optional<ErrorModel> model() const {
    if (gamma && sigma) throw InvalidInput("--gamma and --sigma are mutually exclusive");
    if (ratio && !sigma) throw InvalidInput("--ratio requires --sigma");
    if (gamma) return UniformError{*gamma};
    if (sigma && ratio) return MixtureError{*sigma, *ratio};
    if (sigma) return GaussianError{*sigma};
    return std::nullopt;
  }
};

FeasibleRegion region_from_json(const Json& j) {
  FeasibleRegion region;
  try {
    for (const auto& c : j.at("constraints")) {
      region.constraints.push_back(
          {Point2(c.at("x").get<double>(), c.at("y").get<double>()), c.at("lower").get<double>(),
           c.at("upper").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed region: ") + e.what());
  }
  return region;
}

Json validation_json(const ValidationReport& r) {
  return {{"connected", r.connected}, {"anchors_noncollinear", r.anchors_noncollinear}, {"warnings", r.warnings}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimax range-based sensor localization"};
  app.require_subcommand(1);

  std::string out;
  std::uint64_t seed = 1;
  ErrorFlags err;

  // generate
  auto* gen = app.add_subcommand("generate", "random scenario as JSON");
  int n_sensors = 20;
  std::string layout = "central";
  double range = 0.5;
  gen->add_option("-n,--sensors", n_sensors, "number of sensors")->check(CLI::PositiveNumber);
  gen->add_option("--anchors", layout, "anchor layout: central (+-0.3) or corner (+-0.5)")
      ->check(CLI::IsMember({"central", "corner"}));
  gen->add_option("--range", range, "sensing range")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "random seed");
  err.add_to(gen);
  gen->add_option("--out", out, "output file (default stdout)");

  // solve-central
  auto* central = app.add_subcommand("solve-central", "centralized minimax SDP");
  std::string scenario_path;
  int max_iters = 200;
  central->add_option("scenario", scenario_path, "scenario JSON")->required();
  central->add_option("--max-iters", max_iters, "interior-point iteration limit")->check(CLI::PositiveNumber);
  central->add_option("--out", out, "output file (default stdout)");
  std::string sdpa_path;
  central->add_option("--sdpa", sdpa_path, "also write the dual SDP in SDPA sparse format");

  // solve-dist
  auto* dist = app.add_subcommand("solve-dist", "distributed refinement; writes one JSON line per round");
  DisMinMaxConfig dcfg;
  std::string neighbor_model = "inflated";
  dist->add_option("scenario", scenario_path, "scenario JSON")->required();
  dist->add_option("--epsilon", dcfg.epsilon, "localization threshold on the radius change")
      ->check(CLI::PositiveNumber);
  dist->add_option("--max-rounds", dcfg.max_rounds, "round limit")->check(CLI::PositiveNumber);
  dist->add_option("--threads", dcfg.threads, "worker threads per round")->check(CLI::PositiveNumber);
  dist->add_option("--neighbor-model", neighbor_model, "inflated or estimate")
      ->check(CLI::IsMember({"inflated", "estimate"}));
  dist->add_option("--out", out, "output file (default stdout)");

  // oracle
  auto* orc = app.add_subcommand("oracle", "grid Chebyshev center of one sensor's region");
  std::string region_path;
  int sensor = -1;
  double resolution = 1e-3;
  orc->add_option("input", region_path,
                  "scenario JSON (with --sensor) or region JSON {\"constraints\": [{x, y, lower, upper}]}")
      ->required();
  orc->add_option("--sensor", sensor, "sensor id when the input is a scenario");
  orc->add_option("--resolution", resolution, "grid spacing")->check(CLI::PositiveNumber);
  orc->add_option("--out", out, "output file (default stdout)");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Monte Carlo sweep; writes <out>.csv and <out>.json");
  std::string spec_path;
  std::optional<int> trials;
  std::optional<std::uint64_t> exp_seed;
  std::optional<double> exp_epsilon;
  std::optional<int> exp_rounds;
  int threads = 1;
  bool no_timing = false;
  exp->add_option("spec", spec_path, "sweep spec JSON")->required();
  exp->add_option("--trials", trials, "override the trial count")->check(CLI::PositiveNumber);
  exp->add_option("--seed", exp_seed, "override the master seed");
  exp->add_option("--epsilon", exp_epsilon, "override the distributed threshold")->check(CLI::PositiveNumber);
  exp->add_option("--max-rounds", exp_rounds, "override the distributed round limit")->check(CLI::PositiveNumber);
  exp->add_option("--threads", threads, "trial worker threads")->check(CLI::PositiveNumber);
  exp->add_flag("--no-timing", no_timing, "leave the seconds column empty");
  exp->add_option("--out", out, "output prefix")->required();

  // validate
  auto* val = app.add_subcommand("validate", "connectivity and anchor geometry checks");
  val->add_option("scenario", scenario_path, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      ScenarioConfig cfg;
      cfg.n_sensors = n_sensors;
      cfg.anchor_positions = layout == "corner" ? corner_anchor_layout() : centralized_anchor_layout();
      cfg.sensing_range = range;
      NetworkScenario s = generate_scenario(cfg, seed);
      if (const auto model = err.model()) s = apply_errors(s, *model, derive_seed(seed, 1));
      emit(out, scenario_to_json(s).dump(2) + "\n");
    } else if (*central) {
      const NetworkScenario s = scenario_from_json(read_json_file(scenario_path));
      if (!sdpa_path.empty()) {
        std::ostringstream dat;
        sdp::write_sdpa(assemble_dual_sdp(s, build_feasibility_intervals(s)).problem, dat);
        write_text_file(sdpa_path, dat.str());
      }
      sdp::SolverConfig cfg;
      cfg.max_iters = max_iters;
      const CentralEstimate e = solve_minmax_sdp(s, cfg);
      emit(out, estimate_to_json(e).dump(2) + "\n");
      if (e.solver_status != sdp::SdpStatus::Optimal) {
        std::cerr << "solver status: " << sdp::to_string(e.solver_status) << "\n";
        if (e.solver_status == sdp::SdpStatus::NumericalFailure || e.solver_status == sdp::SdpStatus::Infeasible)
          return kNumerical;
      }
    } else if (*dist) {
      const NetworkScenario s = scenario_from_json(read_json_file(scenario_path));
      dcfg.neighbor_model = neighbor_model == "estimate" ? NeighborModel::Estimate : NeighborModel::Inflated;
      const DisMinMaxTrace trace = run_dis_minmax(s, dcfg);
      std::ostringstream buf;
      write_trace_jsonl(trace, buf);
      emit(out, buf.str());
      if (trace.status != "ok") {
        std::cerr << "distributed run: " << trace.status << "\n";
        if (trace.status.rfind("initial estimate failed", 0) == 0) return kNumerical;
      }
    } else if (*orc) {
      const Json j = read_json_file(region_path);
      FeasibleRegion region;
      if (j.contains("constraints")) {
        region = region_from_json(j);
      } else {
        if (sensor < 0) throw InvalidInput("--sensor is required with a scenario input");
        const NetworkScenario s = scenario_from_json(j);
        region = anchor_region(s, build_feasibility_intervals(s), sensor);
      }
      const ChebyshevResult c = grid_chebyshev_center(region, std::nullopt, resolution);
      const Point2 p = project_to_region(c.center, region, std::nullopt, resolution);
      const double rp = grid_radius_from(p, region, std::nullopt, resolution);
      Json result = {{"center", {c.center.x(), c.center.y()}},
                     {"radius", c.radius},
                     {"projection", {p.x(), p.y()}},
                     {"projection_radius", rp},
                     {"resolution", c.grid_resolution},
                     {"feasible_points", c.feasible_points}};
      emit(out, result.dump(2) + "\n");
    } else if (*exp) {
      ExperimentSpec spec = spec_from_json(read_json_file(spec_path));
      if (trials) spec.trials = *trials;
      if (exp_seed) spec.seed = *exp_seed;
      if (exp_epsilon) spec.dist.epsilon = *exp_epsilon;
      if (exp_rounds) spec.dist.max_rounds = *exp_rounds;
      const ExperimentReport report = run_experiment(spec, threads);
      std::ostringstream csv;
      write_csv(report, csv, !no_timing);
      write_text_file(out + ".csv", csv.str());
      write_text_file(out + ".json", report_to_json(report).dump(2) + "\n");
      for (const auto& a : report.aggregates) {
        std::cout << a.estimator << " @ " << a.sweep_value << ": mean rmse " << a.mean_rmse << " (sd "
                  << a.stdev_rmse << ", n=" << a.count << ")\n";
      }
    } else if (*val) {
      const NetworkScenario s = scenario_from_json(read_json_file(scenario_path));
      const ValidationReport r = validate_scenario(s);
      std::cout << validation_json(r).dump(2) << "\n";
      return r.ok() ? kOk : kUsage;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
