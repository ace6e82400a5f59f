#include "minmaxloc/json_io.hpp"

#include "minmaxloc/errors.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace mmloc {

namespace {

Json point_json(const Point2& p) { return Json::array({p.x(), p.y()}); }

Point2 point_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw InvalidInput("expected a [x, y] pair");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

template <typename Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed ") + what + ": " + e.what());
  }
}

Json positions_json(const std::map<NodeId, Point2>& positions) {
  Json out = Json::object();
  for (const auto& [id, p] : positions) out[std::to_string(id)] = point_json(p);
  return out;
}

}  // namespace

Json scenario_to_json(const NetworkScenario& s) {
  Json j;
  j["sensors"] = s.sensors;
  j["anchors"] = Json::array();
  for (const auto& a : s.anchors) j["anchors"].push_back({{"id", a.id}, {"x", a.position.x()}, {"y", a.position.y()}});
  j["true_positions"] = positions_json(s.true_positions);
  j["edges"] = Json::array();
  for (const auto& m : s.edges) j["edges"].push_back({{"a", m.edge.a}, {"b", m.edge.b}, {"z", m.z}});
  j["gamma"] = s.gamma;
  j["sensing_range"] = s.sensing_range;
  return j;
}

NetworkScenario scenario_from_json(const Json& j) {
  NetworkScenario s = guarded("scenario", [&] {
    NetworkScenario out;
    out.sensors = j.at("sensors").get<std::vector<NodeId>>();
    for (const auto& a : j.at("anchors")) {
      out.anchors.push_back({a.at("id").get<NodeId>(), Point2(a.at("x").get<double>(), a.at("y").get<double>())});
    }
    if (j.contains("true_positions")) {
      for (const auto& [key, value] : j.at("true_positions").items()) {
        out.true_positions.emplace(std::stoi(key), point_from(value));
      }
    }
    for (const auto& e : j.at("edges")) {
      out.edges.push_back({{e.at("a").get<NodeId>(), e.at("b").get<NodeId>()}, e.at("z").get<double>()});
    }
    out.gamma = j.at("gamma").get<double>();
    out.sensing_range = j.value("sensing_range", 0.0);
    return out;
  });
  s.normalize();
  return s;
}

Json estimate_to_json(const CentralEstimate& e) {
  return {{"positions", positions_json(e.positions)},
          {"worst_case_value", e.worst_case_value},
          {"status", sdp::to_string(e.solver_status)},
          {"solve_seconds", e.solve_seconds}};
}

Json round_to_json(const RoundRecord& round) {
  Json nodes = Json::array();
  for (const auto& [id, s] : round.states) {
    nodes.push_back({{"id", id},
                     {"x", s.estimate.x()},
                     {"y", s.estimate.y()},
                     {"radius_sq", s.radius_sq},
                     {"localized", s.localized}});
  }
  return {{"round", round.round}, {"per_node", nodes}, {"rmse_upper_bound", round.rmse_upper_bound}};
}

void write_trace_jsonl(const DisMinMaxTrace& trace, std::ostream& out) {
  for (const auto& r : trace.rounds) out << round_to_json(r).dump() << '\n';
}

Json spec_to_json(const ExperimentSpec& spec) {
  Json anchors = Json::array();
  for (const auto& a : spec.scenario.anchor_positions) anchors.push_back(point_json(a));
  return {{"n_sensors", spec.scenario.n_sensors},
          {"anchors", anchors},
          {"sensing_range", spec.scenario.sensing_range},
          {"area_min", point_json(spec.scenario.area_min)},
          {"area_max", point_json(spec.scenario.area_max)},
          {"family", to_string(spec.family)},
          {"sweep_values", spec.sweep_values},
          {"mixture_sigma", spec.mixture_sigma},
          {"estimators", spec.estimators},
          {"trials", spec.trials},
          {"seed", spec.seed},
          {"epsilon", spec.dist.epsilon},
          {"max_rounds", spec.dist.max_rounds},
          {"solver",
           {{"gap_tol", spec.solver.gap_tol},
            {"feas_tol", spec.solver.feas_tol},
            {"max_iters", spec.solver.max_iters},
            {"step_fraction", spec.solver.step_fraction}}}};
}

ExperimentSpec spec_from_json(const Json& j) {
  return guarded("experiment spec", [&] {
    ExperimentSpec spec;
    spec.scenario.n_sensors = j.at("n_sensors").get<int>();
    if (j.contains("anchors")) {
      for (const auto& a : j.at("anchors")) spec.scenario.anchor_positions.push_back(point_from(a));
    } else {
      spec.scenario.anchor_positions = centralized_anchor_layout();
    }
    spec.scenario.sensing_range = j.value("sensing_range", spec.scenario.sensing_range);
    if (j.contains("area_min")) spec.scenario.area_min = point_from(j.at("area_min"));
    if (j.contains("area_max")) spec.scenario.area_max = point_from(j.at("area_max"));
    spec.family = parse_error_family(j.value("family", std::string("uniform")));
    spec.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    spec.mixture_sigma = j.value("mixture_sigma", spec.mixture_sigma);
    if (j.contains("estimators")) spec.estimators = j.at("estimators").get<std::vector<std::string>>();
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
    spec.dist.epsilon = j.value("epsilon", spec.dist.epsilon);
    spec.dist.max_rounds = j.value("max_rounds", spec.dist.max_rounds);
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      spec.solver.gap_tol = s.value("gap_tol", spec.solver.gap_tol);
      spec.solver.feas_tol = s.value("feas_tol", spec.solver.feas_tol);
      spec.solver.max_iters = s.value("max_iters", spec.solver.max_iters);
      spec.solver.step_fraction = s.value("step_fraction", spec.solver.step_fraction);
    }
    return spec;
  });
}

Json report_to_json(const ExperimentReport& report) {
  Json trials = Json::array();
  for (const auto& r : report.records) {
    trials.push_back({{"sweep_value", r.sweep_value},
                      {"estimator", r.estimator},
                      {"trial", r.trial},
                      {"seed", r.seed},
                      {"ok", r.ok},
                      {"error", r.error},
                      {"rmse", r.rmse},
                      {"worst_case_value", r.worst_case_value},
                      {"rounds", r.rounds},
                      {"seconds", r.seconds},
                      {"errors_in_bound", r.errors_in_bound},
                      {"rmse_by_round", r.rmse_by_round},
                      {"rmse_upper_bound_by_round", r.rmse_upper_bound_by_round}});
  }
  Json aggregates = Json::array();
  for (const auto& a : report.aggregates) {
    aggregates.push_back({{"sweep_value", a.sweep_value},
                          {"estimator", a.estimator},
                          {"count", a.count},
                          {"mean_rmse", a.mean_rmse},
                          {"stdev_rmse", a.stdev_rmse}});
  }
  return {{"config", spec_to_json(report.spec)}, {"trials", trials}, {"aggregates", aggregates}};
}

ExperimentReport report_from_json(const Json& j) {
  return guarded("report", [&] {
    ExperimentReport report;
    report.spec = spec_from_json(j.at("config"));
    for (const auto& t : j.at("trials")) {
      TrialRecord r;
      r.sweep_value = t.at("sweep_value").get<double>();
      r.estimator = t.at("estimator").get<std::string>();
      r.trial = t.at("trial").get<int>();
      r.seed = t.at("seed").get<std::uint64_t>();
      r.ok = t.at("ok").get<bool>();
      r.error = t.at("error").get<std::string>();
      r.rmse = t.at("rmse").get<double>();
      r.worst_case_value = t.at("worst_case_value").get<double>();
      r.rounds = t.at("rounds").get<int>();
      r.seconds = t.at("seconds").get<double>();
      r.errors_in_bound = t.at("errors_in_bound").get<bool>();
      r.rmse_by_round = t.at("rmse_by_round").get<std::vector<double>>();
      r.rmse_upper_bound_by_round = t.at("rmse_upper_bound_by_round").get<std::vector<double>>();
      report.records.push_back(std::move(r));
    }
    for (const auto& a : j.at("aggregates")) {
      report.aggregates.push_back({a.at("sweep_value").get<double>(), a.at("estimator").get<std::string>(),
                                   a.at("count").get<int>(), a.at("mean_rmse").get<double>(),
                                   a.at("stdev_rmse").get<double>()});
    }
    return report;
  });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace mmloc
