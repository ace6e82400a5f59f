#include "minmaxloc/errors.hpp"
#include "minmaxloc/model.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

using namespace mmloc;

namespace {

NetworkScenario triangle_scenario() {
  NetworkScenario s;
  s.sensors = {1, 2};
  s.anchors = {{10, {0, 0}}, {11, {1, 0}}, {12, {0, 1}}};
  s.true_positions = {{1, {0.3, 0.4}}, {2, {0.6, 0.2}}};
  s.edges = {{{2, 1}, 0.5}, {{1, 10}, 0.5}, {{2, 11}, 0.3}, {{12, 1}, 0.7}};
  s.gamma = 0.1;
  s.sensing_range = 1.0;
  s.normalize();
  return s;
}

// Connectivity by breadth-first search over an explicit adjacency list.
bool bfs_connected(const NetworkScenario& s) {
  std::map<NodeId, std::vector<NodeId>> adj;
  std::set<NodeId> nodes(s.sensors.begin(), s.sensors.end());
  for (const auto& a : s.anchors) nodes.insert(a.id);
  for (const auto& m : s.edges) {
    adj[m.edge.a].push_back(m.edge.b);
    adj[m.edge.b].push_back(m.edge.a);
  }
  std::set<NodeId> seen{*nodes.begin()};
  std::queue<NodeId> q;
  q.push(*nodes.begin());
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : adj[u]) {
      if (seen.insert(v).second) q.push(v);
    }
  }
  return seen.size() == nodes.size();
}

ScenarioConfig paper_central_config(int n) {
  ScenarioConfig c;
  c.n_sensors = n;
  c.anchor_positions = centralized_anchor_layout();
  c.sensing_range = 0.5;
  return c;
}

}  // namespace

TEST(Intervals, ArithmeticExamples) {
  NetworkScenario s;
  s.sensors = {1};
  s.anchors = {{2, {0, 0}}, {3, {1, 0}}, {4, {0, 1}}};
  s.edges = {{{1, 2}, 0.5}, {{1, 3}, 0.05}, {{1, 4}, 0.7}};
  s.gamma = 0.1;
  s.normalize();
  const auto b = build_feasibility_intervals(s);
  EXPECT_DOUBLE_EQ(b.at({1, 2}).lower, 0.4);
  EXPECT_DOUBLE_EQ(b.at({1, 2}).upper, 0.6);
  EXPECT_DOUBLE_EQ(b.at({1, 3}).lower, 0.0);
  EXPECT_DOUBLE_EQ(b.at({1, 3}).upper, 0.15);

  s.gamma = 0.0;
  const auto exact = build_feasibility_intervals(s);
  EXPECT_EQ(exact.at({1, 4}).lower, 0.7);
  EXPECT_EQ(exact.at({1, 4}).upper, 0.7);
}

TEST(Intervals, IndependentOfEdgeOrder) {
  NetworkScenario a = triangle_scenario();
  NetworkScenario b = a;
  std::reverse(b.edges.begin(), b.edges.end());
  b.normalize();
  EXPECT_EQ(build_feasibility_intervals(a).size(), build_feasibility_intervals(b).size());
  for (const auto& [k, v] : build_feasibility_intervals(a)) {
    EXPECT_EQ(build_feasibility_intervals(b).at(k).lower, v.lower);
    EXPECT_EQ(build_feasibility_intervals(b).at(k).upper, v.upper);
  }
}

TEST(Scenario, NormalizeOrdersKeys) {
  const NetworkScenario s = triangle_scenario();
  ASSERT_EQ(s.edges.size(), 4u);
  for (const auto& m : s.edges) {
    if (s.is_anchor(m.edge.b)) {
      EXPECT_FALSE(s.is_anchor(m.edge.a));
    } else {
      EXPECT_LT(m.edge.a, m.edge.b);
    }
  }
  EXPECT_EQ(s.num_sensor_edges(), 1u);
  EXPECT_EQ(s.num_anchor_edges(), 3u);
}

TEST(Scenario, NormalizeRejectsBadInput) {
  NetworkScenario s = triangle_scenario();
  s.edges.push_back({{10, 11}, 1.0});
  EXPECT_THROW(s.normalize(), InvalidInput);

  s = triangle_scenario();
  s.edges.push_back({{1, 2}, 0.4});
  EXPECT_THROW(s.normalize(), InvalidInput);

  s = triangle_scenario();
  s.edges.push_back({{1, 99}, 0.4});
  EXPECT_THROW(s.normalize(), InvalidInput);

  s = triangle_scenario();
  s.edges[0].z = -1.0;
  EXPECT_THROW(s.normalize(), InvalidInput);
}

TEST(Generate, DeterministicForSeed) {
  const auto cfg = paper_central_config(20);
  const auto a = generate_scenario(cfg, 42);
  const auto b = generate_scenario(cfg, 42);
  ASSERT_EQ(a.edges.size(), b.edges.size());
  for (std::size_t k = 0; k < a.edges.size(); ++k) {
    EXPECT_EQ(a.edges[k].edge, b.edges[k].edge);
    EXPECT_EQ(a.edges[k].z, b.edges[k].z);
  }
  for (const auto& [id, p] : a.true_positions) EXPECT_EQ(p, b.true_positions.at(id));
  const auto c = generate_scenario(cfg, 43);
  EXPECT_NE(a.true_positions.at(1), c.true_positions.at(1));
}

TEST(Generate, EdgesExactlyWithinRange) {
  const auto cfg = paper_central_config(30);
  const auto s = generate_scenario(cfg, 5);
  std::set<EdgeKey> present;
  for (const auto& m : s.edges) present.insert(m.edge);
  std::vector<NodeId> all = s.sensors;
  for (const auto& a : s.anchors) all.push_back(a.id);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (s.is_anchor(all[i]) && s.is_anchor(all[j])) continue;
      const double d = (node_position(s, all[i]) - node_position(s, all[j])).norm();
      const EdgeKey key = make_edge_key(s, all[i], all[j]);
      EXPECT_EQ(present.count(key) == 1, d <= cfg.sensing_range) << all[i] << "-" << all[j];
    }
  }
  for (const auto& [id, p] : s.true_positions) {
    EXPECT_GE(p.x(), -0.5);
    EXPECT_LE(p.x(), 0.5);
    EXPECT_GE(p.y(), -0.5);
    EXPECT_LE(p.y(), 0.5);
  }
}

TEST(Generate, PaperScenariosAreConnected) {
  const auto central = generate_scenario(paper_central_config(50), 1);
  EXPECT_TRUE(bfs_connected(central));
  EXPECT_TRUE(validate_scenario(central).connected);
  EXPECT_TRUE(validate_scenario(central).ok());

  ScenarioConfig dist;
  dist.n_sensors = 100;
  dist.anchor_positions = corner_anchor_layout();
  dist.sensing_range = 0.3;
  const auto s = generate_scenario(dist, 2);
  EXPECT_EQ(s.sensors.size(), 100u);
  EXPECT_TRUE(bfs_connected(s));
  EXPECT_TRUE(validate_scenario(s).ok());
}

TEST(Generate, RejectsBadConfig) {
  ScenarioConfig c = paper_central_config(0);
  EXPECT_THROW(generate_scenario(c, 1), InvalidInput);
  c = paper_central_config(5);
  c.anchor_positions = {{0, 0}, {1, 1}};
  EXPECT_THROW(generate_scenario(c, 1), InvalidInput);
  // A tiny range cannot connect the graph in 100 attempts.
  c = paper_central_config(10);
  c.sensing_range = 1e-3;
  EXPECT_THROW(generate_scenario(c, 1), InvalidInput);
}

TEST(Validate, CollinearAnchors) {
  NetworkScenario s = triangle_scenario();
  s.anchors = {{10, {0, 0}}, {11, {1, 0}}, {12, {2, 0}}};
  const auto r = validate_scenario(s);
  EXPECT_FALSE(r.anchors_noncollinear);
  EXPECT_FALSE(r.ok());
}

TEST(Validate, DisconnectedGraph) {
  NetworkScenario s;
  s.sensors = {1, 2};
  s.anchors = {{10, {0, 0}}, {11, {1, 0}}, {12, {0, 1}}};
  s.edges = {{{1, 10}, 0.5}, {{1, 11}, 0.5}};
  s.normalize();
  const auto r = validate_scenario(s);
  EXPECT_FALSE(r.connected);
  EXPECT_FALSE(bfs_connected(s));
  EXPECT_TRUE(r.anchors_noncollinear);
}

TEST(Errors, GaussianSetsThreeSigma) {
  const auto s = generate_scenario(paper_central_config(10), 3);
  const auto noisy = apply_errors(s, GaussianError{0.02}, 9);
  EXPECT_DOUBLE_EQ(noisy.gamma, 0.06);
  EXPECT_DOUBLE_EQ(apply_errors(s, MixtureError{0.02, 0.5}, 9).gamma, 0.06);
  EXPECT_DOUBLE_EQ(apply_errors(s, UniformError{0.1}, 9).gamma, 0.1);
}

TEST(Errors, UniformWithinSupport) {
  const auto s = generate_scenario(paper_central_config(30), 4);
  const auto noisy = apply_errors(s, UniformError{0.1}, 11);
  for (std::size_t k = 0; k < s.edges.size(); ++k) {
    const double d = (node_position(s, s.edges[k].edge.a) - node_position(s, s.edges[k].edge.b)).norm();
    const double z = noisy.edges[k].z;
    // Clamped at zero, so only the upper side is two-sided.
    EXPECT_LE(z, d + 0.1);
    EXPECT_GE(z, std::max(0.0, d - 0.1));
  }
  EXPECT_TRUE(errors_within_bound(noisy));
  const auto b = build_feasibility_intervals(noisy);
  for (const auto& m : noisy.edges) {
    const double d = (node_position(s, m.edge.a) - node_position(s, m.edge.b)).norm();
    EXPECT_TRUE(b.at(m.edge).contains(d, 1e-12));
  }
}

TEST(Errors, ReproducibleBitForBit) {
  const auto s = generate_scenario(paper_central_config(15), 4);
  for (const ErrorModel& m : {ErrorModel{UniformError{0.05}}, ErrorModel{GaussianError{0.02}},
                              ErrorModel{MixtureError{0.02, 0.3}}}) {
    const auto a = apply_errors(s, m, 77);
    const auto b = apply_errors(s, m, 77);
    for (std::size_t k = 0; k < a.edges.size(); ++k) EXPECT_EQ(a.edges[k].z, b.edges[k].z);
  }
}

TEST(Errors, MixtureCountMatchesOracle) {
  // Oracle: the outlier count k minimizing |k - ratio (N - k)|, i.e. the
  // closest integer split with outliers ~ ratio * inliers; exact ties go to
  // the larger count.
  auto oracle = [](std::size_t n, double ratio) {
    std::size_t best = 0;
    double best_gap = 1e300;
    for (std::size_t k = 0; k <= n; ++k) {
      const double gap = std::abs(static_cast<double>(k) - ratio * static_cast<double>(n - k));
      if (gap <= best_gap + 1e-12) {
        best_gap = gap;
        best = k;
      }
    }
    return best;
  };
  EXPECT_EQ(oracle(100, 0.5), 33u);
  for (std::size_t n : {1u, 7u, 50u, 100u, 333u}) {
    for (double r : {0.0, 0.1, 0.25, 0.5, 1.0, 2.0}) {
      EXPECT_EQ(mixture_outlier_count(n, r), oracle(n, r)) << n << " " << r;
    }
  }

  std::mt19937_64 rng(5);
  const auto sampled = sample_errors(MixtureError{0.02, 0.5}, 100, rng);
  const auto outliers = std::count(sampled.outlier.begin(), sampled.outlier.end(), true);
  EXPECT_EQ(outliers, 33);
  for (std::size_t k = 0; k < 100; ++k) {
    if (sampled.outlier[k]) {
      EXPECT_LE(std::abs(sampled.values[k]), 0.06);
    }
  }
}

TEST(Errors, RejectsInvalidParameters) {
  EXPECT_THROW(check_error_model(UniformError{0.0}), InvalidInput);
  EXPECT_THROW(check_error_model(GaussianError{-1.0}), InvalidInput);
  EXPECT_THROW(check_error_model(MixtureError{0.02, -0.1}), InvalidInput);
  EXPECT_NO_THROW(check_error_model(MixtureError{0.02, 0.0}));
}

TEST(Seeds, DeriveSeedSeparatesStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 8; ++m) {
    for (std::uint64_t s = 0; s < 8; ++s) seen.insert(derive_seed(m, s));
  }
  EXPECT_EQ(seen.size(), 64u);
  EXPECT_EQ(derive_seed(3, 4), derive_seed(3, 4));
}
