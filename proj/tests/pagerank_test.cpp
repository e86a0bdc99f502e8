#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rrw/oracle.hpp"
#include "rrw/pagerank.hpp"

namespace {

using rrw::Coupling;
using rrw::EnsembleConfig;
using rrw::Graph;
using rrw::NodeId;
using rrw::Termination;

EnsembleConfig pr_config(std::size_t m, Coupling c, Termination t = Termination::independent) {
  EnsembleConfig cfg;
  cfg.walkers = m;
  cfg.p_term = 0.3;
  cfg.coupling = c;
  cfg.termination = t;
  cfg.seed = 2024;
  return cfg;
}

TEST(PageRank, MassAccounting) {
  const Graph g = rrw::gen_grid_2d(3, 4);
  auto cfg = pr_config(3, Coupling::repelling);
  for (auto mode : {rrw::LaunchMode::per_start_node, rrw::LaunchMode::global}) {
    const auto est = rrw::estimate_pagerank(g, cfg, 0, mode);
    EXPECT_EQ(est.walks, 36u);
    EXPECT_EQ(est.truncated, 0u);
    EXPECT_NEAR(est.values.sum(), 1.0, 1e-12);
    // Every entry is a multiple of 1 / (N m).
    for (Eigen::Index j = 0; j < est.values.size(); ++j) {
      const double count = est.values(j) * 36.0;
      EXPECT_NEAR(count, std::round(count), 1e-9);
    }
  }
}

TEST(PageRank, TruncationCountedAtLastNode) {
  const Graph g = rrw::cycle_graph(4);
  auto cfg = pr_config(50, Coupling::iid);
  cfg.max_steps = 1;
  const auto est = rrw::estimate_pagerank(g, cfg, 0);
  EXPECT_GT(est.truncated, 0u);
  EXPECT_NEAR(est.values.sum(), 1.0, 1e-12);
}

TEST(PageRank, ExpectedEstimateMatchesExact) {
  // The Markov-state oracle averages over every start node; the gap is the truncation tail.
  const double p = 0.3;
  const std::size_t horizon = 30;
  const double bound = std::pow(1 - p, double(horizon));
  const std::vector<rrw::EnsembleScheme> schemes{{Coupling::iid, Termination::independent},
                                                 {Coupling::iid, Termination::antithetic_pairs},
                                                 {Coupling::repelling, Termination::independent},
                                                 {Coupling::repelling, Termination::antithetic_pairs},
                                                 {Coupling::transient_repelling, Termination::independent}};
  for (const auto& [name, g] : rrw::testing::corpus()) {
    const auto exact = rrw::testing::pagerank_linear_solve(g, p);
    for (const auto& scheme : schemes) {
      const auto expected = rrw::expected_pagerank_estimate(g, scheme, 2, p, horizon);
      EXPECT_NEAR(expected.sum(), 1.0, 1e-12) << name;
      EXPECT_LE((expected - exact).cwiseAbs().maxCoeff(), bound) << name;
    }
  }
}

TEST(PageRank, MonteCarloMeanIsUnbiased) {
  const Graph g = rrw::star_graph(3);
  const auto exact = rrw::exact_pagerank(g, 0.3);
  auto cfg = pr_config(4, Coupling::repelling, Termination::antithetic_pairs);
  const int trials = 4000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4), sumsq = Eigen::VectorXd::Zero(4);
  for (int t = 0; t < trials; ++t) {
    const auto v = rrw::estimate_pagerank(g, cfg, t).values;
    sum += v;
    sumsq += v.cwiseProduct(v);
  }
  const Eigen::VectorXd mean = sum / trials;
  for (int j = 0; j < 4; ++j) {
    const double se = std::sqrt((sumsq(j) / trials - mean(j) * mean(j)) / (trials - 1));
    EXPECT_NEAR(mean(j), exact(j), 4 * se) << j;
  }
}

TEST(PageRank, ErrorMetrics) {
  Eigen::VectorXd a(2), b(2);
  a << 0.5, 0.5;
  b << 0.8, 0.1;
  EXPECT_DOUBLE_EQ(rrw::pagerank_error(a, b), 0.5);
  EXPECT_DOUBLE_EQ(rrw::pagerank_squared_error(a, b), 0.25);
  EXPECT_THROW(rrw::pagerank_error(a, Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(PageRank, RejectsZeroTermination) {
  auto cfg = pr_config(2, Coupling::iid);
  cfg.p_term = 0.0;
  cfg.max_steps = 4;
  EXPECT_THROW(rrw::estimate_pagerank(rrw::path_graph(3), cfg, 0), std::invalid_argument);
}

TEST(StepByStep, Evaluation) {
  rrw::StepFunctionSpec spec;
  spec.horizon = 5;
  spec.f = [](NodeId v, std::size_t i, bool) { return double(v) + double(i); };
  spec.g = [](NodeId, NodeId, std::size_t) { return 0.5; };
  // f values 1, 3, 3 weighted by 1, 0.5, 0.25.
  EXPECT_DOUBLE_EQ(rrw::evaluate_step_by_step(spec, {{1, 2, 1}, false}), 1 + 1.5 + 0.75);
  const auto comp = rrw::pagerank_component_spec(2, 5);
  EXPECT_EQ(rrw::evaluate_step_by_step(comp, {{0, 2, 1, 2}, false}), 1.0);
  EXPECT_EQ(rrw::evaluate_step_by_step(comp, {{0, 2, 1}, false}), 0.0);
  spec.horizon = 1;
  EXPECT_THROW(rrw::evaluate_step_by_step(spec, {{1, 2, 1}, false}), std::invalid_argument);
}

TEST(StepByStep, TransientRepulsionReducesVarianceExactly) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (const auto& g : {rrw::complete_graph(4), rrw::cycle_graph(4), rrw::star_graph(3)}) {
    for (int rep = 0; rep < 5; ++rep) {
      std::vector<double> fv(4 * 4), gv(4 * 4 * 4);
      for (auto& x : fv) x = unif(gen);
      for (auto& x : gv) x = 1.0 + 0.3 * unif(gen);
      rrw::StepFunctionSpec spec;
      spec.horizon = 3;
      spec.f = [fv](NodeId v, std::size_t i, bool) { return fv[v * 4 + i]; };
      spec.g = [gv](NodeId u, NodeId v, std::size_t i) { return gv[(u * 4 + v) * 4 + i]; };
      const auto r = rrw::exact_transient_gap(g, 0, spec, 2, 0.3);
      EXPECT_LE(r.var_tr, r.var_iid + 1e-12);
      EXPECT_NEAR(r.var_iid - r.var_tr, r.predicted_gap, 1e-10);
    }
  }
}

TEST(TransientHarness, AgreesWithExactGap) {
  const Graph g = rrw::complete_graph(4);
  rrw::StepFunctionSpec spec;
  spec.horizon = 3;
  spec.f = [](NodeId v, std::size_t i, bool) { return v == 1 ? 1.0 + double(i) : 0.2 * v; };
  spec.g = [](NodeId, NodeId v, std::size_t) { return v == 2 ? 1.2 : 0.9; };
  const auto exact = rrw::exact_transient_gap(g, 0, spec, 2, 0.3);
  const auto mc = rrw::theorem3_harness(g, 0, spec, 2, 0.3, 40000, 5, 20000);
  EXPECT_TRUE(mc.holds());
  ASSERT_TRUE(mc.gap_predicted());
  EXPECT_NEAR(mc.predicted_gap, exact.predicted_gap, 4 * mc.predicted_gap_stderr + 1e-3);
  EXPECT_NEAR(-mc.variance.diff, exact.var_iid - exact.var_tr, 4 * mc.variance.stderr_);
  ASSERT_EQ(mc.conditional_means.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k)
    EXPECT_NEAR(mc.conditional_means[k], exact.conditional_means[k], 0.05);
}

TEST(TransientHarness, NoPredictionWhenWalkersExceedDegree) {
  const Graph g = rrw::path_graph(4);
  const auto spec = rrw::pagerank_component_spec(3, 10);
  const auto r = rrw::theorem3_harness(g, 1, spec, 3, 0.3, 2000, 1, 100);
  EXPECT_FALSE(r.gap_predicted());
}

}  // namespace
