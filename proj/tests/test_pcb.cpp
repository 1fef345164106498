#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "perfbandit/pcb.hpp"
#include "test_support.hpp"

namespace pb = perfbandit;
using pb::testing::pt;

namespace {

pb::PhasedOptions oracle_opts(double lipschitz) {
  pb::PhasedOptions o;
  o.family = pb::BoundFamily::kPerformative;
  o.lipschitz = lipschitz;
  o.mode = pb::DprMode::kOracle;
  return o;
}

pb::PhaseSchedule custom_schedule(double gamma, double radius, std::int64_t n = 1) {
  pb::PhaseSchedule s;
  s.gamma = gamma;
  s.radius = radius;
  s.steps_per_deployment = n;
  return s;
}

pb::RunLog oracle_run(const pb::Environment& env, const pb::CandidateGrid& grid, std::int64_t T,
                      std::uint64_t seed) {
  const auto cfg = pb::problem_for(env, T, 1, seed);
  return pb::run_pcb(cfg, env, grid, pb::DprMode::kOracle);
}

}  // namespace

// ---------------------------------------------------------------- phase_params

TEST(PhaseParams, PhaseFiveWithSmallSlack) {
  pb::ProblemConfig cfg;
  cfg.horizon = 1000000;
  const auto s = pb::phase_params(5, cfg, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(s.gamma, 1.0 / 32.0);
  EXPECT_DOUBLE_EQ(s.radius, 1.0);
}

TEST(PhaseParams, StepsAtUnitScale) {
  // T = e, m0 = 1, B = 0, gamma = 1: (3 * 1)^2 = 9.
  EXPECT_EQ(pb::phase_steps(1.0, 1, 0.0, 1.0), 9.0);
  EXPECT_EQ(pb::phase_steps(0.5, 1, 0.0, 1.0), 36.0);
  EXPECT_EQ(pb::phase_steps(1.0, 9, 0.0, 1.0), 1.0);
}

TEST(PhaseParams, ZeroSlackGivesInfiniteRadius) {
  pb::ProblemConfig cfg;
  const auto s = pb::phase_params(3, cfg, 0.0);
  EXPECT_TRUE(std::isinf(s.radius));
  const auto grid = pb::CandidateGrid::interval(50);
  EXPECT_EQ(pb::greedy_net(grid.points(), s.radius).size(), 1u);
}

TEST(PhaseParams, StepsClampedToHorizon) {
  pb::ProblemConfig cfg;
  cfg.horizon = 10;
  EXPECT_EQ(pb::phase_params(12, cfg, 1.0).steps_per_deployment, 10);
  EXPECT_GE(pb::phase_params(0, cfg, 1.0).steps_per_deployment, 1);
  EXPECT_THROW(pb::phase_params(-1, cfg, 1.0), std::invalid_argument);
}

// ---------------------------------------------------------------- run_phase examples

TEST(RunPhase, ConstantMapSingleDeploymentEliminatesFarCandidates) {
  const auto env = pb::testing::quadratic_constant_map();
  const auto grid = pb::CandidateGrid::interval(201);
  pb::ProblemConfig cfg = pb::problem_for(env, 100, 1, 0);
  pb::PhasedEliminationRunner runner(cfg, env, grid, oracle_opts(0.0));
  const double gamma = 1.0 / 64.0;
  const auto rec = runner.run_phase(custom_schedule(gamma, std::numeric_limits<double>::infinity()));
  ASSERT_EQ(rec.deployed.size(), 1u);
  // PR(theta) = ((theta - 1/2)^2 + 1/12) / 4: survivors satisfy (theta - 1/2)^2 / 4 <= 2 gamma.
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double gap = (grid[j][0] - 0.5) * (grid[j][0] - 0.5) / 4.0;
    if (std::abs(gap - 2.0 * gamma) < 1e-9) continue;
    EXPECT_EQ(runner.active().alive[j] != 0, gap <= 2.0 * gamma) << "theta " << grid[j][0];
  }
}

TEST(RunPhase, WorkedExampleSecondModelNeverDeployed) {
  const pb::testing::ThreeModelExample d;
  const auto env = d.env();
  const pb::CandidateGrid grid(std::vector<pb::ParameterVector>{d.points[1], d.points[2]});
  pb::ProblemConfig cfg = pb::problem_for(env, 100, 1, 0);
  pb::PhasedEliminationRunner runner(cfg, env, grid, oracle_opts(d.lz_eps));
  runner.set_selector([](std::span<const std::size_t> rem, pb::Rng&) {
    return std::find(rem.begin(), rem.end(), 0u) != rem.end() ? std::size_t{0} : rem.front();
  });
  const auto rec = runner.run_phase(custom_schedule(3.0 / 256.0, 3.0 / 8.0));
  EXPECT_EQ(rec.net.size(), 2u);
  EXPECT_EQ(rec.deployed, (std::vector<std::size_t>{0}));
  EXPECT_EQ(runner.active().alive, (std::vector<char>{1, 0}));
  EXPECT_EQ(rec.eliminated, 1u);
}

TEST(RunPhase, EmptyActiveSetGuardKeepsOneCandidate) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(101);
  const auto prof = pb::oracle_profile(env, grid);
  const auto worst = static_cast<std::size_t>(
      std::max_element(prof.pr.begin(), prof.pr.end()) - prof.pr.begin());
  pb::PhasedEliminationRunner runner(pb::problem_for(env, 100, 1, 0), env, grid, oracle_opts(1.0));
  pb::ActiveSet only(grid.size());
  std::fill(only.alive.begin(), only.alive.end(), 0);
  only.alive[worst] = 1;
  runner.set_active(only);
  const auto rec = runner.run_phase(custom_schedule(1.0 / 128.0, 1.0 / 128.0));
  EXPECT_EQ(runner.active().count(), 1u);
  EXPECT_EQ(runner.active().alive[worst], 1);
  EXPECT_EQ(rec.deployed, (std::vector<std::size_t>{worst}));
}

TEST(RunPhase, SelectorOutsideNetIsRejected) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(11);
  pb::PhasedEliminationRunner runner(pb::problem_for(env, 100, 1, 0), env, grid, oracle_opts(1.0));
  runner.set_selector([](std::span<const std::size_t>, pb::Rng&) { return std::size_t{999}; });
  EXPECT_THROW(runner.run_phase(custom_schedule(1.0, 1.0)), std::logic_error);
}

TEST(PcbRunner, DimensionMismatchThrows) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::lattice(2, 0.5);
  EXPECT_THROW(pb::run_pcb(pb::problem_for(env, 10, 1, 0), env, grid), pb::DimensionError);
}

// ---------------------------------------------------------------- full runs

TEST(PcbRun, SingleStepHorizon) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(50);
  const auto log = oracle_run(env, grid, 1, 3);
  ASSERT_EQ(log.steps.size(), 1u);
  EXPECT_EQ(log.steps[0].phase, 0);
  EXPECT_EQ(log.algorithm, "pcb");
  ASSERT_TRUE(log.final_iterate.has_value());
  EXPECT_EQ(*log.final_iterate, log.steps[0].theta);
}

TEST(PcbRun, EmpiricalModeSpendsExactHorizon) {
  const auto env = pb::testing::nonconvex_location_family(0.5, 0.3);
  const auto grid = pb::CandidateGrid::interval(41);
  auto cfg = pb::problem_for(env, 777, 2, 5);
  const auto log = pb::run_pcb(cfg, env, grid);
  EXPECT_EQ(log.steps.size(), 777u);
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    EXPECT_EQ(log.steps[i].step, static_cast<std::int64_t>(i) + 1);
  }
}

class PcbOracleInvariants : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(PcbOracleInvariants, PhaseStructure) {
  const auto seed = GetParam();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  const auto env = pb::make_appendix_e_env(-1.0 + u(rng), 0.7, 0.3 + 0.2 * u(rng), 3.0, 0.5, u(rng));
  const auto grid = pb::CandidateGrid::interval(150);
  const auto prof = pb::oracle_profile(env, grid);
  const auto log = oracle_run(env, grid, 20000, seed);
  ASSERT_EQ(log.steps.size(), 20000u);

  std::vector<char> prev(grid.size(), 1);
  for (std::size_t p = 0; p < log.phases.size(); ++p) {
    const auto& ph = log.phases[p];
    const std::set<std::size_t> net(ph.net.begin(), ph.net.end());
    for (auto k : ph.deployed) {
      EXPECT_TRUE(net.count(k) == 1) << "deployed point outside the phase net";
      EXPECT_NE(prev[k], 0) << "deployed point was already eliminated";
    }
    EXPECT_NE(ph.alive_snapshot[prof.argmin], 0) << "minimiser eliminated in phase " << p;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      EXPECT_FALSE(prev[j] == 0 && ph.alive_snapshot[j] != 0) << "candidate revived";
      if (ph.alive_snapshot[j] == 0) {
        EXPECT_GT(prof.delta(j), 0.0);
      }
    }
    prev = ph.alive_snapshot;
  }

  // After a completed phase p-1 every survivor has gap <= 6 gamma_{p-1}.
  for (const auto& st : log.steps) {
    if (st.phase == 0) continue;
    const auto& before = log.phases[static_cast<std::size_t>(st.phase) - 1];
    if (before.truncated) continue;
    ASSERT_TRUE(st.delta.has_value());
    EXPECT_LE(*st.delta, 6.0 * before.gamma + 1e-12) << "step " << st.step;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, PcbOracleInvariants, ::testing::Range<std::uint64_t>(0, 8));

TEST(PcbRun, DeterministicForFixedSeed) {
  const auto env = pb::testing::nonconvex_location_family();
  const auto grid = pb::CandidateGrid::interval(61);
  const auto cfg = pb::problem_for(env, 1500, 1, 42);
  const auto a = pb::run_pcb(cfg, env, grid);
  const auto b = pb::run_pcb(cfg, env, grid);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    EXPECT_EQ(a.steps[i].candidate, b.steps[i].candidate);
    EXPECT_EQ(a.steps[i].cum_regret, b.steps[i].cum_regret);
  }
  auto cfg2 = cfg;
  cfg2.seed = 43;
  const auto c = pb::run_pcb(cfg2, env, grid);
  bool differs = false;
  for (std::size_t i = 0; i < a.steps.size() && !differs; ++i) {
    differs = a.steps[i].candidate != c.steps[i].candidate;
  }
  EXPECT_TRUE(differs);
}

TEST(PcbRun, CumulativeRegretIsPrefixSum) {
  const auto env = pb::testing::linear_shift_env();
  const auto grid = pb::CandidateGrid::interval(100);
  const auto log = oracle_run(env, grid, 3000, 9);
  double acc = 0.0;
  for (const auto& st : log.steps) {
    acc += *st.delta;
    EXPECT_NEAR(st.cum_regret, acc, 1e-9);
  }
  EXPECT_NEAR(log.total_regret(), acc, 1e-9);
}
