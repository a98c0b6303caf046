#include "steinolo/olo.hpp"

#include <cmath>
#include <memory>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"

namespace {

using namespace steinolo::olo;
using steinolo::targets::Kind;
using steinolo::targets::TargetFunction;
namespace specfn = steinolo::specfn;
namespace oracles = steinolo::test_oracles;

TEST(Schedule, SqrtHorizonAndInvariants) {
  const RhoSchedule r = RhoSchedule::sqrt_horizon(5);
  EXPECT_EQ(r.horizon(), 5);
  EXPECT_DOUBLE_EQ(r.rho(0), std::sqrt(5.0));
  EXPECT_DOUBLE_EQ(r.rho(5), 0.0);
  for (int t = 1; t <= 5; ++t) EXPECT_NEAR(r.c(t), 1.0, 1e-12);

  EXPECT_THROW(RhoSchedule({1.0}), std::invalid_argument);          // T = 0
  EXPECT_THROW(RhoSchedule({0.0, 0.0}), std::invalid_argument);     // rho0 = 0
  EXPECT_THROW(RhoSchedule({1.0, 2.0}), std::invalid_argument);     // increase
  EXPECT_THROW(RhoSchedule({2.0, 0.0, 0.0}), std::invalid_argument);  // early 0
  EXPECT_NO_THROW(RhoSchedule({2.0, 1.0, 1.0}));  // rho_T > 0 is allowed
}

TEST(DecideClosedAbs, NoVarianceSpentBranch) {
  EXPECT_DOUBLE_EQ(decide_closed_abs(0.0, std::sqrt(5.0), 0.0), 0.0);
  EXPECT_NEAR(decide_closed_abs(2.0, 2.0, 0.0), -0.6826894921370859, 1e-14);
}

TEST(DecideClosedAbs, FinalRoundBranch) {
  // odd in s, zero at zero
  EXPECT_DOUBLE_EQ(decide_closed_abs(0.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(decide_closed_abs(0.5, 1.0, 1.0), -0.5041975565932126, 1e-13);
  EXPECT_NEAR(decide_closed_abs(-0.5, 1.0, 1.0), 0.5041975565932126, 1e-13);
  // saturates without NaN for huge sums
  EXPECT_NEAR(decide_closed_abs(300.0, 1.0, 1.0), -1.0, 1e-12);
}

TEST(DecideClosedAbs, GeneralBranchAgainstQuadratureRoutes) {
  const TargetFunction h = TargetFunction::absolute();
  const double s = 1.5, rho = std::sqrt(10.0), c = 1.0;
  const double closed = decide_closed_abs(s, rho, c);
  EXPECT_NEAR(closed, oracles::decide_via_tau_quadrature(h, s, rho, c), 1e-9);
  EXPECT_NEAR(closed, oracles::decide_via_exp_mixture(h, s, rho, c), 1e-9);
  EXPECT_NEAR(closed, decide_generic(h, s, rho, c), 1e-9);
}

TEST(DecideClosedHuber, AllBranchesAgainstQuadrature) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> us(-4.0, 4.0);
  std::uniform_real_distribution<double> uk(0.3, 3.0);
  std::uniform_real_distribution<double> ur(0.5, 4.0);
  std::uniform_real_distribution<double> ufrac(0.05, 0.95);
  for (int i = 0; i < 20; ++i) {
    const double k = uk(rng), s = us(rng), rho = ur(rng);
    const double c = i % 3 == 0   ? 0.0
                     : i % 3 == 1 ? rho * rho          // final round
                                  : ufrac(rng) * rho * rho;
    const TargetFunction h = TargetFunction::huber(k);
    const double closed = decide_closed_huber(k, s, rho, c);
    EXPECT_NEAR(closed, oracles::decide_via_tau_quadrature(h, s, rho, c), 1e-8)
        << "k=" << k << " s=" << s << " rho=" << rho << " c=" << c;
    EXPECT_NEAR(closed, decide_generic(h, s, rho, c), 1e-8);
  }
}

TEST(RouteEquivalence, AllKindsAllRegimes) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> us(-3.0, 3.0);
  std::uniform_real_distribution<double> ur(0.6, 3.5);
  std::uniform_real_distribution<double> ufrac(0.0, 1.0);
  const TargetFunction kinds[] = {
      TargetFunction::absolute(), TargetFunction::huber(1.1),
      TargetFunction::log_cosh(0.7), TargetFunction::soft_threshold(1.4)};
  for (const auto& h : kinds) {
    for (int i = 0; i < 50; ++i) {
      const double s = us(rng), rho = ur(rng);
      double c = ufrac(rng) * rho * rho;
      if (i % 5 == 0) c = 0.0;
      if (i % 5 == 1) c = rho * rho;
      const double via_def =
          oracles::decide_via_stein_expectation(h, s, rho,
                                                std::sqrt(rho * rho - c));
      const double via_mix = oracles::decide_via_exp_mixture(h, s, rho, c);
      const double prod = decide_generic(h, s, rho, c);
      EXPECT_NEAR(prod, via_def, 1e-5)
          << steinolo::targets::kind_name(h.kind()) << " s=" << s
          << " rho=" << rho << " c=" << c;
      EXPECT_NEAR(prod, via_mix, 1e-5);
    }
  }
}

TEST(Boundedness, MillionRandomStatesStayInside) {
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> us(-40.0, 40.0);
  std::uniform_real_distribution<double> ur(1e-3, 40.0);
  std::uniform_real_distribution<double> ufrac(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const double s = us(rng), rho = ur(rng);
    double c = ufrac(rng) * rho * rho;
    if (i % 7 == 0) c = 0.0;
    if (i % 7 == 1) c = rho * rho;
    const double x = decide_closed_abs(s, rho, c);
    worst = std::max(worst, std::abs(x));
    ASSERT_LE(std::abs(x), 1.0 + 1e-12) << "s=" << s << " rho=" << rho
                                        << " c=" << c;
  }
  for (int i = 0; i < 100000; ++i) {
    const double s = us(rng), rho = ur(rng);
    const double c = ufrac(rng) * rho * rho;
    const double x = decide_closed_huber(1.3, s, rho, c);
    ASSERT_LE(std::abs(x), 1.0 + 1e-12) << "s=" << s << " rho=" << rho
                                        << " c=" << c;
  }
  const TargetFunction st = TargetFunction::soft_threshold(0.8);
  for (int i = 0; i < 10000; ++i) {
    const double s = us(rng), rho = ur(rng);
    const double c = ufrac(rng) * rho * rho;
    ASSERT_LE(std::abs(decide_generic(st, s, rho, c)), 1.0 + 1e-12);
  }
  EXPECT_GT(worst, 0.5);  // the sample really hits the saturated regime
}

TEST(Antisymmetry, EvenTargetsGiveOddDecisions) {
  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> us(0.01, 5.0);
  std::uniform_real_distribution<double> ur(0.5, 4.0);
  std::uniform_real_distribution<double> ufrac(0.0, 1.0);
  const TargetFunction kinds[] = {
      TargetFunction::absolute(), TargetFunction::huber(1.2),
      TargetFunction::log_cosh(0.9), TargetFunction::soft_threshold(1.6)};
  for (const auto& h : kinds) {
    for (int i = 0; i < 25; ++i) {
      const double s = us(rng), rho = ur(rng), c = ufrac(rng) * rho * rho;
      double plus, minus;
      if (h.kind() == Kind::abs) {
        plus = decide_closed_abs(s, rho, c);
        minus = decide_closed_abs(-s, rho, c);
      } else if (h.kind() == Kind::huber) {
        plus = decide_closed_huber(h.scale(), s, rho, c);
        minus = decide_closed_huber(h.scale(), -s, rho, c);
      } else {
        plus = decide_generic(h, s, rho, c);
        minus = decide_generic(h, -s, rho, c);
      }
      EXPECT_NEAR(plus, -minus, 1e-10)
          << steinolo::targets::kind_name(h.kind()) << " s=" << s;
    }
  }
}

TEST(Continuity, VanishingVarianceGuessMatchesZeroPath) {
  std::mt19937_64 rng(79);
  std::uniform_real_distribution<double> us(-3.0, 3.0);
  for (int i = 0; i < 40; ++i) {
    const double s = us(rng);
    EXPECT_NEAR(decide_closed_abs(s, 2.0, 1e-12),
                decide_closed_abs(s, 2.0, 0.0), 1e-5);
    EXPECT_NEAR(decide_closed_huber(1.5, s, 2.0, 1e-12),
                decide_closed_huber(1.5, s, 2.0, 0.0), 1e-5);
    EXPECT_NEAR(decide_generic(TargetFunction::soft_threshold(1.1), s, 2.0,
                               1e-12),
                decide_generic(TargetFunction::soft_threshold(1.1), s, 2.0,
                               0.0),
                1e-5);
  }
}

TEST(LearnerState, ObserveAccumulatesAndEnds) {
  auto sched = std::make_shared<const RhoSchedule>(RhoSchedule::sqrt_horizon(3));
  LearnerState st(sched, TargetFunction::absolute());
  EXPECT_EQ(st.round(), 1);
  EXPECT_DOUBLE_EQ(decide(st), 0.0);
  st = observe(st, 1.0);
  EXPECT_DOUBLE_EQ(st.gradient_sum(), 1.0);
  st = observe(st, 10.0);  // unbounded gradients are accepted
  EXPECT_DOUBLE_EQ(st.gradient_sum(), 11.0);
  st = observe(st, -11.0);
  EXPECT_DOUBLE_EQ(st.gradient_sum(), 0.0);  // exact for representable sums
  EXPECT_TRUE(st.finished());
  EXPECT_THROW(observe(st, 1.0), std::logic_error);
  EXPECT_THROW(decide(st), std::logic_error);
}

TEST(Decide, ClampsAndDispatches) {
  auto sched = std::make_shared<const RhoSchedule>(RhoSchedule::sqrt_horizon(9));
  LearnerState st(sched, TargetFunction::huber(0.8));
  st = observe(st, 0.7);
  const DecideOptions generic{.force_generic = true};
  EXPECT_NEAR(decide(st), decide(st, generic), 1e-8);
  EXPECT_LE(std::abs(decide(st)), 1.0);
}

TEST(Decide, RejectsSpentSchedule) {
  EXPECT_THROW(decide_closed_abs(0.0, 0.0, 0.0), std::logic_error);
  EXPECT_THROW(decide_closed_huber(1.0, 0.0, 0.0, 0.0), std::logic_error);
  EXPECT_THROW(decide_generic(TargetFunction::absolute(), 0.0, 0.0, 0.0),
               std::logic_error);
}

TEST(EffectiveLearningRate, LimitsAndValue) {
  EXPECT_NEAR(effective_learning_rate(1.0, 1e8), 0.0, 1e-8);
  EXPECT_NEAR(effective_learning_rate(2.5, 1e-9), 2.5, 1e-12);
  EXPECT_NEAR(effective_learning_rate(1.0, 1.0), 0.6826894921370859, 1e-14);
  // increasing in 1/rho
  EXPECT_GT(effective_learning_rate(1.0, 0.5), effective_learning_rate(1.0, 1.0));
  EXPECT_THROW(effective_learning_rate(0.0, 1.0), std::domain_error);
}

}  // namespace
