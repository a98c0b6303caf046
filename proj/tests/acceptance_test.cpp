// Acceptance suite: end-to-end checks of the library's guarantees at desk
// scale. Each test prints one PASS/FAIL line for its criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "gtest/gtest.h"
#include "oracles.hpp"
#include "steinolo/harness.hpp"

namespace {

using namespace steinolo;
using harness::Adversary;
using harness::BoundLedger;
using harness::GameTranscript;
using harness::SteinLearner;
using olo::RhoSchedule;
using targets::Kind;
using targets::TargetFunction;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("[criterion %02d] %s :: %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

Adversary adversary_for(int which, uint64_t seed) {
  switch (which) {
    case 0: return Adversary::sign_worst();
    case 1: return Adversary::rademacher(seed);
    case 2: return Adversary::uniform_box(1.0, seed);
    default: return Adversary::drift(0.3);
  }
}

TEST(Acceptance, Criterion01_PathwiseMasterBound) {
  Stopwatch watch;
  const int T = 1000;
  const Kind kinds[] = {Kind::abs, Kind::huber, Kind::logcosh, Kind::softthr};
  const RhoSchedule sched = RhoSchedule::sqrt_horizon(T);
  int violations = 0;
  double min_slack = 1e300;
  for (int game = 0; game < 1000; ++game) {
    const Kind kind = kinds[game % 4];
    Adversary adv = adversary_for((game / 4) % 4, harness::mix_seed(7, game));
    SteinLearner learner(kind, 1.0);
    const GameTranscript tr = harness::play(learner, adv, T);
    const BoundLedger ledger =
        harness::pathwise_bound(tr, sched, learner.state().target());
    const double slack = ledger.total() - tr.loss_total;
    min_slack = std::min(min_slack, slack);
    if (!(tr.loss_total <= ledger.total() + 1e-6)) ++violations;
  }
  const double elapsed = watch.seconds();
  const bool pass = violations == 0 && elapsed < 120.0;
  report(1, pass,
         "pathwise total-loss bound, 1000 games, T=1000, 4 targets x 4 "
         "adversaries: " +
             std::to_string(violations) + " violations, min slack " +
             std::to_string(min_slack) + ", " + std::to_string(elapsed) +
             " s (target < 120 s)");
  EXPECT_EQ(violations, 0);
  EXPECT_GE(min_slack, -1e-6);
  EXPECT_LT(elapsed, 120.0);
}

TEST(Acceptance, Criterion02_UnboundedAdversaryRobustness) {
  const int T = 1000;
  const Kind kinds[] = {Kind::abs, Kind::huber, Kind::logcosh, Kind::softthr};
  const RhoSchedule sched = RhoSchedule::sqrt_horizon(T);
  int violations = 0, oversized = 0;
  for (int game = 0; game < 100; ++game) {
    Adversary adv =
        Adversary::gaussian_noisy(0.1, 0.7, harness::mix_seed(11, game));
    SteinLearner learner(kinds[game % 4], 1.0);
    const GameTranscript tr = harness::play(learner, adv, T);
    for (double g : tr.g)
      if (std::abs(g) > 1.0) ++oversized;
    const BoundLedger ledger =
        harness::pathwise_bound(tr, sched, learner.state().target());
    if (!(tr.loss_total <= ledger.total() + 1e-6)) ++violations;
  }
  const bool pass = violations == 0 && oversized > 0;
  report(2, pass,
         "unbounded (gaussian) adversary, 100 games: " +
             std::to_string(violations) + " violations, " +
             std::to_string(oversized) + " rounds with |g| > 1");
  EXPECT_EQ(violations, 0);
  EXPECT_GT(oversized, 0);
}

TEST(Acceptance, Criterion03_UniformRegretPrefactor) {
  bool pass = true;
  std::string detail = "sign_worst uniform regret:";
  double ratio_at_1e5 = 0.0;
  for (int T : {1000, 10000, 100000}) {
    Adversary adv = Adversary::sign_worst();
    SteinLearner learner(Kind::abs, 1.0);
    const GameTranscript tr = harness::play(learner, adv, T);
    const double ru = tr.reg_unif();
    const double cap = std::sqrt(2.0 * T / specfn::kPi) + 10.0 * std::log(T);
    pass = pass && ru <= cap;
    EXPECT_LE(ru, cap) << "T=" << T;
    if (T == 100000) ratio_at_1e5 = ru / std::sqrt(static_cast<double>(T));
    detail += " T=" + std::to_string(T) + " ratio=" +
              std::to_string(ru / std::sqrt(static_cast<double>(T)));
  }
  pass = pass && ratio_at_1e5 >= 0.5 && ratio_at_1e5 <= 0.81;
  EXPECT_GE(ratio_at_1e5, 0.5);
  EXPECT_LE(ratio_at_1e5, 0.81);
  report(3, pass, detail + " (leading constant 0.7979)");
}

TEST(Acceptance, Criterion04_ClosedFormQuadratureAgreement) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> us(-5.0, 5.0);
  std::uniform_real_distribution<double> ur(0.5, 4.0);
  std::uniform_real_distribution<double> uk(0.3, 3.0);
  std::uniform_real_distribution<double> ufrac(0.0, 1.0);
  double worst = 0.0;
  for (int kind = 0; kind < 2; ++kind) {
    for (int i = 0; i < 500; ++i) {
      const double s = us(rng), rho = ur(rng);
      double c = ufrac(rng) * rho * rho;
      if (i % 5 == 0) c = 0.0;
      if (i % 5 == 1) c = rho * rho;  // final round
      double closed, generic;
      if (kind == 0) {
        closed = olo::decide_closed_abs(s, rho, c);
        generic = olo::decide_generic(TargetFunction::absolute(), s, rho, c);
      } else {
        const double k = uk(rng);
        closed = olo::decide_closed_huber(k, s, rho, c);
        generic = olo::decide_generic(TargetFunction::huber(k), s, rho, c);
      }
      worst = std::max(worst, std::abs(closed - generic));
    }
  }
  double worst_owen = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double x = -6.0 + 12.0 * i / 99.0;
    worst_owen = std::max(
        worst_owen, std::abs(specfn::owens_t(x, inf) -
                             0.5 * (1.0 - specfn::normal_cdf(std::abs(x)))));
    if (std::abs(x) >= 1.0) {
      // finite-y route approaches the identity at the analytic tail rate
      const double tail = std::exp(-0.5 * x * x) * std::atan(1.0 / 40.0) /
                          (2.0 * specfn::kPi);
      EXPECT_NEAR(specfn::owens_t(x, 40.0), specfn::owens_t(x, inf),
                  2.0 * tail + 1e-15);
    }
  }
  const bool pass = worst <= 1e-6 && worst_owen <= 1e-10;
  report(4, pass,
         "closed vs generic decisions (500 states x {abs, huber}): max gap " +
             std::to_string(worst) + "; Owen tail identity max err " +
             std::to_string(worst_owen));
  EXPECT_LE(worst, 1e-6);
  EXPECT_LE(worst_owen, 1e-10);
}

TEST(Acceptance, Criterion05_SteinAnalysisSuite) {
  struct Config {
    double mu, sigma;
    TargetFunction h;
  };
  const Config configs[] = {
      {0.0, 1.0, TargetFunction::absolute()},
      {3.0, 0.5, TargetFunction::huber(2.0)},
      {0.3, 1.3, TargetFunction::log_cosh(0.9)},
      {-0.5, 0.8, TargetFunction::soft_threshold(1.5)},
  };
  std::mt19937_64 rng(17);
  bool pass = true;
  double worst_residual = 0.0, worst_repr = 0.0;
  for (const auto& cfg : configs) {
    const stein::SteinSolution sol = stein::solve(cfg.mu, cfg.sigma, cfg.h);
    const auto kinks = cfg.h.nonsmooth_points();
    // equation residual away from kinks
    std::uniform_real_distribution<double> ux(cfg.mu - 5.0 * cfg.sigma,
                                              cfg.mu + 5.0 * cfg.sigma);
    int checked = 0;
    for (int i = 0; checked < 50 && i < 400; ++i) {
      const double x = ux(rng);
      bool near = false;
      for (double p : kinks) near = near || std::abs(x - p) < 1e-3;
      if (near) continue;
      ++checked;
      worst_residual =
          std::max(worst_residual, std::abs(stein::equation_residual(sol, x)));
    }
    // factor bounds and monotonicity
    std::vector<double> grid;
    for (int i = 0; i < 200; ++i)
      grid.push_back(cfg.mu + cfg.sigma * (-6.0 + 12.0 * i / 199.0));
    const stein::FactorReport rep = stein::check_stein_factors(sol, grid);
    pass = pass && rep.all_ok();
    EXPECT_TRUE(rep.all_ok()) << "mu=" << cfg.mu << " sigma=" << cfg.sigma
                              << " f=" << rep.max_abs_f
                              << " fp=" << rep.max_abs_fp
                              << " fpp=" << rep.max_abs_fpp
                              << " mono=" << rep.max_fp;
    // representation cross-agreement
    for (int i = 0; i < 10; ++i) {
      const double x = cfg.mu + cfg.sigma * (-5.0 + 10.0 * i / 9.0);
      const double via_dispatch = sol(x);
      const double via_ou = sol.eval_ou(x);
      const double via_density = test_oracles::density_ratio_eval(sol, x);
      worst_repr = std::max(worst_repr, std::abs(via_dispatch - via_ou));
      worst_repr = std::max(worst_repr, std::abs(via_dispatch - via_density));
    }
  }
  pass = pass && worst_residual <= 1e-5 && worst_repr <= 1e-6;
  report(5, pass,
         "Stein solutions: max equation residual " +
             std::to_string(worst_residual) +
             ", max representation gap " + std::to_string(worst_repr) +
             ", factor bounds hold on all grids");
  EXPECT_LE(worst_residual, 1e-5);
  EXPECT_LE(worst_repr, 1e-6);
}

TEST(Acceptance, Criterion06_DominanceGrids) {
  bool pass = true;
  double min_gap_ogd = 1e300, min_gap_mwu = 1e300;
  for (int i = 0; i < 50; ++i) {
    const double alpha =
        std::exp(std::log(0.05) + (std::log(50.0) - std::log(0.05)) * i / 49.0);
    const harness::Prefactors p = harness::prefactors(0.0, alpha);
    min_gap_ogd = std::min(min_gap_ogd, p.gap_ogd);
    min_gap_mwu = std::min(min_gap_mwu, p.gap_mwu);
    pass = pass && p.gap_ogd > 0.0 && p.gap_mwu > 0.0;
    EXPECT_GT(p.gap_ogd, 0.0) << "alpha=" << alpha;
    EXPECT_GT(p.gap_mwu, 0.0) << "alpha=" << alpha;
  }
  double worst_huber = 0.0, worst_lse = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double u = -1.0 + 0.1 * i;
    const harness::Prefactors p = harness::prefactors(u, 1000.0);
    worst_huber =
        std::max(worst_huber, std::abs(p.gamma_huber - specfn::kSqrt2OverPi));
    worst_lse =
        std::max(worst_lse, std::abs(p.gamma_lse - specfn::kSqrt2OverPi));
  }
  pass = pass && worst_huber < 1e-3 && worst_lse < 5e-3;
  report(6, pass,
         "prefactor gaps positive on 50-point log grid (min gap_ogd " +
             std::to_string(min_gap_ogd) + ", min gap_mwu " +
             std::to_string(min_gap_mwu) + "); large-alpha limits: huber " +
             std::to_string(worst_huber) + ", lse " + std::to_string(worst_lse));
  EXPECT_LT(worst_huber, 1e-3);
  EXPECT_LT(worst_lse, 5e-3);
}

TEST(Acceptance, Criterion07_CoverExhaustiveCheck) {
  Stopwatch watch;
  const int T = 12;
  const baselines::CoverSpec spec = baselines::CoverSpec::centered_absolute(T);
  const double achievability = baselines::cover_achievability(spec);
  double worst_slack = -1e300;
  for (int mask = 0; mask < (1 << T); ++mask) {
    double s = 0.0, loss = 0.0;
    for (int t = 1; t <= T; ++t) {
      const double x = baselines::cover_decide(spec, t, s);
      const double g = (mask >> (t - 1)) & 1 ? 1.0 : -1.0;
      loss += g * x;
      s += g;
    }
    worst_slack = std::max(worst_slack, loss + spec.psi(-s));
  }
  const double elapsed = watch.seconds();
  const bool pass = worst_slack <= 1e-9 && std::abs(achievability) <= 1e-12 &&
                    elapsed < 10.0;
  report(7, pass,
         "DP learner, all 4096 sign paths at T=12: worst slack " +
             std::to_string(worst_slack) + ", achievability " +
             std::to_string(achievability) + ", " + std::to_string(elapsed) +
             " s (target < 10 s)");
  EXPECT_LE(worst_slack, 1e-9);
  EXPECT_LE(std::abs(achievability), 1e-12);
  EXPECT_LT(elapsed, 10.0);
}

TEST(Acceptance, Criterion08_TradeoffCurve) {
  bool pass = true;
  double worst_residual = 0.0;
  const double eps_max = specfn::kSqrt2OverPi;
  for (int i = 1; i <= 100; ++i) {
    const double eps = eps_max * i / 100.0;
    const harness::TradeoffPoint pt = harness::solve_gamma_eps(eps);
    worst_residual = std::max(worst_residual, std::abs(pt.residual()));
    const double baseline_prefactor =
        eps + specfn::kSqrt2 *
                  specfn::erfi_inverse(specfn::kSqrt2 / (specfn::kSqrtPi * eps));
    pass = pass && pt.gamma < baseline_prefactor;
    EXPECT_LT(pt.gamma, baseline_prefactor) << "eps=" << eps;
  }
  const double endpoint_gap =
      std::abs(harness::solve_gamma_eps(eps_max).gamma - eps_max);
  pass = pass && worst_residual <= 1e-10 && endpoint_gap <= 1e-8;

  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> ur(-5.0, 5.0);
  int disagreements = 0;
  for (int i = 0; i < 1000; ++i) {
    GameTranscript tr;
    tr.T = 1;
    tr.loss_total = ur(rng);
    tr.s_final = ur(rng);
    if (!harness::two_point_check(tr, ur(rng), ur(rng))) ++disagreements;
  }
  pass = pass && disagreements == 0;
  report(8, pass,
         "tradeoff solver: max residual " + std::to_string(worst_residual) +
             ", endpoint gap " + std::to_string(endpoint_gap) +
             ", dominates baseline on 100-point grid, two-point equivalence " +
             std::to_string(disagreements) + " disagreements");
  EXPECT_LE(worst_residual, 1e-10);
  EXPECT_LE(endpoint_gap, 1e-8);
  EXPECT_EQ(disagreements, 0);
}

TEST(Acceptance, Criterion09_StochasticExpectationBound) {
  Stopwatch watch;
  bool pass = true;
  std::string detail = "noisy feedback, uniform_box(1), T=100, 1e5 trials:";
  for (Kind kind : {Kind::abs, Kind::huber}) {
    SteinLearner learner(kind, 1.0);
    const Adversary box = Adversary::uniform_box(1.0, 0);
    const harness::StochasticReport rep =
        harness::run_stochastic(learner, box, 100, 100000, 23);
    pass = pass && rep.holds();
    EXPECT_TRUE(rep.holds())
        << targets::kind_name(kind) << " mean=" << rep.mean_loss
        << " rhs=" << rep.bound_rhs << " se=" << rep.std_error;
    detail += std::string(" ") + targets::kind_name(kind) + " mean=" +
              std::to_string(rep.mean_loss) + " rhs=" +
              std::to_string(rep.bound_rhs);
  }
  const double elapsed = watch.seconds();
  pass = pass && elapsed < 180.0;
  report(9, pass,
         detail + ", " + std::to_string(elapsed) + " s (target < 180 s)");
  EXPECT_LT(elapsed, 180.0);
}

TEST(Acceptance, Criterion10_BaselinePathwiseBounds) {
  const int T = 1000;
  const double sqrt_t = std::sqrt(static_cast<double>(T));
  int violations = 0;
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (int game = 0; game < 100; ++game) {
      Adversary adv =
          Adversary::uniform_box(1.0, harness::mix_seed(29, game));
      harness::OgdLearner ogd(alpha);
      const GameTranscript tr_ogd = harness::play(ogd, adv, T);
      harness::MwuLearner mwu(alpha);
      Adversary adv2 = adv;  // same gradients for both baselines
      const GameTranscript tr_mwu = harness::play(mwu, adv2, T);
      for (int i = 0; i <= 40; ++i) {
        const double u = -1.0 + 0.05 * i;
        const harness::Prefactors p = harness::prefactors(u, alpha);
        if (tr_ogd.regret_at(u) > p.gamma_ogd * sqrt_t + 1e-9) ++violations;
        if (tr_mwu.regret_at(u) > p.gamma_mwu * sqrt_t + 1e-9) ++violations;
      }
    }
  }
  const bool pass = violations == 0;
  report(10, pass,
         "baseline regret bounds (OGD, MWU; 100 games x 3 alphas x 41 "
         "comparators): " +
             std::to_string(violations) + " violations");
  EXPECT_EQ(violations, 0);
}

}  // namespace
