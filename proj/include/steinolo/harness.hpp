#pragma once

// Game harness: adversaries, the play loop, pathwise bound ledgers,
// prefactor curves, the loss/uniform-regret tradeoff solver, and the
// stochastic (noisy-feedback) Monte-Carlo runner.

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "steinolo/baselines.hpp"
#include "steinolo/olo.hpp"
#include "steinolo/specfn.hpp"
#include "steinolo/stein.hpp"
#include "steinolo/targets.hpp"

namespace steinolo::harness {

// ---------------------------------------------------------------------------
// Randomness: a small deterministic generator so that replays are exact
// across platforms (std distributions are implementation-defined).

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

  double uniform01() {  // in [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double rademacher() { return uniform01() < 0.5 ? -1.0 : 1.0; }
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * specfn::kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t next() {  // splitmix64
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Adversaries

class Adversary {
 public:
  enum class Kind {
    sign_worst,
    rademacher_iid,
    bernoulli_biased,
    drift,
    uniform_box,
    gaussian_noisy,
    scripted
  };

  static Adversary sign_worst() { return Adversary(Kind::sign_worst); }
  static Adversary rademacher(uint64_t seed) {
    Adversary a(Kind::rademacher_iid);
    a.seed_ = seed;
    return a;
  }
  static Adversary bernoulli(double p, uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("bernoulli: p must lie in [0, 1]");
    Adversary a(Kind::bernoulli_biased);
    a.p1_ = p;
    a.seed_ = seed;
    return a;
  }
  static Adversary drift(double g) {
    Adversary a(Kind::drift);
    a.p1_ = g;
    return a;
  }
  static Adversary uniform_box(double half_width, uint64_t seed) {
    if (!(half_width > 0.0))
      throw std::invalid_argument("uniform_box: half width must be > 0");
    Adversary a(Kind::uniform_box);
    a.p1_ = half_width;
    a.seed_ = seed;
    return a;
  }
  static Adversary gaussian_noisy(double drift, double noise, uint64_t seed) {
    if (!(noise >= 0.0))
      throw std::invalid_argument("gaussian_noisy: noise must be >= 0");
    Adversary a(Kind::gaussian_noisy);
    a.p1_ = drift;
    a.p2_ = noise;
    a.seed_ = seed;
    return a;
  }
  static Adversary scripted(std::vector<double> gs) {
    Adversary a(Kind::scripted);
    a.script_ = std::move(gs);
    return a;
  }

  Kind kind() const { return kind_; }
  uint64_t seed() const { return seed_; }

  Adversary with_seed(uint64_t seed) const {
    Adversary a = *this;
    a.seed_ = seed;
    return a;
  }

  /// |g_t| <= 1 guaranteed by construction?
  bool bounded() const {
    switch (kind_) {
      case Kind::sign_worst:
      case Kind::rademacher_iid:
      case Kind::bernoulli_biased:
        return true;
      case Kind::drift:
      case Kind::uniform_box:
        return std::abs(p1_) <= 1.0;
      case Kind::gaussian_noisy:
        return false;
      case Kind::scripted: {
        for (double g : script_)
          if (std::abs(g) > 1.0) return false;
        return true;
      }
    }
    return false;
  }

  void begin(int T) {  // deterministic replay under a fixed seed
    rng_.emplace(seed_);
    idx_ = 0;
    if (kind_ == Kind::scripted && static_cast<int>(script_.size()) < T)
      throw std::invalid_argument("scripted adversary: script shorter than T");
  }

  double next(int /*t*/, double x_t) {
    switch (kind_) {
      case Kind::sign_worst:
        return x_t >= 0.0 ? 1.0 : -1.0;  // ties go to +1
      case Kind::rademacher_iid:
        return rng_->rademacher();
      case Kind::bernoulli_biased:
        return rng_->uniform01() < p1_ ? 1.0 : -1.0;
      case Kind::drift:
        return p1_;
      case Kind::uniform_box:
        return rng_->uniform(-p1_, p1_);
      case Kind::gaussian_noisy:
        return p1_ + p2_ * rng_->normal();
      case Kind::scripted:
        return script_.at(idx_++);
    }
    return 0.0;
  }

  /// Closed-form absolute moments of the per-round law, where it is iid and
  /// known. The stochastic bound uses these instead of plug-in estimates.
  bool has_analytic_moments() const {
    switch (kind_) {
      case Kind::rademacher_iid:
      case Kind::bernoulli_biased:
      case Kind::drift:
      case Kind::uniform_box:
      case Kind::gaussian_noisy:
        return true;
      default:
        return false;
    }
  }
  double mean_abs() const {
    switch (kind_) {
      case Kind::rademacher_iid:
      case Kind::bernoulli_biased:
        return 1.0;
      case Kind::drift:
        return std::abs(p1_);
      case Kind::uniform_box:
        return 0.5 * p1_;
      case Kind::gaussian_noisy: {
        if (p2_ == 0.0) return std::abs(p1_);
        const double d = p1_ / p2_;
        return p2_ * specfn::kSqrt2OverPi * std::exp(-0.5 * d * d) +
               p1_ * (1.0 - 2.0 * specfn::normal_cdf(-d));
      }
      default:
        throw std::logic_error("mean_abs: no analytic moments");
    }
  }
  double mean_sq() const {
    switch (kind_) {
      case Kind::rademacher_iid:
      case Kind::bernoulli_biased:
        return 1.0;
      case Kind::drift:
        return p1_ * p1_;
      case Kind::uniform_box:
        return p1_ * p1_ / 3.0;
      case Kind::gaussian_noisy:
        return p1_ * p1_ + p2_ * p2_;
      default:
        throw std::logic_error("mean_sq: no analytic moments");
    }
  }
  double mean_abs_cubed() const {
    switch (kind_) {
      case Kind::rademacher_iid:
      case Kind::bernoulli_biased:
        return 1.0;
      case Kind::drift:
        return std::abs(p1_ * p1_ * p1_);
      case Kind::uniform_box:
        return 0.25 * p1_ * p1_ * p1_;
      case Kind::gaussian_noisy: {
        if (p2_ == 0.0) return std::abs(p1_ * p1_ * p1_);
        const double d = p1_ / p2_;
        const double erf_part = 1.0 - 2.0 * specfn::normal_cdf(-d);
        return p2_ * p2_ * p2_ *
               ((d * d * d + 3.0 * d) * erf_part +
                (d * d + 2.0) * 2.0 * specfn::normal_pdf(d));
      }
      default:
        throw std::logic_error("mean_abs_cubed: no analytic moments");
    }
  }

 private:
  explicit Adversary(Kind kind) : kind_(kind) {}

  Kind kind_;
  double p1_ = 0.0, p2_ = 0.0;
  uint64_t seed_ = 1;
  std::vector<double> script_;
  std::optional<Rng> rng_;
  std::size_t idx_ = 0;
};

// ---------------------------------------------------------------------------
// Learners

class Learner {
 public:
  virtual ~Learner() = default;
  virtual void begin(int T) = 0;
  virtual double decide(int t) = 0;
  virtual void observe(double g) = 0;
};

/// The Stein-solution learner. Either a fixed target + schedule, or a
/// target kind with learning-rate scalar alpha, instantiated per horizon
/// with scale alpha/sqrt(T) and the canonical schedule rho_t = sqrt(T-t).
class SteinLearner final : public Learner {
 public:
  SteinLearner(targets::TargetFunction target, olo::RhoSchedule schedule,
               olo::DecideOptions opts = {})
      : fixed_target_(std::move(target)),
        fixed_schedule_(
            std::make_shared<const olo::RhoSchedule>(std::move(schedule))),
        opts_(opts) {}

  SteinLearner(targets::Kind kind, double alpha, olo::DecideOptions opts = {})
      : kind_(kind), alpha_(alpha), opts_(opts) {
    if (kind == targets::Kind::custom)
      throw std::invalid_argument(
          "SteinLearner: custom targets need the explicit constructor");
    if (kind != targets::Kind::abs && !(alpha > 0.0))
      throw std::invalid_argument("SteinLearner: alpha must be > 0");
  }

  void begin(int T) override {
    if (fixed_schedule_) {
      if (fixed_schedule_->horizon() != T)
        throw std::invalid_argument("SteinLearner: schedule horizon != T");
      state_.emplace(fixed_schedule_, *fixed_target_);
      return;
    }
    const double eta = alpha_ / std::sqrt(static_cast<double>(T));
    targets::TargetFunction h = targets::TargetFunction::absolute();
    switch (kind_) {
      case targets::Kind::abs:
        break;
      case targets::Kind::huber:
        h = targets::TargetFunction::huber(eta);
        break;
      case targets::Kind::logcosh:
        h = targets::TargetFunction::log_cosh(eta);
        break;
      case targets::Kind::softthr:
        h = targets::TargetFunction::soft_threshold(eta);
        break;
      case targets::Kind::custom:
        break;  // rejected in the constructor
    }
    state_.emplace(std::make_shared<const olo::RhoSchedule>(
                       olo::RhoSchedule::sqrt_horizon(T)),
                   h);
  }

  double decide(int) override { return olo::decide(*state_, opts_); }
  void observe(double g) override {
    state_.emplace(olo::observe(std::move(*state_), g));
  }

  const olo::LearnerState& state() const { return *state_; }

 private:
  std::optional<targets::TargetFunction> fixed_target_;
  std::shared_ptr<const olo::RhoSchedule> fixed_schedule_;
  targets::Kind kind_ = targets::Kind::abs;
  double alpha_ = 1.0;
  olo::DecideOptions opts_;
  std::optional<olo::LearnerState> state_;
};

class OgdLearner final : public Learner {
 public:
  explicit OgdLearner(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0))
      throw std::invalid_argument("OgdLearner: alpha must be > 0");
  }
  void begin(int T) override {
    eta_ = alpha_ / std::sqrt(static_cast<double>(T));
    x_ = 0.0;
  }
  double decide(int) override { return x_; }
  void observe(double g) override { x_ = baselines::ogd_step(x_, g, eta_); }

 private:
  double alpha_, eta_ = 0.0, x_ = 0.0;
};

class MwuLearner final : public Learner {
 public:
  explicit MwuLearner(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0))
      throw std::invalid_argument("MwuLearner: alpha must be > 0");
  }
  void begin(int T) override {
    eta_ = alpha_ / std::sqrt(static_cast<double>(T));
    s_ = 0.0;
  }
  double decide(int) override { return baselines::mwu_decide(s_, eta_); }
  void observe(double g) override { s_ += g; }

 private:
  double alpha_, eta_ = 0.0, s_ = 0.0;
};

/// Dynamic-programming learner; Boolean adversaries only. The potential
/// defaults to the centered absolute value built for the horizon.
class CoverLearner final : public Learner {
 public:
  CoverLearner() = default;
  explicit CoverLearner(std::function<baselines::CoverSpec(int)> spec_builder)
      : builder_(std::move(spec_builder)) {}

  void begin(int T) override {
    spec_.emplace(builder_ ? builder_(T)
                           : baselines::CoverSpec::centered_absolute(T));
    t_ = 1;
    s_ = 0.0;
  }
  double decide(int) override { return baselines::cover_decide(*spec_, t_, s_); }
  void observe(double g) override {
    s_ += g;
    t_ += 1;
  }
  const baselines::CoverSpec& spec() const { return *spec_; }

 private:
  std::function<baselines::CoverSpec(int)> builder_;
  std::optional<baselines::CoverSpec> spec_;
  int t_ = 1;
  double s_ = 0.0;
};

// ---------------------------------------------------------------------------
// The game loop and transcripts

struct GameTranscript {
  int T = 0;
  std::vector<double> x, g;
  double loss_total = 0.0;  // sum g_t x_t
  double s_final = 0.0;     // sum g_t

  double regret_at(double u) const { return loss_total - s_final * u; }
  double reg_unif() const { return std::max(regret_at(-1.0), regret_at(1.0)); }
};

/// Run one game of exactly T rounds; the learner sees g_t only after
/// emitting x_t. Learner/adversary faults are rethrown with the round index.
inline GameTranscript play(Learner& learner, Adversary& adversary, int T) {
  if (T < 1) throw std::invalid_argument("play: T must be >= 1");
  learner.begin(T);
  adversary.begin(T);
  GameTranscript tr;
  tr.T = T;
  tr.x.reserve(T);
  tr.g.reserve(T);
  double comp = 0.0;
  for (int t = 1; t <= T; ++t) {
    double x, g;
    try {
      x = learner.decide(t);
      g = adversary.next(t, x);
      learner.observe(g);
    } catch (const std::exception& e) {
      throw std::runtime_error("play: round " + std::to_string(t) + ": " +
                               e.what());
    }
    tr.x.push_back(x);
    tr.g.push_back(g);
    const double term = g * x - comp;
    const double next = tr.loss_total + term;
    comp = (next - tr.loss_total) - term;
    tr.loss_total = next;
    tr.s_final += g;
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Pathwise total-loss bound

struct BoundLedger {
  double psi_bar_term = 0.0;  // -E[h(sum g + rho_T Z)] + E[h(rho_0 Z)]
  bool convex_mode = true;    // max{g^2-c, 0} vs |g^2-c| in the first summand
  std::vector<std::array<double, 2>> err_terms;  // per-round two summands

  double err_total() const {
    double acc = 0.0, comp = 0.0;
    for (const auto& e : err_terms) {
      const double term = e[0] + e[1] - comp;
      const double next = acc + term;
      comp = (next - acc) - term;
      acc = next;
    }
    return acc;
  }
  double total() const { return psi_bar_term + err_total(); }
};

/// Ledger for a finished game: Loss_T <= ledger.total() holds pathwise for
/// every transcript the Stein learner produces (any adversary, bounded or
/// not). convex_mode defaults to the target's convexity flag.
inline BoundLedger pathwise_bound(const GameTranscript& tr,
                                  const olo::RhoSchedule& schedule,
                                  const targets::TargetFunction& h,
                                  std::optional<bool> convex_mode = {}) {
  if (schedule.horizon() != tr.T)
    throw std::invalid_argument(
        "pathwise_bound: schedule and transcript lengths disagree");
  BoundLedger ledger;
  ledger.convex_mode = convex_mode.value_or(h.convex());
  const double rho0 = schedule.rho(0), rho_t_final = schedule.rho(tr.T);
  const double terminal =
      rho_t_final == 0.0 ? h(tr.s_final)
                         : h.gaussian_expectation(tr.s_final, rho_t_final);
  ledger.psi_bar_term = -terminal + h.gaussian_expectation(0.0, rho0);
  ledger.err_terms.reserve(tr.T);
  for (int t = 1; t <= tr.T; ++t) {
    const double g = tr.g[t - 1];
    const double c = schedule.c(t);
    const double dev = g * g - c;
    const double first = specfn::kSqrt2OverPi *
                         (ledger.convex_mode ? std::max(dev, 0.0)
                                             : std::abs(dev)) /
                         schedule.rho(t - 1);
    const double second = (2.0 * c * std::abs(g) + std::abs(g * g * g)) /
                          schedule.rho_sq(t - 1);
    ledger.err_terms.push_back({first, second});
  }
  return ledger;
}

/// Reference value of the total-loss lower bound (without its absolute
/// constant): -h(sum g) + E[h(sqrt(T) Z)].
inline double lower_bound_value(const targets::TargetFunction& h, int T,
                                double sum_g) {
  return -h(sum_g) +
         h.gaussian_expectation(0.0, std::sqrt(static_cast<double>(T)));
}

// ---------------------------------------------------------------------------
// Prefactor curves and gaps

/// E[ln(cosh(alpha Z))/alpha], accurate for all alpha > 0: sqrt(2/pi) plus
/// a localized residual integral.
inline double lse_gaussian_mean(double alpha) {
  if (!(alpha > 0.0))
    throw std::domain_error("lse_gaussian_mean: alpha must be > 0");
  const double resid =
      specfn::integrate(
          [&](double v) {
            return specfn::normal_pdf(v / (2.0 * alpha)) *
                   (std::log1p(std::exp(-v)) - 0.69314718055994530942);
          },
          0.0, 60.0, 1e-12, 1e-16) /
      (alpha * alpha);
  return specfn::kSqrt2OverPi + resid;
}

struct Prefactors {
  double gamma_huber, gamma_ogd, gamma_lse, gamma_mwu, gamma_sth;
  double gap_ogd, gap_mwu;
};

inline Prefactors prefactors(double u, double alpha) {
  if (!(alpha > 0.0))
    throw std::domain_error("prefactors: alpha must be > 0");
  if (!(std::abs(u) <= 1.0))
    throw std::domain_error("prefactors: comparator must lie in [-1, 1]");
  using namespace specfn;
  const double x = 1.0 / alpha;
  Prefactors p;
  p.gamma_huber = u * u / (2.0 * alpha) + (alpha + x) * normal_cdf(x) +
                  normal_pdf(x) - 0.5 * alpha - x;
  p.gamma_ogd = 0.5 * (u * u / alpha + alpha);
  const double pu = 1.0 + u, qu = 1.0 - u;
  const double ent = (pu > 0 ? pu * std::log(pu) : 0.0) +
                     (qu > 0 ? qu * std::log(qu) : 0.0);
  const double lse_mean = lse_gaussian_mean(alpha);
  p.gamma_lse = ent / (2.0 * alpha) + lse_mean;
  p.gamma_mwu = ent / (2.0 * alpha) + 0.5 * alpha;
  p.gamma_sth = std::abs(u) / alpha + 2.0 * x * normal_cdf(x) +
                2.0 * normal_pdf(x) - 2.0 * x;
  // gap_ogd = (alpha + 1/alpha)(1 - Phi(1/alpha)) - phi(1/alpha), written in
  // Mills-ratio form: positivity is exactly the lower Gordon bound, and the
  // direct difference underflows for small alpha.
  p.gap_ogd = normal_pdf(x) * ((x + 1.0 / x) * mills_ratio(x) - 1.0);
  p.gap_mwu = 0.5 * alpha - lse_mean;
  return p;
}

// ---------------------------------------------------------------------------
// Loss versus uniform-regret tradeoff

struct TradeoffPoint {
  double eps;    // total-loss budget per sqrt(T)
  double gamma;  // optimal uniform-regret prefactor
  double alpha;  // learning-rate scalar, from eps - gamma = -1/alpha

  double residual() const {
    return specfn::normal_cdf_antideriv(eps - gamma) - 0.5 * eps;
  }
};

/// Solve int_{-inf}^{eps - gamma} Phi = eps/2 for gamma by bisection on
/// [eps, eps + 20] using the closed antiderivative x Phi(x) + phi(x).
inline TradeoffPoint solve_gamma_eps(double eps) {
  using namespace specfn;
  if (!(eps > 0.0) || eps > kSqrt2OverPi + 1e-12)
    throw std::domain_error(
        "solve_gamma_eps: eps must lie in (0, sqrt(2/pi)]");
  auto shortfall = [&](double gamma) {
    return normal_cdf_antideriv(eps - gamma) - 0.5 * eps;
  };
  double lo = eps, hi = eps + 20.0;
  double gamma;
  if (shortfall(lo) <= 0.0) {
    gamma = eps;  // the eps = sqrt(2/pi) endpoint, where gamma = eps
  } else {
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (shortfall(mid) > 0.0 ? lo : hi) = mid;
    }
    gamma = 0.5 * (lo + hi);
  }
  TradeoffPoint pt;
  pt.eps = eps;
  pt.gamma = gamma;
  pt.alpha = gamma - eps > 1e-15
                 ? 1.0 / (gamma - eps)
                 : std::numeric_limits<double>::infinity();
  return pt;
}

/// Uniform-regret bound of the unconstrained-reduction baseline at loss
/// budget eps sqrt(T):  eps sqrt(T) + sqrt(2T) erfi^{-1}(sqrt2/(sqrt_pi eps)).
inline double baseline_tradeoff(double eps, double T) {
  using namespace specfn;
  if (!(eps > 0.0))
    throw std::domain_error("baseline_tradeoff: eps must be > 0");
  return eps * std::sqrt(T) +
         std::sqrt(2.0 * T) * erfi_inverse(kSqrt2 / (kSqrtPi * eps));
}

/// Equivalence of {Loss <= a and Reg_unif <= b} with the comparator-wise
/// bound Reg(u) <= a + (b-a)|u|, evaluated on a 201-point grid. Returns
/// whether the two conditions agree on this transcript.
inline bool two_point_check(const GameTranscript& tr, double a, double b) {
  const bool direct = tr.loss_total <= a && tr.reg_unif() <= b;
  bool gridwise = true;
  for (int i = 0; i <= 200; ++i) {
    const double u = -1.0 + i * 0.01;
    if (tr.regret_at(u) > a + (b - a) * std::abs(u)) {
      gridwise = false;
      break;
    }
  }
  return direct == gridwise;
}

// ---------------------------------------------------------------------------
// Stochastic (noisy feedback) runner

struct StochasticReport {
  double mean_loss = 0.0;
  double std_error = 0.0;
  double bound_rhs = 0.0;
  int trials = 0;

  bool holds() const { return mean_loss <= bound_rhs + 3.0 * std_error; }
};

/// Monte-Carlo check of the in-expectation total-loss bound for the Stein
/// learner: E[Loss] <= -E[h(sum G)] + E[h(rho_0 Z)]
///   + sum_t [ sqrt(2/pi) pos(E[G^2] - c_t)/rho_{t-1}
///             + (2 c_t E|G| + E|G|^3)/rho_{t-1}^2 ],
/// where pos(.) is max(., 0) for convex targets and |.| otherwise.
/// Moments come from the adversary's law when analytic, else from the same
/// trials (plug-in). E[h(sum G)] is always plug-in.
inline StochasticReport run_stochastic(SteinLearner& learner,
                                       const Adversary& adversary, int T,
                                       int n_trials, uint64_t seed) {
  if (n_trials < 2)
    throw std::invalid_argument("run_stochastic: need at least 2 trials");
  double loss_acc = 0.0, loss_sq_acc = 0.0, h_sum_acc = 0.0;
  double plug_mom_acc = 0.0;  // per-path sum of (2 c_t |g| + |g|^3)/rho^2
  std::vector<double> plug_sq(T, 0.0);
  const bool analytic = adversary.has_analytic_moments();
  GameTranscript tr;
  for (int i = 0; i < n_trials; ++i) {
    Adversary adv = adversary.with_seed(mix_seed(seed, i));
    tr = play(learner, adv, T);
    const auto& sched = learner.state().schedule();
    const auto& h = learner.state().target();
    loss_acc += tr.loss_total;
    loss_sq_acc += tr.loss_total * tr.loss_total;
    h_sum_acc += h(tr.s_final);
    if (!analytic) {
      double m = 0.0;
      for (int t = 1; t <= T; ++t) {
        const double g = tr.g[t - 1];
        m += (2.0 * sched.c(t) * std::abs(g) + std::abs(g * g * g)) /
             sched.rho_sq(t - 1);
        plug_sq[t - 1] += g * g;
      }
      plug_mom_acc += m;
    }
  }
  const auto& sched = learner.state().schedule();
  const auto& h = learner.state().target();
  const double n = static_cast<double>(n_trials);
  StochasticReport rep;
  rep.trials = n_trials;
  rep.mean_loss = loss_acc / n;
  const double var =
      std::max(0.0, (loss_sq_acc - n * rep.mean_loss * rep.mean_loss) /
                        (n - 1.0));
  rep.std_error = std::sqrt(var / n);

  double moment_sum = 0.0, second_moment_sum = 0.0;
  for (int t = 1; t <= T; ++t) {
    const double c = sched.c(t);
    const double m2 = analytic ? adversary.mean_sq() : plug_sq[t - 1] / n;
    const double dev = m2 - c;
    second_moment_sum += specfn::kSqrt2OverPi *
                         (h.convex() ? std::max(dev, 0.0) : std::abs(dev)) /
                         sched.rho(t - 1);
    if (analytic)
      moment_sum += (2.0 * c * adversary.mean_abs() +
                     adversary.mean_abs_cubed()) /
                    sched.rho_sq(t - 1);
  }
  if (!analytic) moment_sum = plug_mom_acc / n;
  rep.bound_rhs = -h_sum_acc / n + h.gaussian_expectation(0.0, sched.rho(0)) +
                  second_moment_sum + moment_sum;
  return rep;
}

}  // namespace steinolo::harness
