#pragma once

// The online learner. Each round it outputs
//
//   x_t = E[ f_{s_{t-1}, rho_{t-1}, h}(s_{t-1} + rho_t Z) ],
//
// computed without building the Stein solution: the output equals
// -E[h'(s + sqrt(rho_prev^2 - tau c) Z)] averaged over tau ~ Beta(1/2, 1),
// which the generic path integrates after the substitution tau = u^2 and
// the absolute-value / Huber targets reduce to Phi, phi and Owen's T.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "steinolo/specfn.hpp"
#include "steinolo/stein.hpp"
#include "steinolo/targets.hpp"

namespace steinolo::olo {

/// Nonincreasing variance-budget schedule rho_0 >= rho_1 >= ... >= rho_T,
/// rho_0 > 0 and rho_t > 0 before the final round. c_t = rho_{t-1}^2 -
/// rho_t^2 is the per-round variance guess.
class RhoSchedule {
 public:
  explicit RhoSchedule(std::vector<double> rho) : rho_(std::move(rho)) {
    rho2_.resize(rho_.size());
    for (std::size_t t = 0; t < rho_.size(); ++t) rho2_[t] = rho_[t] * rho_[t];
    validate();
  }

  /// The canonical choice rho_t = sqrt(T - t). Built from the squares so
  /// the variance increments c_t come out exactly 1.
  static RhoSchedule sqrt_horizon(int T) {
    if (T < 1) throw std::invalid_argument("sqrt_horizon: T must be >= 1");
    RhoSchedule s;
    s.rho_.resize(T + 1);
    s.rho2_.resize(T + 1);
    for (int t = 0; t <= T; ++t) {
      s.rho2_[t] = static_cast<double>(T - t);
      s.rho_[t] = std::sqrt(s.rho2_[t]);
    }
    s.validate();
    return s;
  }

  int horizon() const { return static_cast<int>(rho_.size()) - 1; }
  double rho(int t) const { return rho_.at(t); }
  double rho_sq(int t) const { return rho2_.at(t); }
  double c(int t) const { return rho2_.at(t - 1) - rho2_.at(t); }
  const std::vector<double>& values() const { return rho_; }

 private:
  RhoSchedule() = default;

  void validate() const {
    if (rho_.size() < 2)
      throw std::invalid_argument("RhoSchedule: need rho_0..rho_T with T >= 1");
    if (!(rho_[0] > 0.0))
      throw std::invalid_argument("RhoSchedule: rho_0 must be > 0");
    for (std::size_t t = 1; t < rho_.size(); ++t) {
      if (!(rho_[t] >= 0.0) || rho_[t] > rho_[t - 1])
        throw std::invalid_argument("RhoSchedule: rho must be nonincreasing");
      if (t + 1 < rho_.size() && rho_[t] == 0.0)
        throw std::invalid_argument(
            "RhoSchedule: rho_t must stay > 0 before the final round");
    }
  }

  std::vector<double> rho_;
  std::vector<double> rho2_;  // squares are primary for c_t exactness
};

struct DecideOptions {
  bool force_generic = false;  // bypass closed forms (oracle testing)
  double tolerance = 1e-11;    // relative target for the outer integral
};

namespace detail {

// int_0^1 tau^{-1/2} Phi(m / sqrt(rho^2 - tau c)) dtau for 0 < c < rho^2.
inline double cdf_mixture_integral(double m, double rho, double c) {
  using namespace specfn;
  const double w2 = rho * rho - c;
  const double q = std::sqrt(c / w2);
  const double sqrt_c = std::sqrt(c);
  const double mh = m / rho;
  return 2.0 * normal_cdf(m / std::sqrt(w2)) +
         (kSqrt2Pi * rho / sqrt_c) * normal_pdf(mh) *
             (1.0 - 2.0 * normal_cdf(mh * q)) +
         (2.0 * kSqrt2Pi * m / sqrt_c) * owens_t(mh, q);
}

// int_0^1 tau^{-1/2} sqrt(rho^2 - tau c) phi(m / sqrt(rho^2 - tau c)) dtau.
inline double pdf_mixture_integral(double m, double rho, double c) {
  using namespace specfn;
  const double w2 = rho * rho - c;
  const double q = std::sqrt(c / w2);
  const double sqrt_c = std::sqrt(c);
  const double mh = m / rho;
  return std::sqrt(w2) * normal_pdf(m / std::sqrt(w2)) +
         (kSqrt2Pi * m * rho / sqrt_c) * normal_pdf(mh) *
             (normal_cdf(mh * q) - 0.5) +
         (kSqrt2Pi / sqrt_c) * (rho * rho - m * m) * owens_t(mh, q);
}

}  // namespace detail

/// Generic decision, valid for every target kind: the outer mixture
/// integral after tau = u^2, with the inner Gaussian mean analytic or
/// quadrature per target. Unclamped.
inline double decide_generic(const targets::TargetFunction& h, double s,
                             double rho_prev, double c, double tol = 1e-11) {
  if (!(rho_prev > 0.0))
    throw std::logic_error("decide: rho_{t-1} must be > 0");
  if (c <= 0.0) return -h.smoothed_derivative_mean(s, rho_prev);
  const double rho2 = rho_prev * rho_prev;
  return -specfn::integrate(
      [&](double u) {
        const double w2 = rho2 - u * u * c;
        const double w = w2 > 0.0 ? std::sqrt(w2) : 0.0;
        return h.smoothed_derivative_mean(s, w < 1e-12 ? 0.0 : w);
      },
      0.0, 1.0, tol, 1e-13);
}

/// Closed decision for h = |.|. Three regimes: no variance spent this
/// round, the final round (all remaining variance spent), and the general
/// Owen's-T case. Unclamped.
inline double decide_closed_abs(double s, double rho_prev, double c) {
  using namespace specfn;
  if (!(rho_prev > 0.0))
    throw std::logic_error("decide: rho_{t-1} must be > 0");
  if (c <= 0.0) return 1.0 - 2.0 * normal_cdf(s / rho_prev);
  const double w2 = rho_prev * rho_prev - c;
  if (w2 <= 0.0) {
    if (s == 0.0) return 0.0;
    const double sh = s / rho_prev;
    const double sign = s > 0.0 ? 1.0 : -1.0;
    return -sign *
           (1.0 + kSqrtPiOver2 * std::abs(sh) -
            kSqrtPiOver2 * sh * (normal_cdf(sh) - normal_sf(sh)) -
            kSqrt2Pi * normal_pdf(sh));
  }
  return 1.0 - detail::cdf_mixture_integral(s, rho_prev, c);
}

/// Closed decision for the Huber target with bend parameter k. Unclamped.
inline double decide_closed_huber(double k, double s, double rho_prev,
                                  double c) {
  if (!(rho_prev > 0.0))
    throw std::logic_error("decide: rho_{t-1} must be > 0");
  const targets::TargetFunction h = targets::TargetFunction::huber(k);
  if (c <= 0.0) return -h.smoothed_derivative_mean(s, rho_prev);
  const double w2 = rho_prev * rho_prev - c;
  if (w2 <= 0.0) {
    // final round: x_t = f_{s, rho_prev, h}(s)
    return stein::solve(s, rho_prev, h)(s);
  }
  const double inv_k = 1.0 / k;
  const double jm = detail::cdf_mixture_integral(s - inv_k, rho_prev, c);
  const double jp = detail::cdf_mixture_integral(s + inv_k, rho_prev, c);
  const double km = detail::pdf_mixture_integral(s - inv_k, rho_prev, c);
  const double kp = detail::pdf_mixture_integral(s + inv_k, rho_prev, c);
  return 1.0 - 0.5 * ((1.0 - k * s) * jm + (1.0 + k * s) * jp -
                      k * (km - kp));
}

/// Learner state: next round index t (1-based), running gradient sum, the
/// schedule and the target. A value type; the schedule is shared immutable.
class LearnerState {
 public:
  LearnerState(std::shared_ptr<const RhoSchedule> schedule,
               targets::TargetFunction target)
      : schedule_(std::move(schedule)), target_(std::move(target)) {
    if (!schedule_) throw std::invalid_argument("LearnerState: null schedule");
  }

  LearnerState(const RhoSchedule& schedule, targets::TargetFunction target)
      : LearnerState(std::make_shared<const RhoSchedule>(schedule),
                     std::move(target)) {}

  int round() const { return t_; }
  double gradient_sum() const { return s_prev_; }
  int horizon() const { return schedule_->horizon(); }
  bool finished() const { return t_ > horizon(); }
  const RhoSchedule& schedule() const { return *schedule_; }
  const targets::TargetFunction& target() const { return target_; }

 private:
  friend LearnerState observe(LearnerState state, double g);
  std::shared_ptr<const RhoSchedule> schedule_;
  targets::TargetFunction target_;
  int t_ = 1;
  double s_prev_ = 0.0;
};

/// Advance the state with an observed gradient (any finite real).
inline LearnerState observe(LearnerState state, double g) {
  if (state.finished())
    throw std::logic_error("observe: game is over (t > T)");
  state.s_prev_ += g;
  state.t_ += 1;
  return state;
}

/// The round-t decision, clamped to [-1, 1]. (The exact value is inside;
/// quadrature can overshoot by ~1e-9.)
inline double decide(const LearnerState& state, const DecideOptions& opts = {}) {
  if (state.finished()) throw std::logic_error("decide: game is over (t > T)");
  const int t = state.round();
  const double rho_prev = state.schedule().rho(t - 1);
  const double c = state.schedule().c(t);
  const double s = state.gradient_sum();
  double x;
  if (opts.force_generic) {
    x = decide_generic(state.target(), s, rho_prev, c, opts.tolerance);
  } else {
    switch (state.target().kind()) {
      case targets::Kind::abs:
        x = decide_closed_abs(s, rho_prev, c);
        break;
      case targets::Kind::huber:
        x = decide_closed_huber(state.target().scale(), s, rho_prev, c);
        break;
      default:
        x = decide_generic(state.target(), s, rho_prev, c, opts.tolerance);
    }
  }
  return std::min(1.0, std::max(-1.0, x));
}

/// Effective learning rate of the Huber-target learner around s = 0:
/// k erf(1/(sqrt2 k rho_t)), increasing toward the nominal k as rho_t -> 0.
inline double effective_learning_rate(double k, double rho_t) {
  if (!(k > 0.0) || !(rho_t > 0.0))
    throw std::domain_error("effective_learning_rate: inputs must be > 0");
  return k * std::erf(1.0 / (specfn::kSqrt2 * k * rho_t));
}

}  // namespace steinolo::olo
