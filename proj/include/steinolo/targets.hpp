#pragma once

// Target functions h parameterizing the learner: evaluation, derivative,
// convex conjugate at -u, Gaussian expectation E[h(mu + sigma Z)], and the
// Gaussian-smoothed derivative mean E[h'(s + w Z)] that the learner's
// output integrals consume. All targets are 1-Lipschitz by construction;
// callers must pre-normalize anything else.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "steinolo/specfn.hpp"

namespace steinolo::targets {

enum class Kind { abs, huber, logcosh, softthr, custom };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::abs: return "abs";
    case Kind::huber: return "huber";
    case Kind::logcosh: return "logcosh";
    case Kind::softthr: return "softthr";
    case Kind::custom: return "custom";
  }
  return "?";
}

class TargetFunction {
 public:
  static TargetFunction absolute() { return TargetFunction(Kind::abs, 0.0, true); }

  /// h(x) = k/2 x^2 inside |x| <= 1/k, |x| - 1/(2k) outside.
  static TargetFunction huber(double k) {
    if (!(k > 0.0)) throw std::invalid_argument("huber: k must be > 0");
    return TargetFunction(Kind::huber, k, true);
  }

  /// h(x) = ln(cosh(eta x)) / eta.
  static TargetFunction log_cosh(double eta) {
    if (!(eta > 0.0)) throw std::invalid_argument("log_cosh: eta must be > 0");
    return TargetFunction(Kind::logcosh, eta, true);
  }

  /// h(x) = max(|x| - 1/eta, 0).
  static TargetFunction soft_threshold(double eta) {
    if (!(eta > 0.0))
      throw std::invalid_argument("soft_threshold: eta must be > 0");
    return TargetFunction(Kind::softthr, eta, true);
  }

  /// User-supplied 1-Lipschitz target. Conjugate and Gaussian expectation
  /// fall back to numeric routines; convexity is taken on trust and only
  /// controls which error form the bound ledger applies.
  static TargetFunction custom(std::function<double(double)> eval,
                               std::function<double(double)> deriv,
                               bool convex) {
    TargetFunction t(Kind::custom, 0.0, convex);
    t.custom_eval_ = std::move(eval);
    t.custom_deriv_ = std::move(deriv);
    return t;
  }

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  bool convex() const { return convex_; }
  double lipschitz_constant() const { return 1.0; }

  double operator()(double x) const { return eval(x); }

  double eval(double x) const {
    switch (kind_) {
      case Kind::abs:
        return std::abs(x);
      case Kind::huber: {
        const double ax = std::abs(x);
        return ax <= 1.0 / scale_ ? 0.5 * scale_ * x * x
                                  : ax - 0.5 / scale_;
      }
      case Kind::logcosh: {
        const double t = scale_ * std::abs(x);
        // ln(cosh t) = t + ln((1+e^{-2t})/2); the rewrite avoids overflow.
        if (t > 20.0)
          return std::abs(x) + (std::log1p(std::exp(-2.0 * t)) - kLn2) / scale_;
        return std::log(std::cosh(t)) / scale_;
      }
      case Kind::softthr:
        return std::max(std::abs(x) - 1.0 / scale_, 0.0);
      case Kind::custom:
        return custom_eval_(x);
    }
    return 0.0;
  }

  /// A fixed member of the subdifferential; |result| <= 1. Kink values:
  /// 0 at the origin for abs, 0 inside the flat zone for soft-threshold.
  double derivative(double x) const {
    switch (kind_) {
      case Kind::abs:
        return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      case Kind::huber:
        return std::abs(x) <= 1.0 / scale_ ? scale_ * x : (x > 0 ? 1.0 : -1.0);
      case Kind::logcosh:
        return std::tanh(scale_ * x);
      case Kind::softthr:
        return std::abs(x) > 1.0 / scale_ ? (x > 0 ? 1.0 : -1.0) : 0.0;
      case Kind::custom:
        return custom_deriv_(x);
    }
    return 0.0;
  }

  /// h*(-u) = sup_x (-u x - h(x)) for u in [-1, 1].
  double conjugate_at_neg(double u) const {
    if (!(std::abs(u) <= 1.0))
      throw std::domain_error("conjugate_at_neg: comparator must lie in [-1,1]");
    switch (kind_) {
      case Kind::abs:
        return 0.0;
      case Kind::huber:
        return u * u / (2.0 * scale_);
      case Kind::logcosh: {
        const double p = (1.0 + u), q = (1.0 - u);
        const double plogp = p > 0.0 ? p * std::log(p) : 0.0;
        const double qlogq = q > 0.0 ? q * std::log(q) : 0.0;
        return (plogp + qlogq) / (2.0 * scale_);
      }
      case Kind::softthr:
        return std::abs(u) / scale_;
      case Kind::custom:
        return numeric_conjugate_at_neg(u);
    }
    return 0.0;
  }

  /// E[h(mu + sigma Z)], Z standard normal. Closed form for abs, huber and
  /// soft-threshold; Hermite quadrature for log-cosh and custom targets
  /// (accurate while scale*sigma stays moderate, which covers the sqrt(T)
  /// learning-rate regime).
  double gaussian_expectation(double mu, double sigma) const {
    if (sigma < 0.0)
      throw std::domain_error("gaussian_expectation: sigma must be >= 0");
    if (sigma == 0.0) return eval(mu);
    using namespace specfn;
    switch (kind_) {
      case Kind::abs: {
        const double m = mu / sigma;
        return mu * (normal_cdf(m) - normal_sf(m)) + 2.0 * sigma * normal_pdf(m);
      }
      case Kind::huber: {
        const double k = scale_;
        const double a = (-1.0 / k - mu) / sigma, b = (1.0 / k - mu) / sigma;
        const double pa = normal_pdf(a), pb = normal_pdf(b);
        const double ca = normal_cdf(a), sb = normal_sf(b);
        const double mid = cdf_interval(a, b);
        double v = -mu * ca + sigma * pa + mu * sb + sigma * pb;
        v -= 0.5 / k * (ca + sb);
        v += 0.5 * k *
             ((mu * mu + sigma * sigma) * mid + 2.0 * mu * sigma * (pa - pb) -
              sigma * sigma * (b * pb - a * pa));
        return v;
      }
      case Kind::softthr: {
        const double eta = scale_;
        const double a = (-1.0 / eta - mu) / sigma, b = (1.0 / eta - mu) / sigma;
        const double ca = normal_cdf(a), sb = normal_sf(b);
        return -mu * ca + sigma * normal_pdf(a) - ca / eta + mu * sb +
               sigma * normal_pdf(b) - sb / eta;
      }
      case Kind::logcosh: {
        // The Hermite rule is spectral while eta*sigma stays small; beyond
        // that, split off E|mu+sigma Z| (closed form) and integrate the
        // localized remainder (1/eta) ln((1+e^{-2 eta |y|})/2) adaptively.
        const double eta = scale_;
        if (eta * sigma <= 1.5)
          return standard_normal_mean(
              [&](double z) { return eval(mu + sigma * z); });
        const double base = absolute().gaussian_expectation(mu, sigma);
        const double lo = std::max(-22.0 / eta, mu - 12.0 * sigma);
        const double hi = std::min(22.0 / eta, mu + 12.0 * sigma);
        if (lo >= hi) return base - kLn2 / eta;
        const double resid = integrate_with_breakpoints(
            [&](double y) {
              return (std::log1p(std::exp(-2.0 * eta * std::abs(y))) - kLn2) /
                     eta * normal_pdf((y - mu) / sigma) / sigma;
            },
            lo, hi, {0.0}, 1e-12, 1e-15);
        // mass outside [lo, hi] contributes -ln2/eta per unit of weight
        const double inside =
            normal_cdf((hi - mu) / sigma) - normal_cdf((lo - mu) / sigma);
        return base + resid - (1.0 - inside) * kLn2 / eta;
      }
      case Kind::custom:
        return standard_normal_mean(
            [&](double z) { return eval(mu + sigma * z); });
    }
    return 0.0;
  }

  /// E[h'(s + w Z)], w >= 0. Exact in terms of Phi/phi wherever h' is
  /// piecewise linear; Hermite quadrature for log-cosh and custom targets.
  double smoothed_derivative_mean(double s, double w) const {
    if (w <= 0.0) return derivative(s);
    using namespace specfn;
    switch (kind_) {
      case Kind::abs:
        return std::erf(s / (w * kSqrt2));
      case Kind::huber: {
        const double k = scale_;
        const double lo = (s - 1.0 / k) / w, hi = (s + 1.0 / k) / w;
        return -1.0 + (1.0 - k * s) * normal_cdf(lo) +
               (1.0 + k * s) * normal_cdf(hi) -
               k * w * (normal_pdf(lo) - normal_pdf(hi));
      }
      case Kind::softthr: {
        const double eta = scale_;
        return normal_cdf((s - 1.0 / eta) / w) -
               normal_sf((s + 1.0 / eta) / w);
      }
      case Kind::logcosh: {
        const double eta = scale_;
        if (eta * w <= 1.5)
          return standard_normal_mean(
              [&](double z) { return std::tanh(eta * (s + w * z)); });
        // tanh(eta y) = sign(y) - sign(y) 2/(1+e^{2 eta |y|}): closed leading
        // term plus a remainder localized on the 1/eta scale.
        const double base = std::erf(s / (w * kSqrt2));
        const double lo = std::max(-22.0 / eta, s - 12.0 * w);
        const double hi = std::min(22.0 / eta, s + 12.0 * w);
        if (lo >= hi) return base;
        const double resid = integrate_with_breakpoints(
            [&](double y) {
              const double sgn = y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0);
              return -sgn * 2.0 / (1.0 + std::exp(2.0 * eta * std::abs(y))) *
                     normal_pdf((y - s) / w) / w;
            },
            lo, hi, {0.0}, 1e-12, 1e-15);
        return base + resid;
      }
      case Kind::custom:
        return standard_normal_mean(
            [&](double z) { return custom_deriv_(s + w * z); });
    }
    return 0.0;
  }

  /// Points where h' or h'' jumps (used by checkers to widen tolerances).
  std::vector<double> nonsmooth_points() const {
    switch (kind_) {
      case Kind::abs:
        return {0.0};
      case Kind::huber:
        return {-1.0 / scale_, 1.0 / scale_};
      case Kind::softthr:
        return {-1.0 / scale_, 1.0 / scale_};
      default:
        return {};
    }
  }

 private:
  TargetFunction(Kind kind, double scale, bool convex)
      : kind_(kind), scale_(scale), convex_(convex) {}

  static constexpr double kLn2 = 0.69314718055994530942;

  /// Phi(b) - Phi(a) for a <= b without right-tail cancellation.
  static double cdf_interval(double a, double b) {
    if (a + b > 0.0) return specfn::normal_sf(a) - specfn::normal_sf(b);
    return specfn::normal_cdf(b) - specfn::normal_cdf(a);
  }

  double numeric_conjugate_at_neg(double u) const {
    // Coarse scan, then golden-section refinement around the best cell.
    auto score = [&](double x) { return -u * x - eval(x); };
    double best_x = 0.0, best = score(0.0);
    for (double x = -50.0; x <= 50.0; x += 0.01) {
      const double v = score(x);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    double lo = best_x - 0.02, hi = best_x + 0.02;
    const double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = score(x1), f2 = score(x2);
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = score(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = score(x1);
      }
    }
    return std::max(best, std::max(f1, f2));
  }

  Kind kind_;
  double scale_;
  bool convex_;
  std::function<double(double)> custom_eval_;
  std::function<double(double)> custom_deriv_;
};

}  // namespace steinolo::targets
