#pragma once

// Reference learners: projected constant-step online gradient descent,
// two-expert multiplicative weights converted to the interval game, and
// the classical dynamic-programming learner for Boolean adversaries, which
// averages a discrete derivative over Rademacher-sum distributions.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace steinolo::baselines {

/// x_t = clamp(x_{t-1} - eta g_{t-1}) onto [-1, 1].
inline double ogd_step(double x_prev, double g_prev, double eta) {
  if (!(eta > 0.0)) throw std::domain_error("ogd_step: eta must be > 0");
  const double x = x_prev - eta * g_prev;
  return std::min(1.0, std::max(-1.0, x));
}

/// Two-expert multiplicative weights on losses [g, -g], output w_1 - w_2.
/// The softmax collapses to -tanh(eta * sum of gradients).
inline double mwu_decide(double s_prev, double eta) {
  if (!(eta > 0.0)) throw std::domain_error("mwu_decide: eta must be > 0");
  return -std::tanh(eta * s_prev);
}

/// The raw two-expert softmax, kept as a numeric oracle for mwu_decide.
inline double mwu_decide_softmax(double s_prev, double eta) {
  const double a = -eta * s_prev, b = eta * s_prev;
  const double m = std::max(a, b);
  const double wa = std::exp(a - m), wb = std::exp(b - m);
  return (wa - wb) / (wa + wb);
}

/// Precomputed Rademacher-sum pmfs RS(n) for n in [0, T] plus the target
/// potential psi*. pmf weights are built from log-binomials so the tables
/// stay finite for T in the thousands.
class CoverSpec {
 public:
  CoverSpec(int T, std::function<double(double)> psi_star)
      : T_(T), psi_(std::move(psi_star)) {
    if (T < 1) throw std::invalid_argument("CoverSpec: T must be >= 1");
    pmf_.resize(T + 1);
    const double ln2 = 0.69314718055994530942;
    for (int n = 0; n <= T; ++n) {
      pmf_[n].resize(n + 1);
      for (int j = 0; j <= n; ++j) {
        pmf_[n][j] = std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                              std::lgamma(n - j + 1.0) - n * ln2);
      }
    }
  }

  int horizon() const { return T_; }
  double psi(double x) const { return psi_(x); }
  /// RS(n) weights; the j-th entry sits on the support point 2j - n.
  const std::vector<double>& pmf(int n) const { return pmf_.at(n); }

  /// Centered absolute-value potential psi*(x) = |x| - E_{RS(T)}|X|, the
  /// canonical achievable choice.
  static CoverSpec centered_absolute(int T) {
    CoverSpec tmp(T, [](double x) { return std::abs(x); });
    double mean_abs = 0.0, comp = 0.0;
    const auto& p = tmp.pmf(T);
    for (int j = 0; j <= T; ++j) {
      const double term = p[j] * std::abs(2.0 * j - T) - comp;
      const double next = mean_abs + term;
      comp = (next - mean_abs) - term;
      mean_abs = next;
    }
    return CoverSpec(T, [mean_abs](double x) { return std::abs(x) - mean_abs; });
  }

 private:
  int T_;
  std::function<double(double)> psi_;
  std::vector<std::vector<double>> pmf_;
};

/// Round-t decision for a Boolean game with integer running sum s_prev:
/// x_t = -1/2 E_{X~RS(T-t)}[psi*(s + X + 1) - psi*(s + X - 1)].
inline double cover_decide(const CoverSpec& spec, int t, double s_prev) {
  if (t < 1 || t > spec.horizon())
    throw std::out_of_range("cover_decide: round index outside [1, T]");
  if (std::abs(s_prev - std::round(s_prev)) > 1e-9)
    throw std::invalid_argument(
        "cover_decide: running sum must be an integer (Boolean protocol)");
  const int n = spec.horizon() - t;
  const auto& p = spec.pmf(n);
  double acc = 0.0, comp = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double x = s_prev + (2.0 * j - n);
    const double term = p[j] * (spec.psi(x + 1.0) - spec.psi(x - 1.0)) - comp;
    const double next = acc + term;
    comp = (next - acc) - term;
    acc = next;
  }
  return -0.5 * acc;
}

/// E_{X~RS(T)}[psi*(X)]; achievability of the total-loss bound requires
/// this to be <= 0. The caller checks the sign.
inline double cover_achievability(const CoverSpec& spec) {
  const int T = spec.horizon();
  const auto& p = spec.pmf(T);
  double acc = 0.0, comp = 0.0;
  for (int j = 0; j <= T; ++j) {
    const double term = p[j] * spec.psi(2.0 * j - T) - comp;
    const double next = acc + term;
    comp = (next - acc) - term;
    acc = next;
  }
  return acc;
}

}  // namespace steinolo::baselines
