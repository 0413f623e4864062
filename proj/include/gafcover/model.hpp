#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "numeric.hpp"

namespace gafcover {

// ── slowly varying factor ─────────────────────────────────────────────

enum class SlowVariationKind { Constant, LogPower, IterLog };

/*! Closed family of slowly varying functions ω used in the coefficient law. */
struct SlowVariation {
  SlowVariationKind kind = SlowVariationKind::Constant;
  double param = 1.0;  // c for Constant, p for LogPower

  static SlowVariation constant(double c) { return {SlowVariationKind::Constant, c}; }
  static SlowVariation log_power(double p) { return {SlowVariationKind::LogPower, p}; }
  static SlowVariation iter_log() { return {SlowVariationKind::IterLog, 0.0}; }

  double operator()(double x) const {
    switch (kind) {
      case SlowVariationKind::Constant:
        return param;
      case SlowVariationKind::LogPower:
        return std::pow(1.0 + std::log1p(x), param);
      case SlowVariationKind::IterLog:
        return std::log(std::numbers::e + std::log(std::numbers::e + x));
    }
    throw std::logic_error("unreachable slow-variation kind");
  }

  /*! d/dx log ω(x); used by the analytic tail summation. */
  double dlog(double x) const {
    switch (kind) {
      case SlowVariationKind::Constant:
        return 0.0;
      case SlowVariationKind::LogPower:
        return param / ((1.0 + std::log1p(x)) * (1.0 + x));
      case SlowVariationKind::IterLog: {
        const double inner = std::numbers::e + x;
        const double mid = std::numbers::e + std::log(inner);
        return 1.0 / (std::log(mid) * mid * inner);
      }
    }
    throw std::logic_error("unreachable slow-variation kind");
  }

  std::string name() const {
    switch (kind) {
      case SlowVariationKind::Constant:
        return "constant(" + std::to_string(param) + ")";
      case SlowVariationKind::LogPower:
        return "log_power(" + std::to_string(param) + ")";
      case SlowVariationKind::IterLog:
        return "iter_log";
    }
    return "?";
  }
};

// ── coefficient model ─────────────────────────────────────────────────

/*! Deterministic coefficient sequence a_n = n^{-alpha} (log(n+1))^{-beta}
 *  ω(log(n+1)) with a_0 = 0, plus the block layout: block k covers
 *  frequencies [2^{L(k-1)}, 2^{Lk}). */
struct CoefficientModel {
  double alpha = 0.5;
  double beta = 1.0;
  SlowVariation omega = SlowVariation::constant(1.0);
  int block_exponent = 1;  // L
  std::uint64_t n_max = 1ull << 16;

  void validate() const {
    if (block_exponent < 1) throw std::invalid_argument("block_exponent must be >= 1");
    if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
  }

  /*! a_n; n = 0 returns 0, n > n_max is a range error. */
  double coeff(std::uint64_t n) const {
    if (n == 0) return 0.0;
    if (n > n_max) throw std::out_of_range("coeff: index beyond n_max");
    return coeff_unchecked(static_cast<double>(n));
  }

  /*! a_x for real x >= 1, without the truncation check (used by the
   *  analytic summation engine, which handles its own ranges). */
  double coeff_unchecked(double x) const {
    const double lg = std::log1p(x);
    return std::pow(x, -alpha) * std::pow(lg, -beta) * omega(lg);
  }

  /*! a_x², as one expression (avoids squaring extremes). */
  double coeff_sq(double x) const {
    const double lg = std::log1p(x);
    return std::pow(x, -2.0 * alpha) * std::pow(lg, -2.0 * beta) * omega(lg) * omega(lg);
  }

  /*! d/dx log(a_x²): logarithmic derivative for Euler-Maclaurin corrections. */
  double dlog_coeff_sq(double x) const {
    const double lg = std::log1p(x);
    return -2.0 * alpha / x - 2.0 * beta / ((1.0 + x) * lg) + 2.0 * omega.dlog(lg) / (1.0 + x);
  }
};

// ── block layout ──────────────────────────────────────────────────────

/*! First frequency of block k (k >= 1): 2^{L(k-1)}; block 1 starts at 1. */
inline std::uint64_t block_lo(int k, int L) {
  if (k < 1) throw std::invalid_argument("block index must be >= 1");
  const int e = L * (k - 1);
  if (e >= 63) throw std::overflow_error("block frequency exceeds 63-bit range");
  return 1ull << e;
}

/*! One past the last frequency of block k: 2^{Lk}. */
inline std::uint64_t block_hi(int k, int L) {
  const int e = L * k;
  if (e >= 63) throw std::overflow_error("block frequency exceeds 63-bit range");
  return 1ull << e;
}

/*! Frequency range [lo, hi) of the partial sum F_{m,n} (blocks m+1..n).
 *  With m = 0 the range starts at frequency 1. */
inline std::pair<std::uint64_t, std::uint64_t> block_range(int m, int n, int L) {
  if (m < 0 || n < m) throw std::invalid_argument("block range requires 0 <= m <= n");
  const std::uint64_t lo = (m == 0) ? 1ull : block_hi(m, L);
  const std::uint64_t hi = block_hi(n, L);
  return {lo, hi};
}

/*! Radius 𝔯_k = 1 - 2^{-Lk} at which block k's window sits. */
inline double block_radius(int k, int L) { return 1.0 - std::ldexp(1.0, -L * k); }

}  // namespace gafcover
