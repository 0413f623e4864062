#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace gafcover {

using cplx = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ── compensated summation ─────────────────────────────────────────────

/*! Neumaier-compensated accumulator; add order is the caller's contract. */
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

/*! Component-wise compensated accumulator for complex terms. */
struct KahanCSum {
  KahanSum re, im;

  void add(cplx z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cplx value() const { return {re.value(), im.value()}; }
};

// ── phase arithmetic ──────────────────────────────────────────────────

/*! e(t) = exp(2*pi*i*t). */
inline cplx unit_phase(double t) { return {std::cos(kTwoPi * t), std::sin(kTwoPi * t)}; }

/*! Fractional part of n*theta computed without cancellation: theta is first
 *  reduced mod 1 (exact for doubles), then the product is split into an exact
 *  double-double via fma, so the result is accurate to a few ulp even when
 *  n*theta is ~1e15. Requires n < 2^53 (exact as a double). */
inline double phase_fraction(std::uint64_t n, double theta) {
  const double th = theta - std::floor(theta);  // exact: same binade subtraction
  const double p = static_cast<double>(n) * th;
  const double err = std::fma(static_cast<double>(n), th, -p);
  double f = p - std::floor(p);
  f += err;
  f -= std::floor(f);
  if (f >= 1.0) f -= 1.0;  // guard against round-up at the seam
  return f;
}

/*! e(n*theta) with exact modular reduction of the integer multiple. */
inline cplx unit_phase_mul(std::uint64_t n, double theta) {
  return unit_phase(phase_fraction(n, theta));
}

/*! sinc(x) = sin(2*pi*x)/(2*pi*x), sinc(0) = 1. */
inline double sinc(double x) {
  const double y = kTwoPi * x;
  if (std::abs(y) < 1e-8) return 1.0 - y * y / 6.0;
  return std::sin(y) / y;
}

// ── streaming statistics ──────────────────────────────────────────────

/*! Welford accumulator for mean / standard error of Monte Carlo outputs. */
struct RunningStat {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double std_error() const { return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0; }
};

inline std::uint64_t next_pow2(std::uint64_t x) {
  std::uint64_t p = 1;
  while (p < x) p <<= 1;
  return p;
}

}  // namespace gafcover
