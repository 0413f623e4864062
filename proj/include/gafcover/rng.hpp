#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "numeric.hpp"

namespace gafcover {

// Counter-based randomness: every draw is a pure function of its key, so any
// coefficient or trial can be regenerated bit-exactly in isolation.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/*! Key for the coefficient draw ζ_n of trial `trial_id` under master `seed`. */
inline std::uint64_t zeta_key(std::uint64_t seed, std::uint64_t trial_id, std::uint64_t n) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ (trial_id * 0xd6e8feb86659fd93ull));
  h = mix64(h ^ (n * 0xa3b195354a39b70dull));
  return h;
}

/*! Uniform double in [0,1) from 53 high bits of a mixed word. */
inline double unit_uniform(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/*! Sequential generator over a keyed stream; used for experiment-level
 *  randomness (Monte Carlo angles, thinning) where per-index replay is not
 *  required. */
struct CounterRng {
  std::uint64_t key;
  std::uint64_t ctr = 0;

  explicit CounterRng(std::uint64_t k) : key(k) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream) : key(mix64(mix64(seed) ^ (stream * 0xd6e8feb86659fd93ull))) {}

  std::uint64_t next_u64() { return mix64(key + 0x9e3779b97f4a7c15ull * ++ctr); }
  double uniform() { return unit_uniform(next_u64()); }
  /*! Uniform in [lo, hi). */
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  /*! Standard complex Gaussian, density exp(-|z|^2)/pi, E|z|^2 = 1. */
  cplx complex_gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double mod = std::sqrt(-std::log1p(-u1));
    return mod * unit_phase(u2);
  }
  /*! Real standard normal N(0,1). */
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(kTwoPi * u2);
  }
};

// ── coefficient laws ──────────────────────────────────────────────────

enum class LawKind { ComplexGaussian, UniformModulusPhase, TwoPointModulus };

/*! Rotationally invariant coefficient law with E|ζ|² = 1. */
struct CoefficientLaw {
  LawKind kind = LawKind::ComplexGaussian;
  double r1 = 1.0, r2 = 1.0, p = 1.0;  // TwoPointModulus parameters

  static CoefficientLaw complex_gaussian() { return {LawKind::ComplexGaussian}; }
  static CoefficientLaw uniform_modulus_phase() { return {LawKind::UniformModulusPhase}; }
  static CoefficientLaw two_point(double r1, double r2, double p) {
    CoefficientLaw law{LawKind::TwoPointModulus, r1, r2, p};
    const double second_moment = p * r1 * r1 + (1.0 - p) * r2 * r2;
    if (std::abs(second_moment - 1.0) > 1e-12)
      throw std::invalid_argument("TwoPointModulus: p*r1^2 + (1-p)*r2^2 must equal 1");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("TwoPointModulus: p outside [0,1]");
    return law;
  }
};

/*! Draw ζ from `law` as a pure function of `key`. */
inline cplx draw_zeta(const CoefficientLaw& law, std::uint64_t key) {
  const double u1 = unit_uniform(mix64(key ^ 0x6a09e667f3bcc909ull));
  const double u2 = unit_uniform(mix64(key ^ 0xbb67ae8584caa73bull));
  switch (law.kind) {
    case LawKind::ComplexGaussian:
      return std::sqrt(-std::log1p(-u1)) * unit_phase(u2);
    case LawKind::UniformModulusPhase:
      return unit_phase(u2);
    case LawKind::TwoPointModulus:
      return (u1 < law.p ? law.r1 : law.r2) * unit_phase(u2);
  }
  throw std::logic_error("unreachable law kind");
}

}  // namespace gafcover
