#pragma once

#include <stdexcept>
#include <vector>

#include "numeric.hpp"

namespace gafcover {

/*! In-place iterative radix-2 transform: a[g] <- Σ_q a[q] e(sign·qg/G).
 *  sign = +1 turns a zero-padded coefficient vector into circle-grid samples
 *  Σ c_q e(qθ) at θ = g/G; no normalization is applied. */
inline void fourier_pow2(std::vector<cplx>& a, int sign) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fourier_pow2: size must be a power of two");
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = static_cast<double>(sign) / static_cast<double>(len);
    const cplx wlen = unit_phase(ang);
    for (std::size_t i = 0; i < n; i += len) {
      cplx w{1.0, 0.0};
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Re-anchor the twiddle periodically to stop rounding drift on long runs.
        if ((k & 1023u) == 0 && k != 0) w = unit_phase(ang * static_cast<double>(k));
        const cplx u = a[i + k];
        const cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace gafcover
