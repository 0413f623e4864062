#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "model.hpp"
#include "tail_sum.hpp"

namespace gafcover {

/*! Drift/variance budget constants. delta is the homing-oracle margin, C_H the
 *  sub-gaussian variance proxy of the selection step, C_D the penalty rate for
 *  steps whose decorrelated offset was unavailable. Defaults are pinned from
 *  the oracle-calibration experiment (see homing.hpp). */
struct ScaleConstants {
  double delta = 0.003732555500708612;
  double C_H = 0.22512764543433422;
  double C_D = 0.8592971992316869;
  double r0 = 2.25;     // homing capture radius, in units of the incoming 𝔰
  double rho_H = 0.5;   // largest offset correlation the oracle margins tolerate
};

/*! Exact block standard deviations and their prefix budgets.
 *
 *  s_j² = Σ a_n² over the dyadic block n ∈ [2^j, 2^{j+1}); 𝔰_k² aggregates L
 *  consecutive dyadic blocks, so 𝔰_k² = Σ a_n² over n ∈ [2^{L(k-1)}, 2^{Lk}).
 *  Prefix sums give the drift budget L_{m,n} = (δ/2)·Σ_{k=m+1}^n 𝔰_k and the
 *  variance budget V_{m,n} = C_H·Σ_{k=m+1}^n 𝔰_k² in O(1) per query. */
struct ScaleTable {
  CoefficientModel model;
  ScaleConstants constants;
  int k_max = 0;                 // blocks 1..k_max
  std::vector<double> dyadic2;   // dyadic2[j] = s_j², j = 0..L*k_max-1
  std::vector<double> lblock2;   // lblock2[k] = 𝔰_k², index 0 unused
  std::vector<double> lblock;    // 𝔰_k
  std::vector<double> prefix1;   // prefix1[k] = Σ_{i<=k} 𝔰_i
  std::vector<double> prefix2;   // prefix2[k] = Σ_{i<=k} 𝔰_i²

  int L() const { return model.block_exponent; }

  double s_sq(int j) const { return dyadic2.at(static_cast<std::size_t>(j)); }
  double s(int j) const { return std::sqrt(s_sq(j)); }
  double frak_s_sq(int k) const { return lblock2.at(static_cast<std::size_t>(k)); }
  double frak_s(int k) const { return lblock.at(static_cast<std::size_t>(k)); }

  void check_range(int m, int n) const {
    if (m < 0 || n < m || n > k_max) throw std::out_of_range("block range outside table");
  }
  /*! L_{m,n} = (δ/2) Σ_{k=m+1}^n 𝔰_k. */
  double drift_budget(int m, int n) const {
    check_range(m, n);
    return 0.5 * constants.delta * (prefix1[static_cast<std::size_t>(n)] - prefix1[static_cast<std::size_t>(m)]);
  }
  /*! V_{m,n} = C_H Σ_{k=m+1}^n 𝔰_k². */
  double variance_budget(int m, int n) const {
    check_range(m, n);
    return constants.C_H * (prefix2[static_cast<std::size_t>(n)] - prefix2[static_cast<std::size_t>(m)]);
  }
  /*! Γ_{m,n} = L_{m,n}²/V_{m,n}. */
  double gamma_ratio(int m, int n) const {
    const double v = variance_budget(m, n);
    if (v == 0.0) throw std::domain_error("gamma_ratio: zero variance budget");
    const double l = drift_budget(m, n);
    return l * l / v;
  }
  /*! Largest a in (0,1] with j -> Γ_{j,n} nondecreasing on j in [1, a·n]
   *  (direct scan; tiny relative slack absorbs rounding). */
  double monotone_window(int n) const {
    check_range(0, n);
    if (n < 2) throw std::invalid_argument("monotone_window needs n >= 2");
    int jstar = 1;
    double prev = gamma_ratio(1, n);
    for (int j = 2; j <= n - 1; ++j) {
      const double cur = gamma_ratio(j, n);
      if (cur < prev * (1.0 - 1e-12)) break;
      prev = cur;
      jstar = j;
    }
    return static_cast<double>(jstar) / static_cast<double>(n);
  }
  /*! 𝔯_k = 1 - 2^{-Lk}. */
  double radius(int k) const { return block_radius(k, L()); }
};

namespace detail {

/*! s_j² = Σ a_n² over the dyadic block [2^j, 2^{j+1}); integer-exact up to
 *  j = 61, real-bound summation beyond (boundary-term rounding < 1e-15 rel). */
inline double dyadic_s_sq(const CoefficientModel& model, int j) {
  if (j <= 61)
    return weighted_coeff_sum_range(model, 0, 1ull << j, 1ull << (j + 1)).as_double();
  return weighted_coeff_sum(model, 0, std::exp2(static_cast<double>(j)),
                            std::exp2(static_cast<double>(j) + 1.0) - 1.0)
      .as_double();
}

inline ScaleTable fill_scales(const CoefficientModel& model, const ScaleConstants& constants,
                              int k_max) {
  if (constants.delta <= 0.0 || constants.C_H <= 0.0)
    throw std::invalid_argument("build_scales: delta and C_H must be positive");
  const int L = model.block_exponent;
  ScaleTable t{model, constants, k_max, {}, {}, {}, {}, {}};
  const int jmax = L * k_max - 1;
  t.dyadic2.resize(static_cast<std::size_t>(jmax) + 1);
  for (int j = 0; j <= jmax; ++j) t.dyadic2[static_cast<std::size_t>(j)] = dyadic_s_sq(model, j);
  t.lblock2.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  t.lblock.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  t.prefix1.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  t.prefix2.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int k = 1; k <= k_max; ++k) {
    KahanSum acc;
    for (int j = L * (k - 1); j <= L * k - 1; ++j) acc.add(t.dyadic2[static_cast<std::size_t>(j)]);
    const double fs2 = acc.value();
    t.lblock2[static_cast<std::size_t>(k)] = fs2;
    t.lblock[static_cast<std::size_t>(k)] = std::sqrt(fs2);
    t.prefix1[static_cast<std::size_t>(k)] = t.prefix1[static_cast<std::size_t>(k) - 1] + t.lblock[static_cast<std::size_t>(k)];
    t.prefix2[static_cast<std::size_t>(k)] = t.prefix2[static_cast<std::size_t>(k) - 1] + fs2;
  }
  return t;
}

}  // namespace detail

/*! Builds the exact scale table for blocks 1..k_max (k_max = 0 selects the
 *  largest block count whose frequencies fit below n_max). */
inline ScaleTable build_scales(const CoefficientModel& model, const ScaleConstants& constants = {},
                               int k_max = 0) {
  model.validate();
  const int L = model.block_exponent;
  int fit = 0;
  while (fit + 1 <= 62 / L && (block_hi(fit + 1, L) - 1) <= model.n_max) ++fit;
  if (k_max == 0) k_max = fit;
  if (k_max <= 0 || k_max > fit) throw std::out_of_range("build_scales: n_max too small for block count");
  return detail::fill_scales(model, constants, k_max);
}

/*! Budget-only scale table ignoring the sampling truncation: block frequencies
 *  may exceed any addressable index (k_max·L up to 1020 dyadic levels, the
 *  double exponent range), and the s_j² values are the same analytic sums,
 *  evaluated in log space. Drift, variance, and Γ queries are valid; do not
 *  pair with sampled evaluation. */
inline ScaleTable build_scales_deep(const CoefficientModel& model, const ScaleConstants& constants,
                                    int k_max) {
  model.validate();
  if (k_max < 1 || model.block_exponent * k_max > 1020)
    throw std::out_of_range("build_scales_deep: k_max outside supported depth");
  return detail::fill_scales(model, constants, k_max);
}

// ── regime classification ─────────────────────────────────────────────

enum class Regime { BoundedRegime, UnboundedRegime, DivergentVariance };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::BoundedRegime: return "BoundedRegime";
    case Regime::UnboundedRegime: return "UnboundedRegime";
    case Regime::DivergentVariance: return "DivergentVariance";
  }
  return "?";
}

/*! Outcome of the numerical divergence heuristic. q_* are ratios of
 *  consecutive dyadic-window increments of the partial sums (→ 2^{1-2β} for
 *  the squares, 2^{1-β} for the linear sum); ≥ ~1 reads as divergence. */
struct RegimeReport {
  Regime regime = Regime::BoundedRegime;
  double q_squares = 0.0;
  double q_linear = 0.0;
  bool heuristic = true;
  bool confident = true;
  int j_probe = 0;
};

inline RegimeReport classify(const CoefficientModel& model, int window_exponent = 9) {
  model.validate();
  RegimeReport rep;
  const int imax = window_exponent;  // blocks probed up to j = 2^imax
  rep.j_probe = 1 << imax;
  // s_j per dyadic block, deep blocks via the Euler-Maclaurin engine.
  std::vector<double> s_sq(static_cast<std::size_t>(rep.j_probe) + 1, 0.0);
  for (int j = 1; j <= rep.j_probe; ++j) {
    const double lo = std::exp2(static_cast<double>(j));
    const double hi = std::exp2(static_cast<double>(j) + 1.0) - 1.0;
    s_sq[static_cast<std::size_t>(j)] = weighted_coeff_sum(model, 0, lo, hi).as_double();
  }
  auto window_ratio = [&](bool squares) {
    double prev = 0.0, ratio = 0.0;
    for (int i = 3; i <= imax; ++i) {
      KahanSum inc;
      for (int j = (1 << (i - 1)) + 1; j <= (1 << i); ++j) {
        const double v = s_sq[static_cast<std::size_t>(j)];
        inc.add(squares ? v : std::sqrt(v));
      }
      const double cur = inc.value();
      if (prev > 0.0) ratio = cur / prev;
      prev = cur;
    }
    return ratio;
  };
  rep.q_squares = window_ratio(true);
  rep.q_linear = window_ratio(false);

  const double kDiv = 0.90;  // window ratio at/above reads as divergence
  if (rep.q_squares >= kDiv)
    rep.regime = Regime::DivergentVariance;
  else if (rep.q_linear >= kDiv)
    rep.regime = Regime::UnboundedRegime;
  else
    rep.regime = Regime::BoundedRegime;
  const auto borderline = [&](double q) { return q > 0.82 && q < 0.97; };
  rep.confident = !(borderline(rep.q_squares) || borderline(rep.q_linear));
  return rep;
}

/*! Critical-regular flag: α = 1/2, β ∈ [1/2,1], and Σ_m m^{-2β} ω²(m)
 *  converging by the same dyadic-window heuristic. */
inline bool critical_regular(const CoefficientModel& model) {
  if (std::abs(model.alpha - 0.5) > 1e-12) return false;
  if (model.beta < 0.5 - 1e-12 || model.beta > 1.0 + 1e-12) return false;
  double prev = 0.0, ratio = 0.0;
  for (int i = 10; i <= 20; ++i) {
    KahanSum inc;
    for (std::uint64_t m = (1ull << (i - 1)) + 1; m <= (1ull << i); ++m) {
      const double om = model.omega(static_cast<double>(m));
      inc.add(std::pow(static_cast<double>(m), -2.0 * model.beta) * om * om);
    }
    if (prev > 0.0) ratio = inc.value() / prev;
    prev = inc.value();
  }
  return ratio < 0.90;
}

}  // namespace gafcover
