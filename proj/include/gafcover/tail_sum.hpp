#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "model.hpp"
#include "numeric.hpp"

namespace gafcover {

// Sums of n^p * a_n^2 * w(n) over integer ranges, where w is a radial weight
// r^{2n}. Short ranges are summed term by term; long ranges switch to
// Euler-Maclaurin with a Gauss-Kronrod integral in log-frequency space, so
// ranges reaching 2^1000+ and radii 1 - 2^{-E} with huge E stay computable.
// Accumulation is in long double because the p = 2 sums can exceed the double
// exponent range; callers needing ratios work through log_abs().

// ── radial weight ─────────────────────────────────────────────────────

struct RadialWeight {
  enum class Kind { None, PlainRadius, DyadicDepth };
  Kind kind = Kind::None;
  double r = 1.0;      // PlainRadius
  double depth = 0.0;  // DyadicDepth: r = 1 - 2^{-depth}

  static RadialWeight none() { return {}; }
  static RadialWeight radius(double r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("radial weight needs 0 < r <= 1");
    if (r == 1.0) return {};
    return {Kind::PlainRadius, r, 0.0};
  }
  /*! Weight r^{2n} with r = 1 - 2^{-depth}; depth may exceed the double
   *  exponent range, the weight is handled in log2 space. */
  static RadialWeight dyadic_depth(double depth) {
    if (!(depth > 0.0)) throw std::invalid_argument("dyadic depth must be positive");
    return {Kind::DyadicDepth, 0.0, depth};
  }

  /*! -2^{depth} * log(1 - 2^{-depth}) = 1 + 2^{-depth-1} + ...; the curvature
   *  factor turning the dyadic depth into an exact exponential rate. */
  double dyadic_rate_factor() const {
    if (depth <= 500.0) {
      const double e2 = std::exp2(-depth);
      return -std::log1p(-e2) / e2;
    }
    return 1.0;
  }

  /*! log w(x) at x = e^t (t-space; safe for any magnitude). */
  double log_weight_t(double t) const {
    switch (kind) {
      case Kind::None:
        return 0.0;
      case Kind::PlainRadius: {
        const double lam = -std::log(r);  // > 0
        const double q = t + std::log(2.0 * lam);
        if (q > 700.0) return -std::numeric_limits<double>::infinity();
        return -std::exp(q);
      }
      case Kind::DyadicDepth: {
        // log w = 2 x log(1 - 2^{-E}) = -exp(t - (E-1) log 2) * c_E
        const double xi = t - (depth - 1.0) * std::numbers::ln2;
        if (xi > 700.0) return -std::numeric_limits<double>::infinity();
        return -std::exp(xi) * dyadic_rate_factor();
      }
    }
    return 0.0;
  }

  /*! log w(x) at x = e^t in long double, so exponent-space jitter stays below
   *  panel tolerances even when t reaches 2^14 and beyond. */
  long double log_weight_t_ld(double t) const {
    switch (kind) {
      case Kind::None:
        return 0.0L;
      case Kind::PlainRadius: {
        const long double lam = -logl(static_cast<long double>(r));
        const long double q = static_cast<long double>(t) + logl(2.0L * lam);
        if (q > 11300.0L) return -std::numeric_limits<long double>::infinity();
        return -expl(q);
      }
      case Kind::DyadicDepth: {
        const long double xi = static_cast<long double>(t) -
                               (static_cast<long double>(depth) - 1.0L) * 0.693147180559945309417L;
        if (xi > 11300.0L) return -std::numeric_limits<long double>::infinity();
        return -expl(xi) * static_cast<long double>(dyadic_rate_factor());
      }
    }
    return 0.0L;
  }

  /*! d/dx log w (constant in x). Underflows to 0 at extreme depth, where the
   *  boundary-derivative correction is negligible anyway. */
  double dlog_dx() const {
    switch (kind) {
      case Kind::None:
        return 0.0;
      case Kind::PlainRadius:
        return 2.0 * std::log(r);
      case Kind::DyadicDepth: {
        if (depth > 1000.0) return 0.0;
        return -std::exp2(1.0 - depth) * dyadic_rate_factor();
      }
    }
    return 0.0;
  }

  /*! t beyond which w < exp(-128): terms there are negligible relative to any
   *  retained part of the sum. Infinity when there is no radial damping. */
  double cutoff_t() const {
    switch (kind) {
      case Kind::None:
        return std::numeric_limits<double>::infinity();
      case Kind::PlainRadius:
        return std::log(64.0) - std::log(-std::log(r));
      case Kind::DyadicDepth:
        return std::log(128.0) + (depth - 1.0) * std::numbers::ln2;
    }
    return std::numeric_limits<double>::infinity();
  }
};

struct TailSumResult {
  long double value = 0.0L;
  double rel_err = 0.0;
  /*! The stored value is sum * exp(-log_scale); nonzero only when the sum
   *  exceeds the long double range (deep radial weights with p >= 1). */
  double log_scale = 0.0;

  double as_double() const {
    return static_cast<double>(value * expl(static_cast<long double>(log_scale)));
  }
  double log_abs() const {
    return value > 0.0L
               ? static_cast<double>(std::log(static_cast<long double>(value))) + log_scale
               : -std::numeric_limits<double>::infinity();
  }
};

namespace detail {

/*! log(n+1) at n = e^t, valid for every t >= 0. */
inline double log_np1_t(double t) { return t + std::log1p(std::exp(-t)); }

/*! log of the t-space integrand f(e^t) e^t, assembled in long double with the
 *  linear coefficient (p - 2 alpha + 1) formed first.  The grouping matters:
 *  computing log f and adding t afterwards cancels two numbers of size t and
 *  injects ULP(t)-sized jitter into the exponent, which past t ~ 2^13 exceeds
 *  the panel tolerance and drives the refinement into the ground. */
inline long double log_g_t(const CoefficientModel& model, int p, const RadialWeight& w, double t) {
  const double lg = log_np1_t(t);
  const long double lw = w.log_weight_t_ld(t);
  if (lw == -std::numeric_limits<long double>::infinity()) return lw;
  const long double lin = static_cast<long double>(p) - 2.0L * static_cast<long double>(model.alpha) + 1.0L;
  return lin * static_cast<long double>(t) +
         static_cast<long double>(-2.0 * model.beta * std::log(lg) +
                                  2.0 * std::log(model.omega(lg))) +
         lw;
}

/*! Integrand of the t-space integral scaled by exp(-shift). */
inline long double integrand_t(const CoefficientModel& model, int p, const RadialWeight& w,
                               double t, long double shift) {
  const long double lg = log_g_t(model, p, w, t);
  if (lg == -std::numeric_limits<long double>::infinity()) return 0.0L;
  return expl(lg - shift);
}

// Gauss-Kronrod 15/7 nodes on [-1,1] (positive half; symmetric).
inline constexpr double kGK15Nodes[8] = {
    0.000000000000000000, 0.207784955007898468, 0.405845151377397167, 0.586087235467691130,
    0.741531185599394440, 0.864864423359769073, 0.949107912342758525, 0.991455371120812639};
inline constexpr double kGK15Weights[8] = {
    0.209482141084727828, 0.204432940075298892, 0.190350578064785410, 0.169004726639267903,
    0.140653259715525919, 0.104790010322250184, 0.063092092629978554, 0.022935322010529225};
inline constexpr double kG7Weights[4] = {
    0.417959183673469388, 0.381830050505118945, 0.279705391489276668, 0.129484966168869693};

/*! One GK15 panel on [a,b] of exp(log g - shift); g7 gets the embedded
 *  Gauss-7 value. */
inline long double gk15_panel(const CoefficientModel& model, int p, const RadialWeight& w,
                              double a, double b, long double shift, long double* g7) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  long double k15 = 0.0L, g = 0.0L;
  for (int i = 0; i < 8; ++i) {
    const double off = half * kGK15Nodes[i];
    const long double lo = integrand_t(model, p, w, mid - off, shift);
    const long double hi = integrand_t(model, p, w, mid + off, shift);
    const long double pair = (i == 0) ? lo : lo + hi;
    k15 += kGK15Weights[i] * pair;
    if (i % 2 == 0) g += kG7Weights[i / 2] * pair;
  }
  *g7 = g * half;
  return k15 * half;
}

/*! Adaptive integral of exp(log g - shift) over [t_lo, t_hi], relative
 *  tolerance.  Deep radial weights give domains spanning 10^4+ units of t, so
 *  panels accept against the accumulated total as well: a panel carrying
 *  < 1e-17 of the mass seen so far never deserves further bisection. */
inline long double integrate_t(const CoefficientModel& model, int p, const RadialWeight& w,
                               double t_lo, double t_hi, long double shift,
                               double* rel_err_out) {
  long double total = 0.0L, err = 0.0L;
  const double step0 = 1.5;
  double a = t_lo;
  while (a < t_hi) {
    double b = std::min(a + step0, t_hi);
    // Manual stack of pending panels for local refinement.
    struct Panel { double a, b; int depth; };
    Panel stack[64];
    int top = 0;
    stack[top++] = {a, b, 0};
    while (top > 0) {
      const Panel panel = stack[--top];
      long double g7 = 0.0L;
      const long double k15 = gk15_panel(model, p, w, panel.a, panel.b, shift, &g7);
      const long double gap = std::abs(k15 - g7);
      if (gap > 1e-13L * std::abs(k15) && gap > 1e-17L * std::abs(total) && gap > 1e-32L &&
          panel.depth < 30 && top < 60) {
        const double m = 0.5 * (panel.a + panel.b);
        stack[top++] = {panel.a, m, panel.depth + 1};
        stack[top++] = {m, panel.b, panel.depth + 1};
      } else {
        total += k15;
        err += gap;
      }
    }
    a = b;
  }
  if (rel_err_out) *rel_err_out = total > 0.0L ? static_cast<double>(err / total) : 0.0;
  return total;
}

}  // namespace detail

/*! Sum of n^p * a_n^2 * w(n) over integers n in [lo, hi] (inclusive; hi may be
 *  +inf when w decays). Bounds are real-valued so dyadic bounds beyond 2^63
 *  remain expressible; they are exact whenever representable. */
inline TailSumResult weighted_coeff_sum(const CoefficientModel& model, int p, double lo, double hi,
                                        const RadialWeight& w = RadialWeight::none()) {
  if (p < 0 || p > 2) throw std::invalid_argument("weighted_coeff_sum: p must be 0, 1, or 2");
  if (lo < 1.0) lo = 1.0;
  TailSumResult res;
  // Upper limit in t-space; beyond the radial cutoff w < exp(-128).
  const double t_cut = w.cutoff_t();
  const double t_hi = std::min(std::isinf(hi) ? t_cut : std::log(hi), t_cut);
  if (std::isinf(t_hi))
    throw std::invalid_argument("weighted_coeff_sum: infinite range needs radial damping");
  if (t_hi < std::log(lo)) return res;

  const double kDirectCount = 4.0e6;  // term-by-term below this many terms
  const double kEmLow = 65536.0;      // Euler-Maclaurin boundary floor

  // Linear-space effective bound, used only to decide whether the whole range
  // can be summed term by term.
  const double U = (t_hi <= 36.0) ? std::min(hi, std::floor(std::exp(t_hi)) + 1.0) : hi;
  const bool full_direct = U <= 9.0e15 && U - lo + 1.0 <= kDirectCount;
  const double direct_hi = full_direct ? U : std::min(U, std::max(lo - 1.0, kEmLow - 1.0));
  // Term-by-term only where doubles index integers exactly; at deeper starts
  // the whole range goes through the integral representation.
  const bool any_direct = direct_hi >= lo && direct_hi <= 9.0e15;

  if (any_direct) {
    KahanSum acc;
    const std::uint64_t a = static_cast<std::uint64_t>(lo);
    const std::uint64_t b = static_cast<std::uint64_t>(direct_hi);
    for (std::uint64_t n = a; n <= b; ++n) {
      const double x = static_cast<double>(n);
      double term = model.coeff_sq(x);
      for (int q = 0; q < p; ++q) term *= x;
      const double lw = w.log_weight_t(std::log(x));
      if (lw != 0.0) term *= std::exp(lw);
      acc.add(term);
    }
    res.value += static_cast<long double>(acc.value());
  }

  if (!full_direct) {
    const double A = any_direct ? direct_hi + 1.0 : lo;  // integer boundary of the EM part
    const double t_lo = std::log(A);
    if (t_hi > t_lo) {
      // Scale shift: the peak of the t-space log-integrand, located by a
      // coarse scan (the rise side is Lipschitz with slope <= p + 1, so the
      // scanned maximum is within a few hundred nats of the true peak - well
      // inside the long double exponent headroom).  Engaged only when the
      // unscaled sum would leave the double range, so moderate sums keep
      // log_scale = 0 and exact legacy values.
      long double peak = -std::numeric_limits<long double>::infinity();
      for (int i = 0; i <= 256; ++i) {
        const double t = t_lo + (t_hi - t_lo) * (static_cast<double>(i) / 256.0);
        peak = std::max(peak, detail::log_g_t(model, p, w, t));
      }
      const bool scaled = peak > 600.0L;
      const long double shift = scaled ? peak : 0.0L;
      if (scaled) {
        res.value *= expl(-shift);  // fold in the direct part (underflows harmlessly)
        res.log_scale = static_cast<double>(shift);
      }
      double int_rel = 0.0;
      res.value += detail::integrate_t(model, p, w, t_lo, t_hi, shift, &int_rel);
      // Boundary corrections: +(f(A)+f(B))/2 + (f'(B)-f'(A))/12, all in the
      // shifted frame (f here is per unit x, hence log g - t).
      const long double lfA = detail::log_g_t(model, p, w, t_lo) - static_cast<long double>(t_lo);
      const long double fA = std::isinf(static_cast<double>(lfA)) ? 0.0L : expl(lfA - shift);
      const long double lfB = detail::log_g_t(model, p, w, t_hi) - static_cast<long double>(t_hi);
      const long double fB = std::isinf(static_cast<double>(lfB)) ? 0.0L : expl(lfB - shift);
      res.value += 0.5L * (fA + fB);
      auto dlog_f = [&](double t) -> double {
        if (t > 600.0) return 0.0;
        const double x = std::exp(t);
        return static_cast<double>(p) / x + model.dlog_coeff_sq(x) + w.dlog_dx();
      };
      const long double dfA = fA * static_cast<long double>(dlog_f(t_lo));
      const long double dfB = fB * static_cast<long double>(dlog_f(t_hi));
      res.value += (dfB - dfA) / 12.0L;
      // Remainder scale: next EM term ~ f'''(A)/720 ~ f(A)/A^3.
      const long double rem = fA / static_cast<long double>(A * A * A * 720.0);
      res.rel_err = int_rel +
                    (res.value > 0.0L ? static_cast<double>(rem / res.value) : 0.0);
    }
  }
  return res;
}

/*! Convenience overload for integer half-open ranges [lo, hi). */
inline TailSumResult weighted_coeff_sum_range(const CoefficientModel& model, int p,
                                              std::uint64_t lo, std::uint64_t hi,
                                              const RadialWeight& w = RadialWeight::none()) {
  if (hi <= lo) return {};
  return weighted_coeff_sum(model, p, static_cast<double>(lo), static_cast<double>(hi) - 1.0, w);
}

}  // namespace gafcover
