#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gaf.hpp"
#include "model.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "tail_sum.hpp"

namespace gafcover {

// ── block phase correlation ──────────────────────────────────────────

/*! ρ_k(θ) = E X_k(φ) conj(X_k(φ+θ)) / 𝔰_k² for a rotation-invariant
 *  coefficient law: the normalized correlation of block k's field across an
 *  angular lag θ, equal to conj(Σ_block a_n² e(nθ)) / 𝔰_k². */
inline cplx rho_k(const CoefficientModel& model, int k, double theta) {
  model.validate();
  const int L = model.block_exponent;
  const std::uint64_t lo = block_lo(k, L);
  const std::uint64_t hi = block_hi(k, L);
  if (hi - 1 > model.n_max) throw std::out_of_range("rho_k: block beyond n_max");
  KahanCSum num;
  KahanSum den;
  for (std::uint64_t n = lo; n < hi; ++n) {
    const double a2 = model.coeff_sq(static_cast<double>(n));
    num.add(a2 * unit_phase_mul(n, theta));
    den.add(a2);
  }
  const double d = den.value();
  if (!(d > 0.0)) throw std::domain_error("rho_k: degenerate block variance");
  return std::conj(num.value()) / d;
}

// ── lag-averaged second moment of ρ_k ────────────────────────────────

struct SecondMomentResult {
  double value = 0.0;      // E |ρ_k(Θ)|², Θ uniform on [-τ, τ], τ = 2^{-L(k-1)}
  double std_error = 0.0;  // 0 in exact mode
  bool exact = true;
};

namespace detail {

/*! Self-normalized ratio mean Σ A_i / Σ B_i with a delta-method standard
 *  error; A_i = w_i f_i, B_i = w_i for importance weights w_i. */
struct RatioAccumulator {
  KahanSum sa, sb, saa, sbb, sab;
  std::uint64_t n = 0;
  void add(double a, double b) {
    sa.add(a);
    sb.add(b);
    saa.add(a * a);
    sbb.add(b * b);
    sab.add(a * b);
    ++n;
  }
  double mean() const {
    if (sb.value() == 0.0) throw std::domain_error("ratio estimator: zero weight mass");
    return sa.value() / sb.value();
  }
  double std_error() const {
    if (n < 2) return std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    const double ma = sa.value() / nn, mb = sb.value() / nn, r = ma / mb;
    // Var(A - r B) / (n * mb²)
    const double vaa = saa.value() / nn - ma * ma;
    const double vbb = sbb.value() / nn - mb * mb;
    const double vab = sab.value() / nn - ma * mb;
    const double v = vaa - 2.0 * r * vab + r * r * vbb;
    return std::sqrt(std::max(0.0, v) / nn) / std::abs(mb);
  }
};

}  // namespace detail

/*! E |ρ_k(Θ)|² over Θ ~ U[-τ, τ], τ = 2^{-L(k-1)}.  Exact value via the pair
 *  sum Σ a²_{n1} a²_{n2} sinc((n1-n2)τ) / 𝔰_k⁴ whenever the block has at most
 *  2^14 frequencies; beyond that, a self-normalized importance sample over
 *  pairs drawn from the within-block mass a_n²/𝔰_k².  `L` overrides the
 *  model's block exponent (0 keeps it), so block-size sweeps do not need
 *  model copies. */
inline SecondMomentResult rho_second_moment(const CoefficientModel& model, int k, int L = 0,
                                            std::uint64_t draws = 1u << 18,
                                            std::uint64_t seed = 7) {
  model.validate();
  if (L == 0) L = model.block_exponent;
  const std::uint64_t lo = block_lo(k, L);
  const std::uint64_t hi = block_hi(k, L);
  if (hi - 1 > model.n_max) throw std::out_of_range("rho_second_moment: block beyond n_max");
  const double tau = std::ldexp(1.0, -L * (k - 1));
  const std::uint64_t B = hi - lo;
  SecondMomentResult out;
  if (B <= (1u << 14)) {
    std::vector<double> a2(B);
    for (std::uint64_t n = lo; n < hi; ++n) a2[n - lo] = model.coeff_sq(static_cast<double>(n));
    KahanSum num, den;
    for (std::uint64_t i = 0; i < B; ++i) den.add(a2[i]);
    for (std::uint64_t i = 0; i < B; ++i) {
      KahanSum row;
      for (std::uint64_t j = 0; j < B; ++j)
        row.add(a2[j] * sinc((static_cast<double>(i) - static_cast<double>(j)) * tau));
      num.add(a2[i] * row.value());
    }
    const double d = den.value();
    if (!(d > 0.0)) throw std::domain_error("rho_second_moment: degenerate block variance");
    out.value = num.value() / (d * d);
    out.exact = true;
    return out;
  }
  // Importance pairs: log-uniform integer proposal q(n) ∝ log(1+1/n), weight
  // a_n²/q(n); the self-normalized mean of sinc((n1-n2)τ) under a_n²-mass.
  CounterRng rng(seed, 0xb10c);
  const double span = std::log(static_cast<double>(hi) / static_cast<double>(lo));
  auto draw = [&](double& w) {
    const double x = static_cast<double>(lo) * std::exp(rng.uniform() * span);
    std::uint64_t n = static_cast<std::uint64_t>(x);
    n = std::min(hi - 1, std::max(lo, n));
    w = model.coeff_sq(static_cast<double>(n)) / std::log1p(1.0 / static_cast<double>(n));
    return n;
  };
  detail::RatioAccumulator acc;
  for (std::uint64_t i = 0; i < draws; ++i) {
    double w1, w2;
    const std::uint64_t n1 = draw(w1);
    const std::uint64_t n2 = draw(w2);
    const double f = sinc((static_cast<double>(n1) - static_cast<double>(n2)) * tau);
    acc.add(w1 * w2 * f, w1 * w2);
  }
  out.value = acc.mean();
  out.std_error = acc.std_error();
  out.exact = false;
  return out;
}

/*! Monte Carlo oracle for the same quantity: draws Θ ~ U[-τ, τ] and averages
 *  the exactly computed |ρ_k(Θ)|².  Kept independent of the sinc pair sum so
 *  the two can cross-check each other. */
inline SecondMomentResult rho_second_moment_mc(const CoefficientModel& model, int k, int L,
                                               std::uint64_t draws, std::uint64_t seed) {
  model.validate();
  if (L == 0) L = model.block_exponent;
  CoefficientModel m = model;
  m.block_exponent = L;
  const double tau = std::ldexp(1.0, -L * (k - 1));
  CounterRng rng(seed, 0x0728);
  RunningStat st;
  for (std::uint64_t i = 0; i < draws; ++i) {
    const double theta = rng.uniform(-tau, tau);
    const double v = std::abs(rho_k(m, k, theta));
    st.add(v * v);
  }
  SecondMomentResult out;
  out.value = st.mean;
  out.std_error = st.std_error();
  out.exact = false;
  return out;
}

// ── phase-split standard deviations ──────────────────────────────────

/*! Exact standard deviations of the three phase fields of the disk-coverage
 *  split, all measured at the coverage radius r_c = 1 - 2^{-L·M}:
 *    homing   [1, 2^{L·k_h}),  spawning [2^{L·k_h}, 2^{L·k_s}),
 *    coverage [2^{L·k_s}, ∞),
 *  with k_s = k_h + ceil(4((Λ+R)/L) log2 k_h) and M = k_s² unless overridden.
 *  Σ_{c'} is the coverage field's derivative deviation at r_c and ρ_{c,c'}
 *  the modulus of its correlation with the field value; both can exceed the
 *  double range, so natural-log fields are authoritative. */
struct PhaseSigmaReport {
  int k_h = 0, k_s = 0;
  long long M = 0;      // dyadic block depth of r_c (M = k_s² unless capped)
  long long depth = 0;  // L·M
  bool M_capped = false;
  double log_Sigma_h2 = 0.0, log_Sigma_s2 = 0.0, log_Sigma_c2 = 0.0, log_Sigma_cprime2 = 0.0;
  double Sigma_h = 0.0, Sigma_s = 0.0, Sigma_c = 0.0, Sigma_cprime = 0.0;
  double rho_ccprime = 0.0;
  double predicted_Sigma_c2 = 0.0;          // k_h^{1-2β} ω²(k_h)
  double predicted_log_Sigma_cprime2 = 0.0; // 2 L M ln2 - 2β ln M + 2 ln ω(M)
  double predicted_rho_ccprime = 0.0;       // k_h^{-β-1/2+0.1}
  double rel_err = 0.0;
};

inline PhaseSigmaReport sigma_parts(const CoefficientModel& model, int k_h, double Lambda,
                                    double R, long long M_override = 0) {
  model.validate();
  if (k_h < 2) throw std::invalid_argument("sigma_parts: k_h must be >= 2");
  if (!(Lambda > 0.0) || !(R > 0.0))
    throw std::invalid_argument("sigma_parts: Lambda and R must be positive");
  const int L = model.block_exponent;
  PhaseSigmaReport rep;
  rep.k_h = k_h;
  rep.k_s = k_h + static_cast<int>(std::ceil(4.0 * ((Lambda + R) / L) *
                                             std::log2(static_cast<double>(k_h))));
  const long long M_true = static_cast<long long>(rep.k_s) * rep.k_s;
  rep.M = (M_override > 0) ? M_override : M_true;
  rep.M_capped = rep.M != M_true;
  if (rep.M < rep.k_s)
    throw std::invalid_argument("sigma_parts: M below k_s leaves the coverage field invisible");
  rep.depth = static_cast<long long>(L) * rep.M;
  const RadialWeight w = RadialWeight::dyadic_depth(static_cast<double>(rep.depth));
  const double e_h = std::exp2(static_cast<double>(L) * k_h);
  const double e_s = std::exp2(static_cast<double>(L) * rep.k_s);
  const double inf = std::numeric_limits<double>::infinity();

  const TailSumResult h2 = weighted_coeff_sum(model, 0, 1.0, e_h - 1.0, w);
  const TailSumResult s2 = weighted_coeff_sum(model, 0, e_h, e_s - 1.0, w);
  const TailSumResult c2 = weighted_coeff_sum(model, 0, e_s, inf, w);
  const TailSumResult d2 = weighted_coeff_sum(model, 2, e_s, inf, w);  // Σ n² a² r^{2n}
  const TailSumResult x1 = weighted_coeff_sum(model, 1, e_s, inf, w);  // Σ n a² r^{2n}
  rep.rel_err = std::max({h2.rel_err, s2.rel_err, c2.rel_err, d2.rel_err, x1.rel_err});

  // log r_c = log(1 - 2^{-depth}); 0 once the depth exhausts the double range.
  const double lrc = (rep.depth < 1074) ? std::log1p(-std::exp2(-static_cast<double>(rep.depth)))
                                        : 0.0;
  rep.log_Sigma_h2 = h2.log_abs();
  rep.log_Sigma_s2 = s2.log_abs();
  rep.log_Sigma_c2 = c2.log_abs();
  rep.log_Sigma_cprime2 = d2.log_abs() - 2.0 * lrc;  // E|F'|² = Σ n² a² r^{2(n-1)}
  rep.Sigma_h = std::exp(0.5 * rep.log_Sigma_h2);
  rep.Sigma_s = std::exp(0.5 * rep.log_Sigma_s2);
  rep.Sigma_c = std::exp(0.5 * rep.log_Sigma_c2);
  rep.Sigma_cprime = std::exp(0.5 * rep.log_Sigma_cprime2);
  // |E F_c conj(F_c')| = Σ n a² r^{2n-1}; the quotient stays in range.
  const double log_cov = x1.log_abs() - lrc;
  rep.rho_ccprime = std::exp(log_cov - 0.5 * rep.log_Sigma_c2 - 0.5 * rep.log_Sigma_cprime2);

  const double kh = static_cast<double>(k_h);
  const double om_kh = model.omega(kh);
  rep.predicted_Sigma_c2 = std::pow(kh, 1.0 - 2.0 * model.beta) * om_kh * om_kh;
  const double Md = static_cast<double>(rep.M);
  rep.predicted_log_Sigma_cprime2 = 2.0 * std::log(2.0) * static_cast<double>(rep.depth) -
                                    2.0 * model.beta * std::log(Md) + 2.0 * std::log(model.omega(Md));
  rep.predicted_rho_ccprime = std::pow(kh, -model.beta - 0.5 + 0.1);
  return rep;
}

// ── two-point correlation of the coverage field ──────────────────────

/*! Normalized mean square of the coverage field's two-point angle correlation:
 *  E sinc²((n1-n2) 2^{-L k_h}) under n1, n2 i.i.d. from the coefficient-mass
 *  distribution p(n) ∝ a_n² r_c^{2n} on [2^{L k_s}, ∞), r_c = 1 - 2^{-L M}.
 *  This equals Σ_c^{-4} ΣΣ a²a² r^{2(n1+n2)} sinc²((n1-n2) 2^{-L k_h}), the
 *  pair average over two independent probe angles drawn from a 2^{-L k_h}
 *  half-width arc.  Exact double sum when the radial weight confines the mass
 *  to at most 2^14 frequencies; otherwise octave-binned importance sampling
 *  (requires L·M ≤ 48 so indices stay exact in doubles). */
struct TwoPointResult {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = true;
  double predicted_order = 0.0;  // 2^{L(k_h-k_s)} / k_h²
};

inline TwoPointResult two_point_correlation_msq(const CoefficientModel& model, int k_h, int k_s,
                                                long long M, std::uint64_t draws = 200000,
                                                std::uint64_t seed = 11,
                                                bool force_sampler = false) {
  model.validate();
  if (k_h < 1 || k_s < k_h) throw std::invalid_argument("two_point: needs 1 <= k_h <= k_s");
  if (M < k_s) throw std::invalid_argument("two_point: M must be >= k_s");
  const int L = model.block_exponent;
  const long long depth = static_cast<long long>(L) * M;
  const double tau = std::exp2(-static_cast<double>(L) * k_h);
  const double lo = std::exp2(static_cast<double>(L) * k_s);
  const double inf = std::numeric_limits<double>::infinity();
  const RadialWeight w = RadialWeight::dyadic_depth(static_cast<double>(depth));

  TwoPointResult out;
  out.predicted_order =
      std::exp2(static_cast<double>(L) * (k_h - k_s)) / (static_cast<double>(k_h) * k_h);

  const TailSumResult total = weighted_coeff_sum(model, 0, lo, inf, w);
  if (!(total.value > 0.0L)) throw std::domain_error("two_point: degenerate coverage mass");

  // Exact pair sum if all but 1e-9 of the mass sits in [lo, lo + 2^14);
  // the span shrinks to the smallest power of two that still holds the mass.
  double span_exact = 0.0;
  if (!force_sampler && lo + 16384.0 <= 9.0e15) {
    for (double span = 1024.0; span <= 16384.0; span *= 2.0) {
      const TailSumResult tail = weighted_coeff_sum(model, 0, lo + span, inf, w);
      if (tail.as_double() <= 1e-9 * total.as_double()) {
        span_exact = span;
        break;
      }
    }
  }
  if (span_exact > 0.0) {
    const std::uint64_t a = static_cast<std::uint64_t>(lo);
    const std::uint64_t b = a + static_cast<std::uint64_t>(span_exact);
    std::vector<double> mass;
    mass.reserve(static_cast<std::size_t>(span_exact));
    for (std::uint64_t n = a; n < b; ++n) {
      const double x = static_cast<double>(n);
      mass.push_back(model.coeff_sq(x) * std::exp(w.log_weight_t(std::log(x))));
    }
    KahanSum num, den;
    for (double mi : mass) den.add(mi);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      KahanSum row;
      for (std::size_t j = 0; j < mass.size(); ++j) {
        const double s = sinc((static_cast<double>(i) - static_cast<double>(j)) * tau);
        row.add(mass[j] * s * s);
      }
      num.add(mass[i] * row.value());
    }
    out.value = num.value() / (den.value() * den.value());
    out.exact = true;
    return out;
  }

  if (depth > 48)
    throw std::range_error("two_point: sampler needs L*M <= 48 to keep indices exact");
  // Integer bins of roughly 1/8 octave with engine-computed masses; within a
  // bin the proposal is uniform over the integers, so importance weights are
  // exactly consistent with the discrete target mass a_n² r_c^{2n}.
  struct Bin {
    std::uint64_t lo, hi;  // half-open
    double mass, cum;
  };
  std::vector<Bin> bins;
  const double step = std::pow(2.0, 0.125);
  std::uint64_t blo = static_cast<std::uint64_t>(lo);
  double cum = 0.0;
  const double keep = (1.0 - 1e-9) * total.as_double();
  while (cum < keep) {
    std::uint64_t bhi = std::max(blo + 1, static_cast<std::uint64_t>(static_cast<double>(blo) * step));
    const double m = weighted_coeff_sum_range(model, 0, blo, bhi, w).as_double();
    cum += m;
    bins.push_back({blo, bhi, m, cum});
    blo = bhi;
    if (bins.size() > 4000) throw std::logic_error("two_point: bin scan failed to converge");
  }
  CounterRng rng(seed, 0x2b01);
  auto draw = [&](double& weight) {
    const double u = rng.uniform() * cum;
    std::size_t a = 0, b = bins.size() - 1;
    while (a < b) {
      const std::size_t mid = (a + b) / 2;
      if (bins[mid].cum < u) a = mid + 1; else b = mid;
    }
    const Bin& bn = bins[a];
    const double len = static_cast<double>(bn.hi - bn.lo);
    std::uint64_t n = bn.lo + static_cast<std::uint64_t>(rng.uniform() * len);
    n = std::min(n, bn.hi - 1);
    const double x = static_cast<double>(n);
    const double f = model.coeff_sq(x) * std::exp(w.log_weight_t(std::log(x)));
    weight = f * len / bn.mass;  // f(n)/q(n) up to the global mass, which cancels
    return x;
  };
  detail::RatioAccumulator acc;
  for (std::uint64_t i = 0; i < draws; ++i) {
    double w1, w2;
    const double x1 = draw(w1);
    const double x2 = draw(w2);
    const double s = sinc((x1 - x2) * tau);
    acc.add(w1 * w2 * s * s, w1 * w2);
  }
  out.value = acc.mean();
  out.std_error = acc.std_error();
  out.exact = false;
  return out;
}

// ── window Hölder-1/2 estimate ───────────────────────────────────────

/*! Grid point of the block-k window, in window units: the field argument is
 *  angle θ + ψ·2^{-Lk} (turns) at radius 1 - s·2^{-Lk}. */
struct WindowPoint {
  double psi = 0.0;
  double s = 0.0;
};

struct HolderEstimate {
  double theta = 0.0;
  double alpha = 0.0;
  int j = 0, k = 0;
  double value = 0.0;  // max |ΔF| / sqrt(|Δψ| + |Δs|) over the pair grid
  int resolution = 0;
  std::uint64_t nodes = 0;
  std::uint64_t pairs = 0;
};

namespace detail {

/*! Σ c[i] e((lo+i)·phi) by incremental rotation, re-anchored on an exact
 *  phase every 4096 terms so the drift stays at the rounding floor. */
inline cplx rotate_sum(const std::vector<cplx>& c, std::uint64_t lo, double phi) {
  const cplx stepw = unit_phase(phi);
  cplx sum{0.0, 0.0};
  cplx wcur{0.0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) {
    if ((i & 4095u) == 0) wcur = unit_phase_mul(lo + i, phi);
    sum += c[i] * wcur;
    wcur *= stepw;
  }
  return sum;
}

}  // namespace detail

/*! Measured Hölder-1/2 modulus of F_{j,k} over the block-k window of
 *  half-width α: the maximum of |F(p1) - F(p2)| / sqrt(|ψ1-ψ2| + |s1-s2|)
 *  over a pair grid on ψ ∈ [-α, α], s ∈ [0, 1] (window units).  The pair set
 *  is every node against a fixed 1/8-unit sublattice, plus all pairs within
 *  1/16 unit, plus any caller-supplied extra points against every node; both
 *  auxiliary sets are anchored in window units, so doubling the resolution
 *  enumerates a superset of pairs and the estimate is a monotone lower bound.
 *  Requires resolution ≥ 64 nodes per unit, divisible by 16. */
inline HolderEstimate holder_estimate(const GafSample& sample, double theta, double alpha,
                                      int j, int k, int resolution = 64,
                                      const std::vector<WindowPoint>& extra = {}) {
  if (resolution < 64 || resolution % 16 != 0)
    throw std::invalid_argument("holder_estimate: resolution must be >= 64 and divisible by 16");
  if (!(alpha > 0.0)) throw std::invalid_argument("holder_estimate: alpha must be positive");
  const int L = sample.model.block_exponent;
  const auto [flo, fhi] = block_range(j, k, L);
  detail::check_freq_range(sample, flo, fhi);
  const double unit = std::ldexp(1.0, -L * k);  // window unit in angle/radius

  HolderEstimate est;
  est.theta = theta;
  est.alpha = alpha;
  est.j = j;
  est.k = k;
  est.resolution = resolution;

  const int npsi = 2 * static_cast<int>(std::llround(alpha * resolution)) + 1;
  const int ns = resolution + 1;
  const double dpsi = 2.0 * alpha / (npsi - 1);
  std::vector<double> psi(static_cast<std::size_t>(npsi));
  for (int i = 0; i < npsi; ++i) psi[static_cast<std::size_t>(i)] = -alpha + i * dpsi;
  std::vector<double> ss(static_cast<std::size_t>(ns));
  for (int i = 0; i < ns; ++i) ss[static_cast<std::size_t>(i)] = static_cast<double>(i) / resolution;

  const std::uint64_t N = static_cast<std::uint64_t>(npsi) * static_cast<std::uint64_t>(ns);
  std::vector<double> px, py, vx, vy;  // positions (ψ,s) and values
  px.reserve(N);
  py.reserve(N);
  vx.reserve(N);
  vy.reserve(N);
  const double phi_step = dpsi * unit;  // angle step between ψ-neighbors, in turns
  for (int si = 0; si < ns; ++si) {
    const double r = 1.0 - ss[static_cast<std::size_t>(si)] * unit;
    const std::vector<cplx> c = radial_coeffs(sample, r, flo, fhi);
    const double theta0 = theta - alpha * unit;
    for (int pi = 0; pi < npsi; ++pi) {
      const double ang = theta0 + pi * phi_step;
      const cplx val = detail::rotate_sum(c, flo, ang);
      px.push_back(psi[static_cast<std::size_t>(pi)]);
      py.push_back(ss[static_cast<std::size_t>(si)]);
      vx.push_back(val.real());
      vy.push_back(val.imag());
    }
  }
  for (const WindowPoint& p : extra) {
    const cplx val = eval_freq_range(sample, theta + p.psi * unit, 1.0 - p.s * unit, flo, fhi);
    px.push_back(p.psi);
    py.push_back(p.s);
    vx.push_back(val.real());
    vy.push_back(val.imag());
  }
  est.nodes = px.size();

  double best2 = 0.0;  // max of |ΔF|² / d over pairs
  std::uint64_t pairs = 0;
  auto consider = [&](std::size_t a, std::size_t b) {
    const double d = std::abs(px[a] - px[b]) + std::abs(py[a] - py[b]);
    if (d == 0.0) return;
    const double dr = vx[a] - vx[b], di = vy[a] - vy[b];
    const double q2 = (dr * dr + di * di) / d;
    if (q2 > best2) best2 = q2;
    ++pairs;
  };

  // Fixed 1/8-unit sublattice against every node.
  const int stride_psi = resolution / 8;
  const int stride_s = resolution / 8;
  std::vector<std::size_t> lattice;
  for (int si = 0; si < ns; si += stride_s)
    for (int pi = 0; pi < npsi; pi += stride_psi)
      lattice.push_back(static_cast<std::size_t>(si) * static_cast<std::size_t>(npsi) +
                        static_cast<std::size_t>(pi));
  const std::size_t ngrid = static_cast<std::size_t>(npsi) * static_cast<std::size_t>(ns);
  for (std::size_t a = 0; a < px.size(); ++a)
    for (std::size_t b : lattice)
      if (a != b) consider(a, b);

  // All pairs within 1/16 unit (Chebyshev) — captures the local quotient.
  const int rad = resolution / 16;
  for (int si = 0; si < ns; ++si) {
    for (int pi = 0; pi < npsi; ++pi) {
      const std::size_t a = static_cast<std::size_t>(si) * static_cast<std::size_t>(npsi) +
                            static_cast<std::size_t>(pi);
      for (int dsi = 0; dsi <= rad; ++dsi) {
        const int sj = si + dsi;
        if (sj >= ns) break;
        const int pj_lo = (dsi == 0) ? pi + 1 : std::max(0, pi - rad);
        for (int pj = pj_lo; pj <= std::min(npsi - 1, pi + rad); ++pj) {
          const std::size_t b = static_cast<std::size_t>(sj) * static_cast<std::size_t>(npsi) +
                                static_cast<std::size_t>(pj);
          consider(a, b);
        }
      }
    }
  }

  // Extra points against everything.
  for (std::size_t a = ngrid; a < px.size(); ++a)
    for (std::size_t b = 0; b < px.size(); ++b)
      if (a != b) consider(a, b);

  est.pairs = pairs;
  est.value = std::sqrt(best2);
  return est;
}

}  // namespace gafcover
