#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gafcover/fft.hpp"
#include "gafcover/gaf.hpp"
#include "gafcover/homing.hpp"
#include "gafcover/model.hpp"
#include "gafcover/numeric.hpp"
#include "gafcover/rng.hpp"
#include "gafcover/scales.hpp"
#include "gafcover/stats.hpp"
#include "gafcover/tail_sum.hpp"

namespace gafcover {

// ── three-phase plan ──────────────────────────────────────────────────

/*! Geometry and admissibility data for one three-phase split of the
 *  coefficient range: homing blocks 1..k_h steer the angle, spawning blocks
 *  k_h+1..k_s must stay quiet, and the coverage tail beyond 2^{L·k_s},
 *  evaluated at r_c = 1 − 2^{−L·M}, supplies the derivative mass that
 *  certificates spend.  The analytic scale report treats the tail as
 *  infinite; the *_cut values re-measure the coverage scales over the
 *  realizable range [2^{L·k_s}, n_cut] so probe thresholds refer to fields a
 *  finite experiment can actually evaluate.  The hypothesis flags gate every
 *  coverage claim: experiments must not report covered disks from a plan
 *  whose separation or correlation requirements fail. */
struct PhasePlan {
  int L = 1;
  int k_h = 0, k_s = 0;
  long long M = 0, depth = 0;  // depth = L·M
  double r_c = 0.0;            // 1 − 2^{−depth}
  double r_cprime = 0.0;       // (1 + r_c)/2, the sup radius certificates use
  double Delta = 0.0;          // spawning tolerance k_h^{−β+1/4}
  double Delta_c = 0.0;        // certificate radius target k_h^{−Λ}
  double Lambda = 0.0, R = 0.0;
  double eps_b = 0.0;          // probe-pair decorrelation level, default k_h^{−R}/4
  std::uint64_t freq_h = 0;    // homing/spawning split 2^{L·k_h}
  std::uint64_t freq_s = 0;    // spawning/coverage split 2^{L·k_s} (0 when unrepresentable)
  std::uint64_t n_cut = 0;     // realizable tail end min(n_max, 64·2^{L·M})
  PhaseSigmaReport sigma;      // analytic scales over the infinite tail

  double Sigma_c_cut = 0.0;       // coverage std dev over [freq_s, n_cut] at r_c
  double Sigma_cprime_cut = 0.0;  // coverage derivative std dev, same range
  double rho_cut = 0.0;           // |corr(F_c, F_c′)| over the same range
  double neglected_fraction = 0.0;  // analytic coverage variance missing from the cut

  double rho2_pair = 0.0;  // E|pair correlation|² of two probe angles
  bool rho2_pair_ok = false;
  double B_markov = 1.0;   // min(1, 4·rho2_pair/eps_b²); 1 when unmeasured

  bool sep_s_ok = false;       // 2Δ   ≤ Σ_c
  bool sep_c_ok = false;       // 2Δ_c ≤ Σ_c
  bool corr_ok = false;        // ρ_{c,c′} ≤ 1/2
  bool tail_nonempty = false;  // the truncation keeps some coverage frequencies
  bool r_c_collapsed = false;  // depth so large that r_c rounds to 1

  bool viable() const {
    return sep_s_ok && sep_c_ok && corr_ok && tail_nonempty && !r_c_collapsed;
  }
};

/*! Builds the three-phase plan for homing depth k_h.  The homing range must
 *  be realizable within the truncation; the coverage tail may fall outside it
 *  (tail_nonempty = false), which voids the plan but keeps the analytic
 *  report inspectable.  eps_b = 0 selects the default k_h^{−R}/4 and
 *  M_override = 0 keeps the reference depth M = k_s². */
inline PhasePlan plan_phases(const CoefficientModel& model, int k_h, double Lambda, double R,
                             double eps_b = 0.0, long long M_override = 0) {
  model.validate();
  if (k_h < 4) throw std::invalid_argument("plan_phases: k_h must be >= 4");
  PhasePlan plan;
  plan.L = model.block_exponent;
  plan.Lambda = Lambda;
  plan.R = R;
  plan.sigma = sigma_parts(model, k_h, Lambda, R, M_override);
  plan.k_h = plan.sigma.k_h;
  plan.k_s = plan.sigma.k_s;
  plan.M = plan.sigma.M;
  plan.depth = plan.sigma.depth;
  plan.r_c = 1.0 - std::exp2(-static_cast<double>(plan.depth));
  plan.r_c_collapsed = !(plan.r_c < 1.0);
  plan.r_cprime = 0.5 * (1.0 + plan.r_c);
  plan.Delta = std::pow(static_cast<double>(k_h), -model.beta + 0.25);
  plan.Delta_c = std::pow(static_cast<double>(k_h), -Lambda);
  plan.eps_b = (eps_b > 0.0) ? eps_b : 0.25 * std::pow(static_cast<double>(k_h), -R);
  if (!(plan.eps_b > 0.0) || !(plan.eps_b < 1.0))
    throw std::invalid_argument("plan_phases: eps_b must lie in (0, 1)");

  const int L = plan.L;
  if (static_cast<long long>(L) * k_h > 62)
    throw std::invalid_argument("plan_phases: homing split exceeds the index range");
  plan.freq_h = std::uint64_t{1} << (static_cast<unsigned>(L) * static_cast<unsigned>(k_h));
  if (plan.freq_h > model.n_max + 1)
    throw std::invalid_argument("plan_phases: homing range exceeds the truncation");

  const long long split_log2 = static_cast<long long>(L) * plan.k_s;
  plan.freq_s = (split_log2 <= 62) ? (std::uint64_t{1} << split_log2) : 0;
  plan.n_cut = (plan.depth + 6 >= 63)
                   ? model.n_max
                   : std::min<std::uint64_t>(model.n_max,
                                             std::uint64_t{64} << static_cast<unsigned>(plan.depth));
  plan.tail_nonempty = plan.freq_s != 0 && plan.freq_s <= plan.n_cut;

  plan.sep_s_ok = std::log(2.0 * plan.Delta) <= 0.5 * plan.sigma.log_Sigma_c2;
  plan.sep_c_ok = std::log(2.0 * plan.Delta_c) <= 0.5 * plan.sigma.log_Sigma_c2;
  plan.corr_ok = plan.sigma.rho_ccprime <= 0.5;

  if (plan.tail_nonempty) {
    const RadialWeight w = RadialWeight::dyadic_depth(plan.depth);
    const double lrc = (plan.depth < 1074)
                           ? std::log1p(-std::exp2(-static_cast<double>(plan.depth)))
                           : 0.0;
    const TailSumResult c2 = weighted_coeff_sum_range(model, 0, plan.freq_s, plan.n_cut + 1, w);
    const TailSumResult x1 = weighted_coeff_sum_range(model, 1, plan.freq_s, plan.n_cut + 1, w);
    const TailSumResult d2 = weighted_coeff_sum_range(model, 2, plan.freq_s, plan.n_cut + 1, w);
    plan.Sigma_c_cut = std::exp(0.5 * c2.log_abs());
    plan.Sigma_cprime_cut = std::exp(0.5 * (d2.log_abs() - 2.0 * lrc));
    plan.rho_cut = std::exp(x1.log_abs() - lrc - 0.5 * c2.log_abs() -
                            0.5 * (d2.log_abs() - 2.0 * lrc));
    plan.neglected_fraction =
        std::clamp(1.0 - std::exp(c2.log_abs() - plan.sigma.log_Sigma_c2), 0.0, 1.0);
  } else {
    plan.neglected_fraction = 1.0;
  }

  try {
    const TwoPointResult tp = two_point_correlation_msq(model, plan.k_h, plan.k_s, plan.M);
    plan.rho2_pair = tp.value;
    plan.rho2_pair_ok = true;
    // Four cross pairs feed the worst-pair correlation, hence the factor 4.
    plan.B_markov = std::min(1.0, 4.0 * plan.rho2_pair / (plan.eps_b * plan.eps_b));
  } catch (const std::exception&) {
    plan.rho2_pair_ok = false;
    plan.B_markov = 1.0;
  }
  return plan;
}

/*! Zeroes the Gaussian coefficients of blocks 1..m in place.  A homing run
 *  that starts after block m steers only the later blocks; zeroing the
 *  skipped ones makes the sample equal to the field the run controlled, so
 *  arc probes of the homing range measure the homed object and nothing
 *  else. */
inline void zero_blocks_through(GafSample& sample, int m) {
  if (m < 0) throw std::invalid_argument("zero_blocks_through: m must be >= 0");
  if (m == 0) return;
  const int L = sample.model.block_exponent;
  std::uint64_t hi = sample.model.n_max + 1;
  if (static_cast<long long>(L) * m <= 62)
    hi = std::min<std::uint64_t>(hi, block_hi(m, L));
  for (std::uint64_t n = 1; n < hi; ++n) sample.zeta[n] = cplx{0.0, 0.0};
}

// ── arc probe ─────────────────────────────────────────────────────────

namespace detail {

/*! Two rotation-recurrence sums sharing one phase stream (resynchronized
 *  every 4096 steps): Σ c_i e((lo+i)φ) and Σ d_i e((lo+i)φ). */
inline void rotate_sum_pair(const std::vector<cplx>& c, const std::vector<cplx>& d,
                            std::uint64_t lo, double phi, cplx& out_c, cplx& out_d) {
  const cplx step = unit_phase(phi);
  KahanCSum ac, ad;
  cplx w{1.0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) {
    if ((i & 4095u) == 0) w = unit_phase_mul(lo + i, phi);
    ac.add(c[i] * w);
    ad.add(d[i] * w);
    w *= step;
  }
  out_c = ac.value();
  out_d = ad.value();
}

}  // namespace detail

/*! One-arc event census for a plan: over a grid of angles spanning the
 *  half-width 2^{−L·k_h} probe arc around theta_arc, the fraction H_s of
 *  angles whose spawning field stays within Δ, the fraction H_c whose full
 *  field additionally lands within Δ_c of u while the coverage derivative
 *  sits in the working band [Σ_c′, 2Σ_c′], and the conditioning event E_h
 *  that the homing field tracks u across the whole arc.  The anchor is the
 *  H_c angle closest to u in field value; pz_bound is the per-trial
 *  second-moment lower bound for Pr(H_c > 0) implied by the plan's pair
 *  correlation budget. */
struct EventProbe {
  cplx u{0.0, 0.0};
  double theta_arc = 0.0;
  double arc_halfwidth = 0.0;
  std::uint64_t grid = 0;
  bool E_h = false;
  double max_h_gap = 0.0;  // max over the arc of |F_h − u|
  double H_s = 0.0, H_c = 0.0;
  double band_fraction = 0.0;  // derivative band membership alone
  double pz_bound = 0.0;
  bool anchor_found = false;
  double theta_anchor = 0.0;
  cplx F_anchor{0.0, 0.0};         // full truncated field at the anchor
  cplx Fc_deriv_anchor{0.0, 0.0};  // coverage derivative at the anchor
};

inline EventProbe event_probe(const GafSample& sample, const PhasePlan& plan, cplx u,
                              double theta_arc, std::uint64_t grid = 1024) {
  if (grid < 1024) throw std::invalid_argument("event_probe: grid must be >= 1024");
  if (sample.model.block_exponent != plan.L)
    throw std::invalid_argument("event_probe: sample and plan disagree on the block exponent");
  if (plan.freq_h > sample.model.n_max + 1)
    throw std::invalid_argument("event_probe: sample truncated below the homing split");
  if (plan.n_cut > sample.model.n_max)
    throw std::invalid_argument("event_probe: sample truncated below the coverage cut");

  EventProbe probe;
  probe.u = u;
  probe.theta_arc = theta_arc;
  probe.grid = grid;
  probe.arc_halfwidth = std::exp2(-static_cast<double>(plan.L) * plan.k_h);

  const double r = plan.r_c;
  const std::uint64_t s_hi = std::min<std::uint64_t>(
      plan.freq_s == 0 ? plan.n_cut + 1 : plan.freq_s, plan.n_cut + 1);
  const std::vector<cplx> ch = radial_coeffs(sample, r, 1, plan.freq_h);
  const std::vector<cplx> cs = radial_coeffs(sample, r, plan.freq_h, s_hi);
  std::vector<cplx> cc, dc;
  if (plan.tail_nonempty) {
    cc = radial_coeffs(sample, r, plan.freq_s, plan.n_cut + 1);
    dc.resize(cc.size());
    for (std::size_t i = 0; i < cc.size(); ++i)
      dc[i] = cc[i] * (static_cast<double>(plan.freq_s + i) / r);
  }

  std::uint64_t count_s = 0, count_c = 0, count_band = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::uint64_t j = 0; j < grid; ++j) {
    const double off = probe.arc_halfwidth *
                       (-1.0 + (2.0 * static_cast<double>(j) + 1.0) / static_cast<double>(grid));
    const double theta = theta_arc + off;
    const cplx Fh = detail::rotate_sum(ch, 1, theta);
    const cplx Fs = detail::rotate_sum(cs, plan.freq_h, theta);
    cplx Fc{0.0, 0.0}, Fcd{0.0, 0.0};
    if (!cc.empty()) detail::rotate_sum_pair(cc, dc, plan.freq_s, theta, Fc, Fcd);

    probe.max_h_gap = std::max(probe.max_h_gap, std::abs(Fh - u));
    const bool s_ok = std::abs(Fs) <= plan.Delta;
    const double ad = std::abs(Fcd);
    const bool band = ad >= plan.Sigma_cprime_cut && ad <= 2.0 * plan.Sigma_cprime_cut;
    const cplx F = Fh + Fs + Fc;
    const double gap = std::abs(F - u);
    const bool c_ok = s_ok && band && gap <= plan.Delta_c;
    count_s += s_ok ? 1 : 0;
    count_band += band ? 1 : 0;
    count_c += c_ok ? 1 : 0;
    if (c_ok && gap < best_gap) {
      best_gap = gap;
      probe.anchor_found = true;
      probe.theta_anchor = theta;
      probe.F_anchor = F;
      probe.Fc_deriv_anchor = unit_phase(-theta) * Fcd;
    }
  }
  probe.E_h = probe.max_h_gap <= plan.Delta;
  probe.H_s = static_cast<double>(count_s) / static_cast<double>(grid);
  probe.H_c = static_cast<double>(count_c) / static_cast<double>(grid);
  probe.band_fraction = static_cast<double>(count_band) / static_cast<double>(grid);

  if (plan.tail_nonempty && plan.Sigma_c_cut > 0.0 && probe.H_s > 0.0) {
    const double ratio =
        probe.H_s * plan.Delta_c * plan.Delta_c / (plan.Sigma_c_cut * plan.Sigma_c_cut);
    probe.pz_bound = 1.0 / (1.0 + plan.eps_b + plan.B_markov / (ratio * ratio));
  }
  return probe;
}

// ── joint hit probability ─────────────────────────────────────────────

/*! Monte Carlo Pr(|Y + x| ≤ δ and 1 ≤ |Z| ≤ 2) for jointly Gaussian complex
 *  (Z, Y), E|Z|² = E|Y|² = 1, correlation ρ.  The c·δ² lower bound this
 *  estimates requires |x| ≤ 1, ρ ≤ 1/2, δ ≤ 1/2, which are enforced. */
inline double p_joint(cplx x, double delta, double rho, std::uint64_t trials,
                      std::uint64_t seed = 2026) {
  if (!(std::abs(x) <= 1.0 + 1e-12))
    throw std::invalid_argument("p_joint: needs |x| <= 1");
  if (!(rho >= 0.0) || !(rho <= 0.5)) throw std::invalid_argument("p_joint: needs 0 <= rho <= 1/2");
  if (!(delta >= 0.0) || !(delta <= 0.5))
    throw std::invalid_argument("p_joint: needs 0 <= delta <= 1/2");
  if (trials == 0) throw std::invalid_argument("p_joint: needs at least one trial");
  CounterRng rng(seed, 0x70A1B2ull);
  const double mix = std::sqrt(1.0 - rho * rho);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const cplx Z = rng.complex_gaussian();
    const cplx Y = rho * Z + mix * rng.complex_gaussian();
    const double az = std::abs(Z);
    hits += (std::abs(Y + x) <= delta && az >= 1.0 && az <= 2.0) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

/*! Joint hit probability for two anchor/derivative pairs whose streams share
 *  the cross-correlation rho_cross; at rho_cross = 0 the two events are
 *  independent and the probability factorizes. */
inline double p_joint_pair(cplx x1, cplx x2, double delta, double rho, double rho_cross,
                           std::uint64_t trials, std::uint64_t seed = 2026) {
  if (!(std::abs(x1) <= 1.0 + 1e-12) || !(std::abs(x2) <= 1.0 + 1e-12))
    throw std::invalid_argument("p_joint_pair: needs |x| <= 1");
  if (!(rho >= 0.0) || !(rho <= 0.5))
    throw std::invalid_argument("p_joint_pair: needs 0 <= rho <= 1/2");
  if (!(delta >= 0.0) || !(delta <= 0.5))
    throw std::invalid_argument("p_joint_pair: needs 0 <= delta <= 1/2");
  if (!(rho_cross >= 0.0) || !(rho_cross <= 1.0))
    throw std::invalid_argument("p_joint_pair: needs 0 <= rho_cross <= 1");
  if (trials == 0) throw std::invalid_argument("p_joint_pair: needs at least one trial");
  CounterRng rng(seed, 0x70A1B3ull);
  const double mix = std::sqrt(1.0 - rho * rho);
  const double cmix = std::sqrt(1.0 - rho_cross * rho_cross);
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const cplx Z1 = rng.complex_gaussian();
    const cplx Z2 = rho_cross * Z1 + cmix * rng.complex_gaussian();
    const cplx W1 = rng.complex_gaussian();
    const cplx W2 = rho_cross * W1 + cmix * rng.complex_gaussian();
    const cplx Y1 = rho * Z1 + mix * W1;
    const cplx Y2 = rho * Z2 + mix * W2;
    const double a1 = std::abs(Z1), a2 = std::abs(Z2);
    const bool e1 = std::abs(Y1 + x1) <= delta && a1 >= 1.0 && a1 <= 2.0;
    const bool e2 = std::abs(Y2 + x2) <= delta && a2 >= 1.0 && a2 <= 2.0;
    hits += (e1 && e2) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

// ── winding verification ──────────────────────────────────────────────

/*! Outcome of an argument-principle check along a closed contour.  The check
 *  is conclusive only when every argument increment between adjacent nodes
 *  stays below π/2 after adaptive refinement and the accumulated argument is
 *  within a quarter turn of an integer; an inconclusive check never counts
 *  as a refutation. */
struct WindingCheck {
  bool attained = false;
  long long winding = 0;
  bool conclusive = false;
  int depth = 0;
  std::size_t nodes = 0;
  double min_abs = std::numeric_limits<double>::infinity();
  double residual = 0.0;  // distance of the accumulated argument to the integer, in turns
};

namespace detail {

/*! Winding number of t ↦ value_at(t), t ∈ [0, 1), around the origin, by
 *  adaptive midpoint insertion wherever the argument jumps by a quarter
 *  turn or more.  Nodes whose value falls within 1e−12 of the origin are
 *  re-evaluated at deterministically jittered parameters; if the value
 *  stays degenerate the check is inconclusive. */
inline WindingCheck winding_number(const std::function<cplx(double)>& value_at, int max_depth = 12,
                                   std::size_t node_cap = 4096) {
  WindingCheck out;
  const auto eval = [&](double t, double span, bool& degenerate) {
    cplx v{0.0, 0.0};
    for (int a = 0; a < 8; ++a) {
      v = value_at(t + span * 1e-6 * static_cast<double>(a));
      if (std::abs(v) > 1e-12) {
        degenerate = false;
        return v;
      }
    }
    degenerate = true;
    return v;
  };

  std::vector<double> ts;
  std::vector<cplx> vs;
  ts.reserve(256);
  vs.reserve(256);
  bool degenerate = false;
  for (int i = 0; i < 64; ++i) {
    const double t = static_cast<double>(i) / 64.0;
    ts.push_back(t);
    vs.push_back(eval(t, 1.0 / 64.0, degenerate));
    if (degenerate) return out;
  }

  const double quarter = 0.5 * std::numbers::pi;
  for (int d = 0; d < max_depth; ++d) {
    out.depth = d;
    std::vector<double> add;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::size_t j = (i + 1) % ts.size();
      const double gap = (j == 0 ? ts[j] + 1.0 : ts[j]) - ts[i];
      if (std::abs(std::arg(vs[j] / vs[i])) >= quarter) add.push_back(ts[i] + 0.5 * gap);
    }
    if (add.empty()) {
      out.conclusive = true;
      break;
    }
    if (ts.size() + add.size() > node_cap) break;
    for (double t : add) {
      const cplx v = eval(t, 1.0 / static_cast<double>(ts.size()), degenerate);
      if (degenerate) return out;
      const auto pos = std::upper_bound(ts.begin(), ts.end(), t);
      vs.insert(vs.begin() + (pos - ts.begin()), v);
      ts.insert(pos, t);
    }
  }
  out.nodes = ts.size();
  for (const cplx& v : vs) out.min_abs = std::min(out.min_abs, std::abs(v));

  KahanSum total;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const std::size_t j = (i + 1) % ts.size();
    total.add(std::arg(vs[j] / vs[i]));
  }
  const double turns = total.value() / (2.0 * std::numbers::pi);
  out.winding = std::llround(turns);
  out.residual = std::abs(turns - static_cast<double>(out.winding));
  if (out.residual >= 0.25 || out.winding < 0) out.conclusive = false;
  out.attained = out.conclusive && out.winding >= 1;
  return out;
}

/*! Σ_{n ∈ [lo, hi)} n^p ζ_n a_n z^n by a top-down Horner recurrence; p = 1
 *  yields z·(d/dz of the slice). */
inline cplx eval_point(const GafSample& s, cplx z, std::uint64_t lo, std::uint64_t hi, int p = 0) {
  check_freq_range(s, lo, hi);
  if (hi <= lo) return {0.0, 0.0};
  if (lo < 1) throw std::invalid_argument("eval_point: lo must be >= 1");
  if (z == cplx{0.0, 0.0}) return {0.0, 0.0};
  cplx acc{0.0, 0.0};
  for (std::uint64_t n = hi - 1; n >= lo; --n) {
    const double wn = (p == 0) ? 1.0 : static_cast<double>(n);
    acc = acc * z + s.zeta[n] * (s.a[n] * wn);
    if (n == lo) break;
  }
  return acc * ((lo == 1) ? z : std::pow(z, static_cast<double>(lo)));
}

}  // namespace detail

/*! Argument-principle verification that the truncated field attains w inside
 *  the disk of the given center and radius: the winding number of F − w
 *  along the boundary circle counts interior solutions of F = w. */
inline WindingCheck verify_attained(const GafSample& sample, cplx w, cplx center, double radius,
                                    int max_depth = 12, std::size_t node_cap = 4096) {
  if (!(radius > 0.0)) throw std::invalid_argument("verify_attained: radius must be positive");
  if (!(std::abs(center) + radius <= 1.0 + 1e-9))
    throw std::invalid_argument("verify_attained: contour must stay inside the unit disk");
  const std::uint64_t hi = sample.model.n_max + 1;
  return detail::winding_number(
      [&](double t) {
        return detail::eval_point(sample, center + radius * unit_phase(t), 1, hi) - w;
      },
      max_depth, node_cap);
}

// ── derivative-domination certificate ─────────────────────────────────

namespace detail {

struct BoundarySup {
  double grid_max = 0.0;
  double upper = 0.0;  // grid_max / cos(π·top/G), a sup bound for the slice
  std::uint64_t grid = 0;
};

/*! Deterministic sup bound for a frequency-range slice (p = 0) or its
 *  z-derivative (p = 1) on the circle |z| = r.  The slice is a trigonometric
 *  polynomial of degree at most top = hi−1, so its true circle sup exceeds
 *  the equispaced G-point grid maximum by at most the factor
 *  sec(π·top/G) (grid-to-sup transfer for band-limited functions); by the
 *  maximum principle the bound covers the closed disk as well. */
inline BoundarySup boundary_sup(const GafSample& s, double r, std::uint64_t lo, std::uint64_t hi,
                                int p) {
  check_freq_range(s, lo, hi);
  BoundarySup out;
  if (hi <= lo) return out;
  if (!(r > 0.0) || !(r <= 1.0))
    throw std::invalid_argument("boundary_sup: needs 0 < r <= 1");
  const std::uint64_t top = hi - 1;
  out.grid = std::clamp<std::uint64_t>(next_pow2(8 * top), 1024, std::uint64_t{1} << 22);
  if (out.grid < 4 * top)
    throw std::invalid_argument("boundary_sup: range too wide for the sup grid");
  std::vector<cplx> v(out.grid, cplx{0.0, 0.0});
  const double logr = std::log(r);
  for (std::uint64_t q = lo; q < hi; ++q) {
    const double rq = (r == 1.0) ? 1.0 : std::exp(static_cast<double>(q) * logr);
    const double wq = (p == 0) ? 1.0 : static_cast<double>(q) / r;
    v[q] = s.zeta[q] * (s.a[q] * rq * wq);
  }
  fourier_pow2(v, +1);
  for (const cplx& x : v) out.grid_max = std::max(out.grid_max, std::abs(x));
  out.upper = out.grid_max /
              std::cos(std::numbers::pi * static_cast<double>(top) / static_cast<double>(out.grid));
  return out;
}

}  // namespace detail

/*! Certified constant for the derivative-domination coverage radius
 *  C·A²·R/S: an analytic g on 𝔻(0, R) with |g′| ≤ S and |g′(0)| ≥ A > 0
 *  covers the disk of that radius around g(0).  The calibrated minimum of
 *  attained/predicted over default_fuchs_corpus() is 1.0, reached by the
 *  identity and by z + z² at its critical radius 1/2; the pinned value keeps
 *  a factor-two margin under that sharp ratio to cover directions a finite
 *  target fan misses and shapes outside the corpus. */
inline constexpr double kFuchsC = 0.5;

/*! Analytic coverage certificate anchored at a point of modulus r_c: if the
 *  coverage derivative at the anchor exceeds the sup of the earlier-phase
 *  derivative by A > 0 while the full derivative stays below S on the disk
 *  of radius r_c′ = (1+r_c)/2, the field covers the disk of radius
 *  C·A²·R_geom/S around its anchor value, R_geom = (1−r_c)/2.  Sups are
 *  deterministic grid bounds (boundary_sup) joined with the anchor-point
 *  evaluations, so A ≤ S always holds for a non-void certificate.  A
 *  certificate is void — never an error — when the geometry collapses, a sup
 *  overflows, or domination fails. */
struct CoverageCertificate {
  cplx anchor{0.0, 0.0};
  cplx value{0.0, 0.0};  // field value at the anchor: claimed disk center
  double A = 0.0;        // anchor derivative margin over the earlier phases
  double S = 0.0;        // sup bound for the full derivative on |z| <= r_c′
  double S_grid = 0.0, hs_grid = 0.0;  // raw grid maxima behind the bounds
  double Fc_deriv = 0.0;               // |coverage derivative| at the anchor
  double R_geom = 0.0;                 // (1 − r_c)/2
  double C_F = 0.0;
  double radius = 0.0;  // C_F·A²·R_geom/S
  double Delta_c = 0.0;
  bool ok = false;        // certificate non-void
  bool accepted = false;  // ok and radius > Δ_c
  std::string reason;     // populated when void
  std::uint64_t sup_grid = 0;
};

inline CoverageCertificate fuchs_certificate(const GafSample& sample, cplx anchor,
                                             const PhasePlan& plan, double C_F = kFuchsC) {
  if (std::abs(std::abs(anchor) - plan.r_c) > 1e-9)
    throw std::invalid_argument("fuchs_certificate: anchor must have modulus r_c");
  if (plan.n_cut > sample.model.n_max)
    throw std::invalid_argument("fuchs_certificate: sample truncated below the coverage cut");
  CoverageCertificate cert;
  cert.anchor = anchor;
  cert.C_F = C_F;
  cert.Delta_c = plan.Delta_c;
  cert.R_geom = 0.5 * (1.0 - plan.r_c);
  if (plan.r_c_collapsed || !(plan.r_cprime < 1.0) || !(cert.R_geom > 0.0)) {
    cert.reason = "radius collapse";
    return cert;
  }

  const std::uint64_t hi = plan.n_cut + 1;
  const std::uint64_t s_hi = std::min<std::uint64_t>(plan.freq_s == 0 ? hi : plan.freq_s, hi);
  const detail::BoundarySup full = detail::boundary_sup(sample, plan.r_cprime, 1, hi, 1);
  const detail::BoundarySup early = detail::boundary_sup(sample, plan.r_cprime, 1, s_hi, 1);
  cert.sup_grid = full.grid;
  cert.S_grid = full.grid_max;
  cert.hs_grid = early.grid_max;

  const cplx full_deriv = detail::eval_point(sample, anchor, 1, hi, 1) / anchor;
  const cplx early_deriv = detail::eval_point(sample, anchor, 1, s_hi, 1) / anchor;
  const double S = std::max(full.upper, std::abs(full_deriv));
  const double hs = std::max(early.upper, std::abs(early_deriv));
  if (!std::isfinite(S) || !std::isfinite(hs)) {
    cert.reason = "sup overflow";
    return cert;
  }
  cert.S = S;

  cert.Fc_deriv = (s_hi < hi)
                      ? std::abs(detail::eval_point(sample, anchor, s_hi, hi, 1) / anchor)
                      : 0.0;
  cert.A = cert.Fc_deriv - hs;
  if (!(cert.A > 0.0) || !(S > 0.0)) {
    cert.reason = "derivative dominance failed";
    return cert;
  }
  cert.value = detail::eval_point(sample, anchor, 1, hi, 0);
  cert.radius = C_F * cert.A * cert.A * cert.R_geom / S;
  cert.ok = true;
  cert.accepted = cert.radius > cert.Delta_c;
  return cert;
}

// ── coverage-constant calibration ─────────────────────────────────────

/*! Closed-form calibration map: an analytic f on 𝔻(0, radius) with known
 *  derivative, used to compare the attained coverage radius around f(0)
 *  against the predicted A²·radius/S. */
struct FuchsProbe {
  std::string name;
  std::function<cplx(cplx)> f;
  std::function<cplx(cplx)> df;
  double radius = 0.5;
};

struct FuchsEntryReport {
  std::string name;
  double A = 0.0, S = 0.0;
  double predicted = 0.0;  // A²·radius/S
  double attained = 0.0;   // largest verified covered radius around f(0)
  double ratio = 0.0;      // attained / predicted
};

struct FuchsCalibration {
  double C_F = 0.0;  // min over the corpus of attained/predicted
  int targets = 0;
  std::uint64_t corpus_hash = 0;
  std::vector<FuchsEntryReport> entries;
};

/*! Reference corpus of closed-form maps with known image geometry.  The
 *  identity and the critical cusp z + z² on |z| < 1/2 pin the binding ratio:
 *  for both, the attained inradius equals the predicted A²R/S exactly (for
 *  the cusp, the image pinches off at −R(1−R) = −A²R/S when R = 1/2).  The
 *  remaining entries spread A/S across (0.1, 1) — a folded cusp whose
 *  boundary curve crosses the interior, primitives of one and two Blaschke
 *  factors, an exponential spiral with an image hole, and generic
 *  polynomials — and all sit strictly above ratio 1. */
inline std::vector<FuchsProbe> default_fuchs_corpus() {
  std::vector<FuchsProbe> corpus;
  corpus.push_back({"identity", [](cplx z) { return z; },
                    [](cplx) { return cplx{1.0, 0.0}; }, 0.5});
  for (double R : {0.4, 0.5, 0.9}) {
    corpus.push_back({"cusp-quadratic-" + std::to_string(R).substr(0, 3),
                      [](cplx z) { return z + z * z; },
                      [](cplx z) { return 1.0 + 2.0 * z; }, R});
  }
  {
    const double a = 0.6;
    corpus.push_back({"blaschke-primitive",
                      [a](cplx z) {
                        return z / a + ((1.0 - a * a) / (a * a)) * std::log(1.0 - a * z);
                      },
                      [a](cplx z) { return (a - z) / (1.0 - a * z); }, 1.0});
  }
  {
    const double c = 0.7;
    corpus.push_back({"double-blaschke",
                      [c](cplx z) {
                        return -z / (c * c) +
                               ((1.0 - c * c * c * c) / (c * c * c)) * std::atanh(c * z);
                      },
                      [c](cplx z) { return (z * z - c * c) / (1.0 - c * c * z * z); }, 1.0});
  }
  corpus.push_back({"exp-spiral", [](cplx z) { return std::exp(z - 1.0) - std::exp(-1.0); },
                    [](cplx z) { return std::exp(z - 1.0); }, 1.0});
  corpus.push_back({"cubic-mix", [](cplx z) { return z - 0.4 * z * z * z; },
                    [](cplx z) { return 1.0 - 1.2 * z * z; }, 0.6});
  const std::vector<cplx> tail = {{0.31, -0.12}, {-0.23, 0.05}, {0.11, 0.2}, {0.0, -0.07},
                                  {0.045, 0.0}};
  corpus.push_back({"poly-seeded",
                    [tail](cplx z) {
                      cplx acc = z;
                      cplx zp = z;
                      for (std::size_t k = 0; k < tail.size(); ++k) {
                        zp *= z;
                        acc += tail[k] * zp / static_cast<double>(k + 2);
                      }
                      return acc;
                    },
                    [tail](cplx z) {
                      cplx acc{1.0, 0.0};
                      cplx zp{1.0, 0.0};
                      for (const cplx& c : tail) {
                        zp *= z;
                        acc += c * zp;
                      }
                      return acc;
                    },
                    0.8});
  return corpus;
}

/*! Bisection estimate of the largest constant the corpus supports: for each
 *  entry, the largest ρ such that every one of `targets` rays from f(0) at
 *  distance ρ passes a conclusive winding check is found by bisection (an
 *  inconclusive check counts as a miss, so the estimate only shrinks), and
 *  C_F is the worst attained/predicted ratio.  S uses the boundary grid
 *  maximum of |f′|, an underestimate, which also only shrinks the ratio. */
inline FuchsCalibration calibrate_fuchs_constant(const std::vector<FuchsProbe>& corpus,
                                                 int targets = 256, int max_depth = 12) {
  if (corpus.empty())
    throw std::invalid_argument("calibrate_fuchs_constant: empty corpus");
  if (targets < 4) throw std::invalid_argument("calibrate_fuchs_constant: needs targets >= 4");
  FuchsCalibration cal;
  cal.targets = targets;
  cal.C_F = std::numeric_limits<double>::infinity();

  std::uint64_t h = 14695981039346656037ull;
  const auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };

  for (const FuchsProbe& probe : corpus) {
    mix(probe.name.data(), probe.name.size());
    mix(":", 1);
    mix(&probe.radius, sizeof probe.radius);
    mix(";", 1);

    FuchsEntryReport rep;
    rep.name = probe.name;
    rep.A = std::abs(probe.df(cplx{0.0, 0.0}));
    if (!(rep.A > 0.0))
      throw std::invalid_argument("calibrate_fuchs_constant: corpus entry with A = 0");
    for (int g = 0; g < 4096; ++g) {
      const cplx z = probe.radius * unit_phase(static_cast<double>(g) / 4096.0);
      rep.S = std::max(rep.S, std::abs(probe.df(z)));
    }
    rep.predicted = rep.A * rep.A * probe.radius / rep.S;

    const cplx g0 = probe.f(cplx{0.0, 0.0});
    const auto attained_all = [&](double rho) {
      for (int i = 0; i < targets; ++i) {
        const cplx w = g0 + rho * unit_phase((static_cast<double>(i) + 0.5) / targets);
        const WindingCheck wc = detail::winding_number(
            [&](double t) { return probe.f(probe.radius * unit_phase(t)) - w; }, max_depth);
        if (!wc.attained) return false;
      }
      return true;
    };
    double lo = 0.0, hi = 1.0001 * rep.S * probe.radius + 1e-12;
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (attained_all(mid))
        lo = mid;
      else
        hi = mid;
    }
    rep.attained = lo;
    rep.ratio = rep.attained / rep.predicted;
    cal.C_F = std::min(cal.C_F, rep.ratio);
    cal.entries.push_back(std::move(rep));
  }
  mix(&targets, sizeof targets);
  cal.corpus_hash = h;
  return cal;
}

// ── end-to-end disk coverage ──────────────────────────────────────────

enum class CoverMode {
  flat_targets,  // β < 1: fixed-mesh net of targets, one homing run each
  scaled_net,    // β = 1: recursive homing net, targets shrink with the level
};

struct CoverBudget {
  std::size_t max_net_points = 64;
  std::size_t max_pipeline_points = std::numeric_limits<std::size_t>::max();
  std::uint64_t probe_grid = 1024;
  int probe_axis = 65;  // odd grid, cells spanning [−1, 1]² around u
  double Lambda = 0.15, R = 0.15;
  long long M_override = 0;  // 0 → shallowest depth that keeps the samplers exact
  double eps_b = 0.0;
  double C_F = kFuchsC;
  double gamma = 0.125;
  int m_skip = 1;  // homing starts after this block (flat_targets mode)
  int verify_targets = 0;
  int winding_depth = 12;
  int j_levels = 2;
  int m_base = 2;
  NetCaps net_caps{};
  bool measure_window = false;
  int holder_resolution = 64;
  std::uint64_t seed = 1, trial_id = 0;
};

struct CoverPointOutcome {
  cplx target{0.0, 0.0};
  double theta = 0.0;
  int level = 0;  // net level (scaled_net); 0 in flat_targets mode
  double homing_gap = 0.0;
  double window_delta = std::numeric_limits<double>::quiet_NaN();
  bool homing_success = false;
  EventProbe probe;
  CoverageCertificate cert;
  bool claimed = false;  // accepted certificate under a viable plan
};

struct ProbeCell {
  double x = 0.0, y = 0.0;  // offset from u
  bool inside = false;      // within the claimed disk 𝔻(u, 1)
  bool covered = false;     // within some claimed certificate disk
};

struct CoverReport {
  CoverMode mode{};
  cplx u{0.0, 0.0};
  double delta_target = 0.0;
  int n_blocks = 0, n_required = 0;
  bool depth_sufficient = false;  // n_blocks ≥ ceil(sqrt(2/δ))
  int k_h = 0;
  PhasePlan plan;
  NetResult net;  // populated in scaled_net mode
  std::vector<CoverPointOutcome> points;
  std::size_t processed = 0;
  bool partial = false;     // pipeline budget cut the point list short
  bool net_capped = false;  // target net truncated by the point budget
  double mesh_target = 0.0, mesh_measured = 0.0;
  int probe_axis = 0;
  std::vector<ProbeCell> cells;
  double certified_fraction = 0.0;  // claimed points / processed points
  double covered_fraction = 0.0;    // covered cells / inside cells
  std::vector<double> level_certified, level_covered;  // cumulative by net level
  int winding_attempted = 0, winding_confirmed = 0, winding_failed = 0,
      winding_inconclusive = 0;
  std::uint64_t seed = 0, trial_id = 0;
};

namespace detail {

/*! Probe–certificate pipeline for one homed angle; winding spot-checks
 *  sample targets inside the claimed disk when requested. */
inline CoverPointOutcome cover_point(const GafSample& sample, const PhasePlan& plan, cplx target,
                                     double theta, const CoverBudget& budget, CoverReport& report) {
  CoverPointOutcome out;
  out.target = target;
  out.theta = theta;
  out.probe = event_probe(sample, plan, target, theta, budget.probe_grid);
  if (out.probe.anchor_found) {
    const cplx anchor = plan.r_c * unit_phase(out.probe.theta_anchor);
    out.cert = fuchs_certificate(sample, anchor, plan, budget.C_F);
    out.claimed = out.cert.accepted && plan.viable();
  }
  if (out.claimed && budget.verify_targets > 0) {
    CounterRng rng(budget.seed, 0x57D0ull + report.winding_attempted);
    for (int i = 0; i < budget.verify_targets; ++i) {
      const double rho = 0.9 * out.cert.radius * std::sqrt(rng.uniform());
      const cplx w = out.cert.value + rho * unit_phase(rng.uniform());
      ++report.winding_attempted;
      const WindingCheck wc =
          verify_attained(sample, w, out.cert.anchor, out.cert.R_geom, budget.winding_depth);
      if (!wc.conclusive)
        ++report.winding_inconclusive;
      else if (wc.attained)
        ++report.winding_confirmed;
      else
        ++report.winding_failed;
    }
  }
  return out;
}

}  // namespace detail

/*! Runs the full disk-coverage pipeline for one sample of the model: builds
 *  the target net around u, homes an angle per target, probes the phase
 *  events on the homed arc, and converts anchors into certified coverage
 *  disks.  flat_targets (β < 1) uses a fixed mesh of n_blocks^{−4} (coarsened
 *  to respect the point budget) and one homing run per target starting after
 *  block m_skip, whose earlier blocks are zeroed so the probes measure the
 *  homed field; scaled_net (β = 1) delegates target selection to the
 *  recursive net and probes every selected angle with a single plan at the
 *  net's final scale.  depth_sufficient records whether n_blocks reaches
 *  ceil(sqrt(2/δ)), the depth at which the claimed failure probability drops
 *  below the requested δ. */
inline CoverReport cover_disk_experiment(const CoefficientModel& model, cplx u,
                                         double delta_target, CoverMode mode,
                                         const CoverBudget& budget = {}) {
  model.validate();
  if (!(delta_target > 0.0) || !(delta_target < 1.0))
    throw std::invalid_argument("cover_disk_experiment: delta_target must lie in (0, 1)");
  if (mode == CoverMode::flat_targets && !(model.beta < 1.0))
    throw std::invalid_argument("cover_disk_experiment: flat_targets needs beta < 1");
  if (mode == CoverMode::scaled_net && model.beta != 1.0)
    throw std::invalid_argument("cover_disk_experiment: scaled_net needs beta = 1");
  if (budget.max_net_points == 0 || budget.probe_axis < 3)
    throw std::invalid_argument("cover_disk_experiment: degenerate budget");

  CoverReport report;
  report.mode = mode;
  report.u = u;
  report.delta_target = delta_target;
  report.seed = budget.seed;
  report.trial_id = budget.trial_id;
  report.probe_axis = budget.probe_axis;

  const ScaleTable table = build_scales(model);
  report.n_blocks = table.k_max;
  report.n_required = static_cast<int>(std::ceil(std::sqrt(2.0 / delta_target)));
  report.depth_sufficient = report.n_blocks >= report.n_required;

  const int L = model.block_exponent;
  const auto k_s_of = [&](int kh) {
    return kh + static_cast<int>(std::ceil(4.0 * ((budget.Lambda + budget.R) / L) *
                                           std::log2(static_cast<double>(kh))));
  };
  const auto plan_for = [&](int kh) {
    long long M = budget.M_override;
    if (M == 0) {
      // Shallowest depth that keeps r_c representable and the pair sampler
      // exact (depth ≤ 48), never below the spawning split.
      const long long cap = static_cast<long long>(48.0 / L);
      M = std::max<long long>(k_s_of(kh), std::min<long long>(
                                              static_cast<long long>(k_s_of(kh)) *
                                                  static_cast<long long>(k_s_of(kh)),
                                              cap));
    }
    return plan_phases(model, kh, budget.Lambda, budget.R, budget.eps_b, M);
  };

  const CoefficientLaw law = CoefficientLaw::complex_gaussian();
  GafSample sample = make_sample(model, law, budget.seed, budget.trial_id);

  std::vector<std::pair<cplx, double>> homed;  // target, selected angle
  std::vector<int> levels;
  std::vector<double> gaps, deltas;
  std::vector<char> successes;

  if (mode == CoverMode::flat_targets) {
    int kh = -1;
    for (int c = report.n_blocks - 1; c >= 4; --c)
      if (k_s_of(c) <= report.n_blocks - 1) {
        kh = c;
        break;
      }
    if (kh < 0)
      throw std::invalid_argument("cover_disk_experiment: model too shallow for the phase split");
    report.k_h = kh;
    report.plan = plan_for(kh);
    zero_blocks_through(sample, budget.m_skip);

    report.mesh_target = std::pow(static_cast<double>(report.n_blocks), -4.0);
    // Coarsen the mesh so the hexagonal net respects the point budget before
    // generation; the cap flag records any coarsening or truncation.
    const double eps_budget =
        1.02 * std::sqrt(std::numbers::pi * 1.1 /
                         (2.598 * static_cast<double>(budget.max_net_points)));
    const double eps_eff = std::max(report.mesh_target, eps_budget);
    bool capped = false;
    const std::vector<cplx> xs = detail::disk_net(eps_eff, budget.max_net_points, capped);
    report.net_capped = capped || eps_eff > report.mesh_target;
    std::vector<cplx> targets;
    targets.reserve(xs.size());
    for (const cplx& x : xs) targets.push_back(u + x);
    report.mesh_measured = detail::covering_mesh(u, targets);

    HomingConfig cfg;
    cfg.table = table;
    cfg.offsets = choose_offsets(model, budget.m_skip, kh, table.constants.rho_H);
    cfg.m = budget.m_skip;
    cfg.n = kh;
    cfg.gamma = budget.gamma;
    const double threshold = 2.0 * std::pow(table.frak_s(kh), 1.0 - budget.gamma);
    for (const cplx& t : targets) {
      cfg.u = t;
      const HomingTrace tr = run_homing(sample, cfg);
      double stat = tr.final_gap;
      double wd = std::numeric_limits<double>::quiet_NaN();
      if (budget.measure_window) {
        wd = holder_estimate(sample, tr.final_angle, 1.0, budget.m_skip, kh,
                             budget.holder_resolution)
                 .value;
        stat += wd;
      }
      homed.push_back({t, tr.final_angle});
      levels.push_back(0);
      gaps.push_back(tr.final_gap);
      deltas.push_back(wd);
      successes.push_back(stat <= threshold ? 1 : 0);
    }
  } else {
    NetCaps caps = budget.net_caps;
    caps.max_points = static_cast<int>(std::min<std::size_t>(
        static_cast<std::size_t>(caps.max_points), budget.max_net_points));
    report.net = build_net(sample, table, u, budget.j_levels, budget.m_base, budget.gamma, caps);
    if (report.net.level.empty())
      throw std::invalid_argument("cover_disk_experiment: net produced no levels");
    const int kh = report.net.level.back().scale;
    if (kh < 4 || k_s_of(kh) > report.n_blocks - 1)
      throw std::invalid_argument(
          "cover_disk_experiment: net scale incompatible with the phase split");
    report.k_h = kh;
    report.plan = plan_for(kh);
    for (std::size_t l = 0; l < report.net.level.size(); ++l) {
      const NetLevel& lev = report.net.level[l];
      report.net_capped = report.net_capped || lev.capped;
      for (const NetPoint& p : lev.points) {
        homed.push_back({p.target_u, p.theta});
        levels.push_back(static_cast<int>(l));
        gaps.push_back(p.gap);
        deltas.push_back(p.delta_bound);
        successes.push_back(p.success ? 1 : 0);
      }
    }
    report.mesh_target = report.net.level.back().eps;
    report.mesh_measured = report.net.level.back().nu;
  }

  for (std::size_t i = 0; i < homed.size(); ++i) {
    if (report.points.size() >= budget.max_pipeline_points) {
      report.partial = true;
      break;
    }
    CoverPointOutcome out =
        detail::cover_point(sample, report.plan, homed[i].first, homed[i].second, budget, report);
    out.level = levels[i];
    out.homing_gap = gaps[i];
    out.window_delta = deltas[i];
    out.homing_success = successes[i] != 0;
    report.points.push_back(std::move(out));
  }
  report.processed = report.points.size();

  std::size_t claimed = 0;
  for (const CoverPointOutcome& p : report.points) claimed += p.claimed ? 1 : 0;
  report.certified_fraction =
      report.processed > 0 ? static_cast<double>(claimed) / report.processed : 0.0;

  const int axis = budget.probe_axis;
  report.cells.reserve(static_cast<std::size_t>(axis) * axis);
  std::size_t inside = 0, covered = 0;
  for (int iy = 0; iy < axis; ++iy)
    for (int ix = 0; ix < axis; ++ix) {
      ProbeCell cell;
      cell.x = -1.0 + 2.0 * ix / (axis - 1);
      cell.y = -1.0 + 2.0 * iy / (axis - 1);
      cell.inside = cell.x * cell.x + cell.y * cell.y <= 1.0;
      if (cell.inside) {
        ++inside;
        const cplx w = u + cplx{cell.x, cell.y};
        for (const CoverPointOutcome& p : report.points)
          if (p.claimed && std::abs(w - p.cert.value) <= p.cert.radius) {
            cell.covered = true;
            break;
          }
        covered += cell.covered ? 1 : 0;
      }
      report.cells.push_back(cell);
    }
  report.covered_fraction =
      inside > 0 ? static_cast<double>(covered) / static_cast<double>(inside) : 0.0;

  const int max_level = levels.empty() ? 0 : *std::max_element(levels.begin(), levels.end());
  report.level_certified.assign(static_cast<std::size_t>(max_level) + 1, 0.0);
  report.level_covered.assign(static_cast<std::size_t>(max_level) + 1, 0.0);
  for (int l = 0; l <= max_level; ++l) {
    std::size_t pts = 0, cl = 0, cov = 0;
    for (const CoverPointOutcome& p : report.points)
      if (p.level <= l) {
        ++pts;
        cl += p.claimed ? 1 : 0;
      }
    for (const ProbeCell& cell : report.cells) {
      if (!cell.inside) continue;
      const cplx w = u + cplx{cell.x, cell.y};
      for (const CoverPointOutcome& p : report.points)
        if (p.level <= l && p.claimed && std::abs(w - p.cert.value) <= p.cert.radius) {
          ++cov;
          break;
        }
    }
    report.level_certified[static_cast<std::size_t>(l)] =
        pts > 0 ? static_cast<double>(cl) / static_cast<double>(pts) : 0.0;
    report.level_covered[static_cast<std::size_t>(l)] =
        inside > 0 ? static_cast<double>(cov) / static_cast<double>(inside) : 0.0;
  }
  return report;
}

}  // namespace gafcover
