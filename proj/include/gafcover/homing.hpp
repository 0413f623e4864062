#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaf.hpp"
#include "model.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "scales.hpp"
#include "stats.hpp"

namespace gafcover {

// ── two-candidate selection ───────────────────────────────────────────

/*! 1 iff Z2 has the strictly larger projection on the direction of u.
 *  Ties and u = 0 resolve to 0 (the first candidate). */
inline int select_star_index(cplx Z1, cplx Z2, cplx u) {
  if (u == cplx{0.0, 0.0}) return 0;
  const double s1 = std::real(std::conj(u) * Z1);
  const double s2 = std::real(std::conj(u) * Z2);
  return s2 > s1 ? 1 : 0;
}

/*! Whichever of Z1, Z2 maximizes Re(conj(u)·Z); ties break toward Z1. */
inline cplx select_star(cplx Z1, cplx Z2, cplx u) {
  return select_star_index(Z1, Z2, u) ? Z2 : Z1;
}

// ── selection-oracle calibration ──────────────────────────────────────

/*! Constants extracted from the two-Gaussian selection experiment: capture
 *  radius r0, margin delta, tolerable candidate correlation rho_H, and the
 *  sub-gaussian rate C_H of the selected step.  C_D is the derived penalty
 *  rate for steps without a decorrelated partner.  Reproducible from seed. */
struct OracleCalibration {
  double r0 = 0.0;
  double delta = 0.0;
  double rho_H = 0.0;
  double C_H = 0.0;
  double C_D = 0.0;
  double worst_margin = 0.0;     // min over qualifying grid of u − E|Z_*−u| (= 2·delta)
  double worst_margin_se = 0.0;  // standard error of that grid point's mean
  double capture_mean = 0.0;     // E|W_*−r0| at rho = 0
  double capture_se = 0.0;
  double sub_gaussian_norm = 0.0;  // raw ψ₂ fit of the centered excess, reported only
  std::uint64_t samples_per_point = 0;
  std::uint64_t seed = 0;
  int iterations = 0;  // (delta, rho_H) fixed-point sweeps
  std::vector<double> u_grid;
  std::vector<double> rho_grid;

  /*! Packs the calibrated values into the budget-constant struct. */
  ScaleConstants constants() const { return ScaleConstants{delta, C_H, C_D, r0, rho_H}; }
};

namespace detail {

/*! MGF of the modulus of a standard complex Gaussian (E|Z|² = 1):
 *  E e^{λ|Z|} = 1 + (√π/2)·λ·e^{λ²/4}·(1 + erf(λ/2)). */
inline double rayleigh_mgf(double lambda) {
  return 1.0 + 0.5 * std::sqrt(std::numbers::pi) * lambda * std::exp(0.25 * lambda * lambda) *
                   (1.0 + std::erf(0.5 * lambda));
}

/*! Correlated standardized pair: Z1 standard complex Gaussian and
 *  Z2 = conj(ρ)·Z1 + sqrt(1−|ρ|²)·W, so that E[Z1·conj(Z2)] = ρ. */
inline std::pair<cplx, cplx> correlated_pair(CounterRng& rng, cplx rho) {
  const cplx z1 = rng.complex_gaussian();
  const cplx w = rng.complex_gaussian();
  const double r2 = std::norm(rho);
  const cplx z2 = std::conj(rho) * z1 + std::sqrt(std::max(0.0, 1.0 - r2)) * w;
  return {z1, z2};
}

}  // namespace detail

/*! Monte Carlo calibration of the selection oracle over a target grid u and a
 *  candidate-correlation grid (moduli; each nonzero modulus is tried at phases
 *  1, e(1/8), i and the worst phase governs).  Sets r0 as the smallest grid u
 *  with E|W_*−u| ≤ u − 1/4 at ρ = 0; then runs the (δ, ρ_H) fixed point:
 *  δ = half the worst margin u − E|Z_*−u| over u ≥ r0/2, ρ ≤ ρ_H, and ρ_H the
 *  largest grid modulus keeping the margin ≥ δ.  C_H is the centered
 *  log-MGF/λ² envelope over the qualifying grid; C_D adds the closed-form
 *  Rayleigh-step requirement on top.  Throws on calibration failure. */
inline OracleCalibration calibrate_oracle(std::uint64_t samples_per_point = 200000,
                                          std::vector<double> u_grid = {},
                                          std::vector<double> rho_grid = {},
                                          std::uint64_t seed = 20260823u) {
  if (samples_per_point < 100000)
    throw std::invalid_argument("calibrate_oracle: needs at least 1e5 samples per grid point");
  if (u_grid.empty())
    for (int i = 1; i <= 32; ++i) u_grid.push_back(0.25 * i);
  if (rho_grid.empty())
    for (int i = 0; i <= 9; ++i) rho_grid.push_back(0.1 * i);
  std::sort(u_grid.begin(), u_grid.end());
  std::sort(rho_grid.begin(), rho_grid.end());
  for (double u : u_grid)
    if (!(u > 0.0)) throw std::invalid_argument("calibrate_oracle: u grid must be positive");
  for (double r : rho_grid)
    if (!(r >= 0.0) || r >= 1.0)
      throw std::invalid_argument("calibrate_oracle: rho grid must lie in [0, 1)");

  const std::size_t nu = u_grid.size(), nr = rho_grid.size();
  const cplx phases[3] = {{1.0, 0.0}, unit_phase(0.125), {0.0, 1.0}};
  auto n_phases = [&](std::size_t ir) { return rho_grid[ir] == 0.0 ? std::size_t{1} : std::size_t{3}; };
  auto stream_of = [&](std::size_t iu, std::size_t ir, std::size_t ip) {
    return 0xCA1B000000ull + (iu * nr + ir) * 3 + ip;
  };

  // Pass 1: per-point means of |Z_* − u|.
  std::vector<double> mean(nu * nr * 3, 0.0), se(nu * nr * 3, 0.0);
  for (std::size_t iu = 0; iu < nu; ++iu) {
    const cplx u{u_grid[iu], 0.0};
    for (std::size_t ir = 0; ir < nr; ++ir) {
      for (std::size_t ip = 0; ip < n_phases(ir); ++ip) {
        CounterRng rng(seed, stream_of(iu, ir, ip));
        const cplx rho = rho_grid[ir] * phases[ip];
        RunningStat st;
        for (std::uint64_t t = 0; t < samples_per_point; ++t) {
          const auto [z1, z2] = detail::correlated_pair(rng, rho);
          st.add(std::abs(select_star(z1, z2, u) - u));
        }
        mean[(iu * nr + ir) * 3 + ip] = st.mean;
        se[(iu * nr + ir) * 3 + ip] = st.std_error();
      }
    }
  }
  auto worst_mean = [&](std::size_t iu, std::size_t ir) {
    double w = 0.0;
    for (std::size_t ip = 0; ip < n_phases(ir); ++ip)
      w = std::max(w, mean[(iu * nr + ir) * 3 + ip]);
    return w;
  };

  OracleCalibration out;
  out.samples_per_point = samples_per_point;
  out.seed = seed;
  out.u_grid = u_grid;
  out.rho_grid = rho_grid;

  // Capture radius at rho = 0.
  std::size_t i_r0 = nu;
  for (std::size_t iu = 0; iu < nu; ++iu)
    if (mean[(iu * nr + 0) * 3 + 0] <= u_grid[iu] - 0.25) { i_r0 = iu; break; }
  if (i_r0 == nu)
    throw std::runtime_error(
        "calibrate_oracle: no grid target satisfies E|W_*-u| <= u - 1/4 at rho = 0; "
        "extend the u grid upward before trusting any constant");
  out.r0 = u_grid[i_r0];
  out.capture_mean = mean[(i_r0 * nr + 0) * 3 + 0];
  out.capture_se = se[(i_r0 * nr + 0) * 3 + 0];

  // (delta, rho_H) fixed point over the qualifying grid u >= r0/2.
  auto margin_at = [&](std::size_t ir) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t iu = 0; iu < nu; ++iu)
      if (u_grid[iu] >= 0.5 * out.r0) m = std::min(m, u_grid[iu] - worst_mean(iu, ir));
    return m;
  };
  std::size_t i_rho = nr - 1;
  double delta = 0.0;
  for (int it = 0; it < 10; ++it) {
    ++out.iterations;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t ir = 0; ir <= i_rho; ++ir) worst = std::min(worst, margin_at(ir));
    delta = 0.5 * worst;
    if (!(delta > 0.0)) {
      if (i_rho == 0)
        throw std::runtime_error(
            "calibrate_oracle: margin u - E|Z_*-u| is nonpositive even at rho = 0; "
            "the target grid is outside the capture regime");
      --i_rho;
      continue;
    }
    std::size_t next = 0;
    for (std::size_t ir = 0; ir < nr; ++ir)
      if (margin_at(ir) >= delta) next = ir;
    if (next == i_rho) break;
    i_rho = next;
  }
  out.delta = delta;
  out.rho_H = rho_grid[i_rho];
  {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t wu = 0, wr = 0, wp = 0;
    for (std::size_t ir = 0; ir <= i_rho; ++ir)
      for (std::size_t iu = 0; iu < nu; ++iu) {
        if (u_grid[iu] < 0.5 * out.r0) continue;
        for (std::size_t ip = 0; ip < n_phases(ir); ++ip) {
          const double m = u_grid[iu] - mean[(iu * nr + ir) * 3 + ip];
          if (m < worst) { worst = m; wu = iu; wr = ir; wp = ip; }
        }
      }
    out.worst_margin = worst;
    out.worst_margin_se = se[(wu * nr + wr) * 3 + wp];
  }

  // Pass 2: centered MGF envelope and raw ψ₂ norm over the qualifying grid.
  std::vector<double> lambdas, psit;
  for (int i = 1; i <= 16; ++i) lambdas.push_back(0.25 * i);
  for (int i = 0; i < 16; ++i) psit.push_back(0.25 * std::pow(4.0 / 0.25, i / 15.0));
  double c_h = 0.0, psi2 = 0.0;
  for (std::size_t iu = 0; iu < nu; ++iu) {
    if (u_grid[iu] < 0.5 * out.r0) continue;
    const cplx u{u_grid[iu], 0.0};
    for (std::size_t ir = 0; ir <= i_rho; ++ir) {
      for (std::size_t ip = 0; ip < n_phases(ir); ++ip) {
        CounterRng rng(seed, stream_of(iu, ir, ip));
        const cplx rho = rho_grid[ir] * phases[ip];
        const double mu = mean[(iu * nr + ir) * 3 + ip];
        std::vector<KahanSum> mgf(lambdas.size());
        std::vector<double> psum(psit.size(), 0.0);  // plain sums: overflow to inf is benign
        for (std::uint64_t t = 0; t < samples_per_point; ++t) {
          const auto [z1, z2] = detail::correlated_pair(rng, rho);
          const double x = std::abs(select_star(z1, z2, u) - u) - mu;
          for (std::size_t i = 0; i < lambdas.size(); ++i) mgf[i].add(std::exp(lambdas[i] * x));
          const double xp = std::max(x, 0.0);
          for (std::size_t i = 0; i < psit.size(); ++i)
            psum[i] += std::exp(xp * xp / (psit[i] * psit[i]));
        }
        const double inv_n = 1.0 / static_cast<double>(samples_per_point);
        for (std::size_t i = 0; i < lambdas.size(); ++i)
          c_h = std::max(c_h, std::log(mgf[i].value() * inv_n) / (lambdas[i] * lambdas[i]));
        double tfit = psit.back();
        for (std::size_t i = 0; i < psit.size(); ++i)
          if (psum[i] * inv_n <= 2.0) { tfit = psit[i]; break; }
        psi2 = std::max(psi2, tfit);
      }
    }
  }
  out.C_H = c_h;
  out.sub_gaussian_norm = psi2;
  if (!(out.C_H > 0.0))
    throw std::runtime_error("calibrate_oracle: degenerate sub-gaussian fit");

  // Penalty rate: a step without a decorrelated partner contributes at most a
  // Rayleigh modulus, so C_D must satisfy E e^{λ(R − C_D)} ≤ e^{λ²C_H} on the
  // fit range, plus δ/2 headroom for the drift charge the step still makes.
  double need = 0.0;
  for (double l : lambdas)
    need = std::max(need, (std::log(detail::rayleigh_mgf(l)) - out.C_H * l * l) / l);
  out.C_D = 0.5 * out.delta + need;
  return out;
}

// ── decorrelated offsets ──────────────────────────────────────────────

/*! Per-block angular offsets 𝔱_k with |ρ_k(𝔱_k)| < ρ_H, plus the achieved
 *  autocorrelations.  Covers blocks m+1..n. */
struct OffsetPlan {
  int m = 0, n = 0, Q = 16;
  double rho_H = 0.0;
  std::vector<double> t;         // t[k−m−1] = 𝔱_k
  std::vector<double> achieved;  // |ρ_k(𝔱_k)|

  double offset_for(int k) const {
    if (k <= m || k > n) throw std::out_of_range("OffsetPlan: block outside plan");
    return t[static_cast<std::size_t>(k - m - 1)];
  }
  double achieved_for(int k) const {
    if (k <= m || k > n) throw std::out_of_range("OffsetPlan: block outside plan");
    return achieved[static_cast<std::size_t>(k - m - 1)];
  }
};

/*! Scans candidates 𝔱 = ±2^{−L(k−1)}·(q/Q), q ascending and + before −, and
 *  keeps the first with exact |ρ_k(𝔱)| < rho_H.  Fails loudly when no
 *  candidate decorrelates a block (remedy: increase the block exponent). */
inline OffsetPlan choose_offsets(const CoefficientModel& model, int m, int n, double rho_H,
                                 int Q = 16) {
  if (!(rho_H > 0.0)) throw std::invalid_argument("choose_offsets: rho_H must be positive");
  if (m < 0 || n <= m) throw std::invalid_argument("choose_offsets: need 0 <= m < n");
  OffsetPlan plan{m, n, Q, rho_H, {}, {}};
  const int L = model.block_exponent;
  for (int k = m + 1; k <= n; ++k) {
    const double base = std::ldexp(1.0, -L * (k - 1));
    bool found = false;
    double best = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= Q && !found; ++q) {
      for (int sign = 0; sign < 2 && !found; ++sign) {
        const double cand = (sign ? -1.0 : 1.0) * base * (static_cast<double>(q) / Q);
        const double r = std::abs(rho_k(model, k, cand));
        best = std::min(best, r);
        if (r < rho_H) {
          plan.t.push_back(cand);
          plan.achieved.push_back(r);
          found = true;
        }
      }
    }
    if (!found)
      throw std::runtime_error(
          "choose_offsets: no candidate decorrelates block k=" + std::to_string(k) +
          " (best |rho| = " + std::to_string(best) +
          " >= rho_H); increase the block exponent L");
  }
  return plan;
}

// ── the homing angle process ──────────────────────────────────────────

/*! Largest luck threshold η compatible with both √η ≤ δ/2 and C_H·√η ≤ 1/4. */
inline double default_eta(const ScaleConstants& c) {
  const double root = std::min(0.5 * c.delta, 0.25 / c.C_H);
  return root * root;
}

/*! Inputs of one homing run over blocks m+1..n toward the complex target u.
 *  The scale table must extend one block past n (the capture radius at the
 *  final step is measured in units of 𝔰_{n+1}). */
struct HomingConfig {
  ScaleTable table;
  OffsetPlan offsets;
  int m = 0, n = 0;
  cplx u{0.0, 0.0};
  double eta = 0.0;  // 0 selects default_eta(table.constants)
  double gamma = 0.125;
  double theta0 = 0.0;

  double eta_or_default() const { return eta > 0.0 ? eta : default_eta(table.constants); }

  void validate() const {
    if (m < 0 || n <= m) throw std::invalid_argument("HomingConfig: need 0 <= m < n");
    if (table.k_max < n + 1)
      throw std::invalid_argument("HomingConfig: scale table must extend one block past n");
    if (offsets.m > m || offsets.n < n)
      throw std::invalid_argument("HomingConfig: offset plan does not cover blocks m+1..n");
    const double e = eta_or_default();
    if (!(e > 0.0)) throw std::invalid_argument("HomingConfig: eta must be positive");
    if (std::sqrt(e) > 0.5 * table.constants.delta * (1.0 + 1e-12))
      throw std::invalid_argument("HomingConfig: sqrt(eta) must not exceed delta/2");
    if (!(gamma > 0.0) || !(gamma < 0.25))
      throw std::invalid_argument("HomingConfig: gamma must lie in (0, 1/4)");
  }
};

struct HomingStep {
  int k = 0;
  double angle = 0.0;        // 𝒜_k
  cplx H{0.0, 0.0};          // ℋ_k = F_{m,k}(𝒜_k)
  bool lucky = true;         // χ_k (true at k = n by convention)
  double offset_next = 0.0;  // 𝔱_{k+1} (0 at k = n)
  double dist = 0.0;         // |ℋ_k − u|
  double s_next = 0.0;       // 𝔰_{k+1}
  double L_acc = 0.0;        // L_{m,k}
  double V_acc = 0.0;        // V_{m,k}
  double D_acc = 0.0;        // D_{m,k}
  double M_ref = 0.0;        // stopped supermartingale value at lambda_ref
};

struct HomingTrace {
  int m = 0, n = 0;
  cplx u{0.0, 0.0};
  double eta = 0.0, gamma = 0.125, theta0 = 0.0;
  double lambda_ref = 0.0;  // L_{m,n}/(8·V_{m,n})
  int T = -1;               // first k with |ℋ_k − u| < r0·𝔰_{k+1}; −1 if never
  bool all_lucky = true;
  double final_angle = 0.0;
  double final_gap = 0.0;
  std::vector<HomingStep> steps;  // k = m..n

  const HomingStep& at(int k) const { return steps.at(static_cast<std::size_t>(k - m)); }
};

/*! Iterates the homing update: at state (𝒜_k, ℋ_k) the candidate angles are
 *  𝒜_k and 𝒜_k + 𝔱_{k+1}; the step moves toward the candidate whose block
 *  value has the larger projection on u − ℋ_k, and only when the luck flag
 *  χ_k = 1{|F_{m,k}(𝒜_k) − F_{m,k}(𝒜_k + 𝔱_{k+1})| ≤ √η·𝔰_{k+1}} permits.
 *  ℋ_{k+1} is recomputed as a full partial sum at 𝒜_{k+1}, never drifted
 *  incrementally. */
inline HomingTrace run_homing(const GafSample& sample, const HomingConfig& cfg) {
  cfg.validate();
  const ScaleTable& tab = cfg.table;
  const int L = sample.model.block_exponent;
  const int m = cfg.m, n = cfg.n;
  const double sqeta = std::sqrt(cfg.eta_or_default());

  HomingTrace tr;
  tr.m = m;
  tr.n = n;
  tr.u = cfg.u;
  tr.eta = cfg.eta_or_default();
  tr.gamma = cfg.gamma;
  tr.theta0 = cfg.theta0;
  tr.steps.reserve(static_cast<std::size_t>(n - m) + 1);

  double A = cfg.theta0;
  cplx H{0.0, 0.0};
  double Dacc = 0.0;
  for (int k = m; k <= n; ++k) {
    HomingStep st;
    st.k = k;
    st.angle = A;
    st.H = H;
    st.dist = std::abs(H - cfg.u);
    st.s_next = tab.frak_s(k + 1);
    st.L_acc = tab.drift_budget(m, k);
    st.V_acc = tab.variance_budget(m, k);
    st.D_acc = Dacc;
    if (k < n) {
      const double t = cfg.offsets.offset_for(k + 1);
      st.offset_next = t;
      const auto [plo, phi] = block_range(m, k, L);
      const cplx Ht = (k == m) ? cplx{0.0, 0.0} : eval_circle(sample, A + t, plo, phi);
      st.lucky = std::abs(H - Ht) <= sqeta * st.s_next;
      const auto [blo, bhi] = block_range(k, k + 1, L);
      const cplx Z1 = eval_circle(sample, A, blo, bhi);
      const cplx Z2 = eval_circle(sample, A + t, blo, bhi);
      const double xstar = select_star_index(Z1, Z2, cfg.u - H) ? t : 0.0;
      const double Anext = A + (st.lucky ? xstar : 0.0);
      if (!st.lucky) {
        Dacc += tab.constants.C_D * st.s_next;
        tr.all_lucky = false;
      }
      const auto [flo, fhi] = block_range(m, k + 1, L);
      H = eval_circle(sample, Anext, flo, fhi);
      A = Anext;
    }
    tr.steps.push_back(st);
  }
  tr.final_angle = tr.steps.back().angle;
  tr.final_gap = tr.steps.back().dist;

  const double V = tr.steps.back().V_acc;
  tr.lambda_ref = (V > 0.0) ? tr.steps.back().L_acc / (8.0 * V) : 0.0;
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    if (tr.steps[i].dist < tab.constants.r0 * tr.steps[i].s_next) {
      tr.T = tr.steps[i].k;
      break;
    }
  }
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const std::size_t j =
        (tr.T >= 0) ? std::min(i, static_cast<std::size_t>(tr.T - m)) : i;
    const HomingStep& s = tr.steps[j];
    const double l = tr.lambda_ref;
    tr.steps[i].M_ref = std::exp(l * (s.dist + s.L_acc - s.D_acc) - l * l * s.V_acc);
  }
  return tr;
}

/*! Trace dump, one row per block index: k, 𝒜_k, Re ℋ_k, Im ℋ_k, χ_k,
 *  |ℋ_k − u|, D_{m,k}. */
inline void write_trace_csv(std::ostream& os, const HomingTrace& tr) {
  os << "k,angle,re_h,im_h,chi,dist,d_budget\n";
  char buf[256];
  for (const HomingStep& s : tr.steps) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d,%.17g,%.17g\n", s.k, s.angle,
                  std::real(s.H), std::imag(s.H), s.lucky ? 1 : 0, s.dist, s.D_acc);
    os << buf;
  }
}

// ── per-block Hölder budgets along a trace ────────────────────────────

/*! Single-block Hölder constants Δ_k(𝒜_k, α) measured along a trace, with the
 *  suffix-weighted aggregates 𝔇⁰ and 𝔇¹.  With pair_points, every unlucky
 *  comparison pair {𝒜_j, 𝒜_j + 𝔱_{j+1}} is injected into each earlier block's
 *  window grid, which makes the measured constants dominate those oscillations
 *  exactly (the D-budget chain below is then provable per trace). */
struct HolderBudgets {
  int m = 0, n = 0, L = 1;
  double alpha = 4.0;
  int resolution = 64;
  bool pair_points = true;
  std::vector<double> delta;  // delta[k−m−1] = Δ_k(𝒜_k, α)

  double at(int k) const {
    if (k <= m || k > n) throw std::out_of_range("HolderBudgets: block outside range");
    return delta[static_cast<std::size_t>(k - m - 1)];
  }
  /*! 𝔇⁰_{j,n}(α) = Σ_{k=j+1}^n Δ_k. */
  double D0(int j) const {
    double s = 0.0;
    for (int k = j + 1; k <= n; ++k) s += at(k);
    return s;
  }
  /*! 𝔇¹_{m,j}(α) = Σ_{k=m+1}^j Δ_k·2^{−L(j−k)/2}. */
  double D1(int j) const {
    double s = 0.0;
    for (int k = m + 1; k <= j; ++k) s += at(k) * std::exp2(-0.5 * L * (j - k));
    return s;
  }
};

inline HolderBudgets collect_holder_budgets(const GafSample& sample, const HomingTrace& tr,
                                            double alpha = 4.0, int resolution = 64,
                                            bool pair_points = true) {
  const int L = sample.model.block_exponent;
  HolderBudgets hb{tr.m, tr.n, L, alpha, resolution, pair_points, {}};
  for (int k = tr.m + 1; k <= tr.n; ++k) {
    std::vector<WindowPoint> extra;
    if (pair_points) {
      const double unit = std::exp2(static_cast<double>(-L * k));
      for (int j = k; j < tr.n; ++j) {
        const HomingStep& s = tr.at(j);
        if (s.lucky) continue;
        const double psi = (s.angle - tr.at(k).angle) / unit;
        extra.push_back({psi, 0.0});
        extra.push_back({psi + s.offset_next / unit, 0.0});
      }
    }
    hb.delta.push_back(
        holder_estimate(sample, tr.at(k).angle, alpha, k - 1, k, resolution, extra).value);
  }
  return hb;
}

// ── success-rate experiment ───────────────────────────────────────────

struct SuccessOptions {
  double eta = 0.0;  // 0 → default_eta
  double theta0 = 0.0;
  int Q = 16;
  int holder_resolution = 64;
};

/*! Outcome of repeated homing runs toward u over blocks m+1..n.  The run is
 *  labeled out-of-hypothesis from the stricter drift guard
 *  L_{m,n} ≥ max{4|u|, √V_{m,n}} (the weaker 2|u| variant is reported too);
 *  labeling never aborts the experiment. */
struct SuccessReport {
  int m = 0, n = 0, trials = 0;
  cplx u{0.0, 0.0};
  double gamma = 0.125;
  double drift_budget = 0.0, variance_budget = 0.0;
  bool guard_2u_ok = true, guard_4u_ok = true, out_of_hypothesis = false;
  double threshold = 0.0;  // 2·𝔰_n^{1−γ}
  double rate = 0.0, rate_se = 0.0;
  double mean_gap = 0.0, mean_delta = 0.0;
  double gamma_ratio = 0.0, n_power = 0.0, decay_argument = 0.0;
  double fitted_c = 0.0, bound_reference = 0.0;
  std::vector<double> statistic;  // per-trial gap + Δ_{m,n}(𝒜_n, 1)

  /*! Success rate the same trials would have had at another gamma. */
  double rate_at_gamma(double g, double frak_s_n) const {
    const double thr = 2.0 * std::pow(frak_s_n, 1.0 - g);
    int c = 0;
    for (double s : statistic) c += (s <= thr) ? 1 : 0;
    return trials > 0 ? static_cast<double>(c) / trials : 0.0;
  }
};

/*! Fraction of trials with |ℋ_n − u| + Δ_{m,n}(𝒜_n, α=1) ≤ 2·𝔰_n^{1−γ},
 *  with the fitted decay constant of 1 − exp(−c·min{Γ_{m,n}, n^{γ/4}}). */
inline SuccessReport homing_success_rate(const ScaleTable& table, cplx u, int m, int n,
                                         double gamma, int trials, std::uint64_t seed,
                                         SuccessOptions opts = {}) {
  if (trials <= 0) throw std::invalid_argument("homing_success_rate: trials must be positive");
  SuccessReport rep;
  rep.m = m;
  rep.n = n;
  rep.trials = trials;
  rep.u = u;
  rep.gamma = gamma;
  rep.drift_budget = table.drift_budget(m, n);
  rep.variance_budget = table.variance_budget(m, n);
  const double au = std::abs(u);
  const double sv = std::sqrt(rep.variance_budget);
  rep.guard_2u_ok = rep.drift_budget >= std::max(2.0 * au, sv);
  rep.guard_4u_ok = rep.drift_budget >= std::max(4.0 * au, sv);
  rep.out_of_hypothesis = !rep.guard_4u_ok;
  rep.threshold = 2.0 * std::pow(table.frak_s(n), 1.0 - gamma);

  HomingConfig cfg;
  cfg.table = table;
  cfg.offsets = choose_offsets(table.model, m, n, table.constants.rho_H, opts.Q);
  cfg.m = m;
  cfg.n = n;
  cfg.u = u;
  cfg.eta = opts.eta;
  cfg.gamma = gamma;
  cfg.theta0 = opts.theta0;

  const CoefficientLaw law = CoefficientLaw::complex_gaussian();
  KahanSum gaps, deltas;
  int hits = 0;
  for (int t = 0; t < trials; ++t) {
    const GafSample s = make_sample(table.model, law, seed, static_cast<std::uint64_t>(t));
    const HomingTrace tr = run_homing(s, cfg);
    const double d =
        holder_estimate(s, tr.final_angle, 1.0, m, n, opts.holder_resolution).value;
    const double stat = tr.final_gap + d;
    rep.statistic.push_back(stat);
    gaps.add(tr.final_gap);
    deltas.add(d);
    hits += (stat <= rep.threshold) ? 1 : 0;
  }
  rep.rate = static_cast<double>(hits) / trials;
  rep.rate_se = std::sqrt(std::max(0.0, rep.rate * (1.0 - rep.rate) / trials));
  rep.mean_gap = gaps.value() / trials;
  rep.mean_delta = deltas.value() / trials;
  rep.gamma_ratio = table.gamma_ratio(m, n);
  rep.n_power = std::pow(static_cast<double>(n), 0.25 * gamma);
  rep.decay_argument = std::min(rep.gamma_ratio, rep.n_power);
  const double miss = std::max(1.0 - rep.rate, 0.5 / trials);
  rep.fitted_c = -std::log(miss) / rep.decay_argument;
  rep.bound_reference = std::exp(-rep.fitted_c * rep.decay_argument);
  return rep;
}

// ── stopped supermartingale diagnostics ───────────────────────────────

/*! Stopped exponential values ℳ_{k∧T} = exp(λ(|u−ℋ| + L − D) − λ²V) along one
 *  trace, for each λ in the grid (T from the trace). */
struct StoppedSupermartingale {
  int m = 0, n = 0, T = -1;
  std::vector<double> lambdas;
  std::vector<std::vector<double>> values;  // values[i][k−m]
};

inline StoppedSupermartingale supermartingale_check(const HomingTrace& tr,
                                                    const std::vector<double>& lambdas) {
  StoppedSupermartingale out;
  out.m = tr.m;
  out.n = tr.n;
  out.T = tr.T;
  out.lambdas = lambdas;
  out.values.resize(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    const double l = lambdas[i];
    out.values[i].reserve(tr.steps.size());
    for (std::size_t k = 0; k < tr.steps.size(); ++k) {
      const std::size_t j =
          (tr.T >= 0) ? std::min(k, static_cast<std::size_t>(tr.T - tr.m)) : k;
      const HomingStep& s = tr.steps[j];
      out.values[i].push_back(std::exp(l * (s.dist + s.L_acc - s.D_acc) - l * l * s.V_acc));
    }
  }
  return out;
}

struct SupermartingaleLambda {
  double lambda = 0.0;
  double max_violation_z = 0.0;  // max over k of mean(ℳ_{k+1∧T} − ℳ_{k∧T})/SE
  int argmax_k = -1;
  bool nonincreasing = true;  // within 2 standard errors at every k
};

struct SupermartingaleReport {
  int m = 0, n = 0, trials = 0;
  cplx u{0.0, 0.0};
  double lambda_star = 0.0;  // L_{m,n}/(8·V_{m,n})
  std::vector<SupermartingaleLambda> per_lambda;
  double max_violation_z = 0.0;
  bool ok = true;  // all paired-mean increments ≤ 2 standard errors
};

/*! Monte Carlo check that the empirical means of ℳ_{k∧T} are nonincreasing in
 *  k for each λ (within two standard errors of the paired increments).  The
 *  default grid brackets λ* = L_{m,n}/(8·V_{m,n}). */
inline SupermartingaleReport supermartingale_experiment(const ScaleTable& table, cplx u, int m,
                                                        int n, int trials, std::uint64_t seed,
                                                        std::vector<double> lambdas = {},
                                                        SuccessOptions opts = {}) {
  if (trials <= 1) throw std::invalid_argument("supermartingale_experiment: needs trials > 1");
  SupermartingaleReport rep;
  rep.m = m;
  rep.n = n;
  rep.trials = trials;
  rep.u = u;
  const double V = table.variance_budget(m, n);
  rep.lambda_star = (V > 0.0) ? table.drift_budget(m, n) / (8.0 * V) : 0.0;
  if (lambdas.empty())
    lambdas = {0.25 * rep.lambda_star, 0.5 * rep.lambda_star, rep.lambda_star,
               2.0 * rep.lambda_star};

  HomingConfig cfg;
  cfg.table = table;
  cfg.offsets = choose_offsets(table.model, m, n, table.constants.rho_H, opts.Q);
  cfg.m = m;
  cfg.n = n;
  cfg.u = u;
  cfg.eta = opts.eta;
  cfg.theta0 = opts.theta0;

  const std::size_t nk = static_cast<std::size_t>(n - m);
  std::vector<std::vector<RunningStat>> diff(lambdas.size(),
                                             std::vector<RunningStat>(nk));
  const CoefficientLaw law = CoefficientLaw::complex_gaussian();
  for (int t = 0; t < trials; ++t) {
    const GafSample s = make_sample(table.model, law, seed, static_cast<std::uint64_t>(t));
    const HomingTrace tr = run_homing(s, cfg);
    const StoppedSupermartingale sm = supermartingale_check(tr, lambdas);
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      for (std::size_t k = 0; k < nk; ++k)
        diff[i][k].add(sm.values[i][k + 1] - sm.values[i][k]);
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    SupermartingaleLambda pl;
    pl.lambda = lambdas[i];
    for (std::size_t k = 0; k < nk; ++k) {
      const double mu = diff[i][k].mean;
      const double se = diff[i][k].std_error();
      double z = 0.0;
      if (se > 0.0) z = mu / se;
      else if (mu > 0.0) z = std::numeric_limits<double>::infinity();
      if (z > pl.max_violation_z || pl.argmax_k < 0) {
        pl.max_violation_z = z;
        pl.argmax_k = m + static_cast<int>(k);
      }
    }
    pl.nonincreasing = pl.max_violation_z <= 2.0;
    rep.max_violation_z = std::max(rep.max_violation_z, pl.max_violation_z);
    rep.ok = rep.ok && pl.nonincreasing;
    rep.per_lambda.push_back(pl);
  }
  return rep;
}

// ── recursive homing net ──────────────────────────────────────────────

struct NetCaps {
  int max_points = 256;        // per-level cardinality cap (min with 2^{2^j})
  int arc_nodes = 4096;        // dyadic argmin grid per arc
  int holder_resolution = 64;  // window resolution for the Δ term
  double holder_alpha = 4.0;
  int rerank = 2;              // best-|F−w| candidates re-ranked with Δ added
  bool record_delta = true;    // measure Δ at every selected angle
  int j0 = 1;                  // first dyadic level index (ε_j = 2^{−2^{j−1}})
};

struct NetPoint {
  cplx x{0.0, 0.0};        // net coordinate in 𝔻(0,1)
  cplx target_u{0.0, 0.0};  // u_{j,q} = z_j + b_j·x
  cplx target_w{0.0, 0.0};  // level homing target
  double theta = 0.0;       // selected angle
  cplx value{0.0, 0.0};     // F_{0,scale}(θ) on the unit circle
  cplx level_value{0.0, 0.0};
  double gap = 0.0;        // |value − target_u|
  double level_gap = 0.0;  // |level_value − target_w|
  double delta_bound = std::numeric_limits<double>::quiet_NaN();
  double objective = 0.0;  // |level − w| (+ Δ when measured) at the selection
  double angle_resolution = 0.0;
  int parent = -1;
  double parent_dist = 0.0;
  bool success = false;  // gap ≤ 12·𝔰_scale^{1−γ}
};

struct NetLevel {
  int j = 0;           // dyadic level index
  int scale = 0;       // block count m_base^j
  double eps = 0.0;    // ideal net mesh ε_j = 2^{−2^{j−1}}
  double nu = 0.0;     // verified covering mesh of 𝔻(u,1) by the targets
  cplx z{0.0, 0.0};    // ramp center
  double b = 0.0;      // ramp radius factor
  bool capped = false;
  bool parent_coarse = false;
  bool arc_coarse = false;
  std::vector<NetPoint> points;
};

struct NetResult {
  cplx u{0.0, 0.0};
  int m_base = 2, j0 = 1, levels = 0;
  double gamma = 0.125;
  bool hypothesis_ok = false;  // m_base > max{1/a, 3^{4/γ}} — unreachable at desk scale
  double hypothesis_floor = 0.0;
  bool ramp_complete = false;
  bool degraded = false;
  double base_angle = 0.0;
  double base_objective = 0.0;
  std::vector<NetLevel> level;
};

namespace detail {

/*! Hexagonal ε-cover of the closed unit disk (outer lattice points projected
 *  to the boundary), sorted by modulus then angle; truncated to the budget. */
inline std::vector<cplx> disk_net(double eps, std::size_t budget, bool& capped) {
  const double s = eps * std::sqrt(3.0);  // nearest-neighbor spacing, covering radius eps
  const double row = 1.5 * eps;
  std::vector<cplx> pts;
  const int jmax = static_cast<int>(std::ceil((1.0 + s) / row));
  const int imax = static_cast<int>(std::ceil((1.0 + s) / s)) + 1;
  for (int j = -jmax; j <= jmax; ++j) {
    const double y = j * row;
    const double off = (j & 1) ? 0.5 * s : 0.0;
    for (int i = -imax; i <= imax; ++i) {
      const cplx p{i * s + off, y};
      const double r = std::abs(p);
      if (r <= 1.0)
        pts.push_back(p);
      else if (r <= 1.0 + eps)
        pts.push_back(p / r);
    }
  }
  std::sort(pts.begin(), pts.end(), [](cplx a, cplx b) {
    const double ra = std::abs(a), rb = std::abs(b);
    if (ra != rb) return ra < rb;
    return std::arg(a) < std::arg(b);
  });
  capped = pts.size() > budget;
  if (capped) pts.resize(budget);
  return pts;
}

/*! min(2^{2^j}, cap), guarding the shift against overflow. */
inline std::size_t net_budget(int j, int cap) {
  std::size_t card = std::numeric_limits<std::size_t>::max();
  if (j <= 5) card = std::size_t{1} << (std::size_t{1} << j);
  return std::min(card, static_cast<std::size_t>(cap));
}

/*! Golden-section minimization of f on [a, b] (unimodal near the optimum). */
template <class F>
inline double golden_min(F&& f, double a, double b, int iters, double& width) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  width = b - a;
  return f1 < f2 ? x1 : x2;
}

/*! Verified covering mesh: max over a probe cover of 𝔻(center,1) of the
 *  distance to the target set, plus the probe cover's own mesh. */
inline double covering_mesh(cplx center, const std::vector<cplx>& targets) {
  if (targets.empty()) return std::numeric_limits<double>::infinity();
  const int nr = 33, na = 128;
  double worst = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = static_cast<double>(i) / (nr - 1);
    for (int a = 0; a < na; ++a) {
      const cplx y = center + r * unit_phase(static_cast<double>(a) / na);
      double best = std::numeric_limits<double>::infinity();
      for (cplx t : targets) best = std::min(best, std::abs(y - t));
      worst = std::max(worst, best);
    }
  }
  const double dr = 0.5 / (nr - 1);
  const double da = std::numbers::pi / na;  // r·(half angular step in radians) ≤ π/na
  return worst + std::sqrt(dr * dr + da * da);
}

}  // namespace detail

/*! Recursive homing-net construction: a base angle minimizing |F_{0,m^{j0}}|
 *  (+ Δ) over the full circle, then per level a capped ε_j-net of 𝔻(0,1),
 *  parent selection by nearest net coordinate, homing targets
 *  w = u_q − F_{0,m^j}(θ_parent), and child angles minimizing
 *  |F_{m^j,m^{j+1}}(θ) − w| (+ Δ) over the arc |e(θ) − e(θ_parent)| ≤
 *  2^{−L·m^j+1} on a dyadic grid with golden-section refinement.  The ramp
 *  (z_j, b_j) moves from (0,0) toward (u,1) by at most L_{m^j,m^{j+1}}/6 per
 *  level in |Δz| + |Δb|; hitting a cardinality cap, a coarse parent, or a
 *  coarse arc grid only sets degraded-mode flags. */
inline NetResult build_net(const GafSample& sample, const ScaleTable& table, cplx u,
                           int j_levels, int m_base = 2, double gamma = 0.125,
                           NetCaps caps = {}) {
  if (j_levels < 1) throw std::invalid_argument("build_net: needs at least one level");
  if (m_base < 2) throw std::invalid_argument("build_net: m_base must be at least 2");
  if (!(gamma > 0.0) || !(gamma < 0.25))
    throw std::invalid_argument("build_net: gamma must lie in (0, 1/4)");
  const int L = sample.model.block_exponent;
  long long top_scale = 1;
  for (int i = 0; i < caps.j0 - 1 + j_levels; ++i) {
    top_scale *= m_base;
    if (top_scale > table.k_max)
      throw std::invalid_argument("build_net: scale table too small for the level scales");
  }
  {
    const auto [lo, hi] = block_range(0, static_cast<int>(top_scale), L);
    (void)lo;
    if (hi - 1 > sample.model.n_max)
      throw std::invalid_argument("build_net: sample truncation below the top level scale");
  }

  NetResult net;
  net.u = u;
  net.m_base = m_base;
  net.j0 = caps.j0;
  net.levels = j_levels;
  net.gamma = gamma;
  {
    const double a = table.monotone_window(static_cast<int>(top_scale));
    net.hypothesis_floor = std::max(1.0 / a, std::pow(3.0, 4.0 / gamma));
    net.hypothesis_ok = static_cast<double>(m_base) > net.hypothesis_floor;
  }

  const double need = std::abs(u) + 1.0;  // total ramp travel in |Δz| + |Δb|
  double t_ramp = 0.0;

  int scale = 1;
  for (int i = 0; i < caps.j0; ++i) scale *= m_base;

  // Base level: one angle for the whole (degenerate, target-0) base net.
  NetLevel base;
  base.j = caps.j0;
  base.scale = scale;
  base.eps = std::exp2(-std::exp2(static_cast<double>(caps.j0 - 1)));
  base.z = {0.0, 0.0};
  base.b = 0.0;
  {
    const auto [lo, hi] = block_range(0, scale, L);
    const std::uint64_t G =
        std::max<std::uint64_t>(static_cast<std::uint64_t>(caps.arc_nodes),
                                next_pow2(2 * (hi > lo ? hi - 1 : 1)));
    const CircleGrid grid = eval_grid(sample, 1.0, G, 0, scale);
    std::vector<std::pair<double, std::uint64_t>> ranked;
    ranked.reserve(G);
    for (std::uint64_t g = 0; g < G; ++g) ranked.push_back({std::abs(grid.values[g]), g});
    std::sort(ranked.begin(), ranked.end());
    const int keep = std::max(1, std::min<int>(caps.rerank + 1, static_cast<int>(G)));
    double best_obj = std::numeric_limits<double>::infinity();
    std::uint64_t best_g = ranked[0].second;
    for (int c = 0; c < keep; ++c) {
      double obj = ranked[static_cast<std::size_t>(c)].first;
      if (caps.rerank > 0)
        obj += holder_estimate(sample, static_cast<double>(ranked[static_cast<std::size_t>(c)].second) / G,
                               caps.holder_alpha, 0, scale, caps.holder_resolution)
                   .value;
      if (obj < best_obj) {
        best_obj = obj;
        best_g = ranked[static_cast<std::size_t>(c)].second;
      }
    }
    const double step = 1.0 / static_cast<double>(G);
    const double th0 = static_cast<double>(best_g) / G;
    double width = 0.0;
    auto f = [&](double th) { return std::abs(eval_circle(sample, th, lo, hi)); };
    net.base_angle = detail::golden_min(f, th0 - step, th0 + step, 30, width);
    net.base_objective = best_obj;

    bool capped = false;
    const std::vector<cplx> xs =
        detail::disk_net(base.eps, detail::net_budget(caps.j0, caps.max_points), capped);
    base.capped = capped;
    const cplx v = eval_circle(sample, net.base_angle, lo, hi);
    const double thr = 12.0 * std::pow(table.frak_s(scale), 1.0 - gamma);
    double db = std::numeric_limits<double>::quiet_NaN();
    if (caps.record_delta)
      db = holder_estimate(sample, net.base_angle, caps.holder_alpha, 0, scale,
                           caps.holder_resolution)
               .value;
    for (cplx x : xs) {
      NetPoint p;
      p.x = x;
      p.target_u = {0.0, 0.0};
      p.target_w = {0.0, 0.0};
      p.theta = net.base_angle;
      p.value = v;
      p.level_value = v;
      p.gap = std::abs(v);
      p.level_gap = p.gap;
      p.delta_bound = db;
      p.objective = net.base_objective;
      p.angle_resolution = width;
      p.parent = -1;
      p.success = p.gap <= thr;
      base.points.push_back(p);
    }
    std::vector<cplx> targets(base.points.size(), cplx{0.0, 0.0});
    base.nu = detail::covering_mesh(u, targets);
  }
  net.degraded = base.capped;
  net.level.push_back(std::move(base));

  for (int lev = 1; lev < j_levels; ++lev) {
    const NetLevel& par = net.level.back();
    NetLevel cur;
    cur.j = caps.j0 + lev;
    const int pscale = par.scale;
    cur.scale = pscale * m_base;
    cur.eps = std::exp2(-std::exp2(static_cast<double>(cur.j - 1)));

    const double budget = table.drift_budget(pscale, cur.scale) / 6.0;
    t_ramp = std::min(1.0, t_ramp + budget / need);
    cur.z = t_ramp * u;
    cur.b = t_ramp;

    bool capped = false;
    const std::vector<cplx> xs =
        detail::disk_net(cur.eps, detail::net_budget(cur.j, caps.max_points), capped);
    cur.capped = capped;

    const auto [lo, hi] = block_range(pscale, cur.scale, L);
    const auto [flo, fhi] = block_range(0, cur.scale, L);
    const std::vector<cplx> coeffs = radial_coeffs(sample, 1.0, lo, hi);
    const double halfw =
        std::asin(std::min(1.0, std::exp2(static_cast<double>(-L * pscale)))) / std::numbers::pi;
    const int N = std::max(16, caps.arc_nodes);
    const double gstep = 2.0 * halfw / N;
    cur.arc_coarse = gstep > std::exp2(static_cast<double>(-L * cur.scale));
    const double thr = 12.0 * std::pow(table.frak_s(cur.scale), 1.0 - gamma);
    const double eps_par = par.eps;

    for (cplx x : xs) {
      NetPoint p;
      p.x = x;
      int best_q = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t q = 0; q < par.points.size(); ++q) {
        const double d = std::abs(x - par.points[q].x);
        if (d < best_d) {
          best_d = d;
          best_q = static_cast<int>(q);
        }
      }
      p.parent = best_q;
      p.parent_dist = best_d;
      if (best_d > eps_par * (1.0 + 1e-9)) cur.parent_coarse = true;
      const NetPoint& pp = par.points[static_cast<std::size_t>(best_q)];
      p.target_u = cur.z + cur.b * x;
      p.target_w = p.target_u - pp.value;

      int best_t = 0;
      double best_f = std::numeric_limits<double>::infinity();
      std::vector<std::pair<double, int>> vals(static_cast<std::size_t>(N) + 1);
      for (int tnode = 0; tnode <= N; ++tnode) {
        const double th = pp.theta + (tnode * gstep - halfw);
        const double fv = std::abs(detail::rotate_sum(coeffs, lo, th) - p.target_w);
        vals[static_cast<std::size_t>(tnode)] = {fv, tnode};
        if (fv < best_f) {
          best_f = fv;
          best_t = tnode;
        }
      }
      if (caps.rerank > 0) {
        std::sort(vals.begin(), vals.end());
        const int keep = std::min<int>(caps.rerank + 1, static_cast<int>(vals.size()));
        double best_obj = std::numeric_limits<double>::infinity();
        for (int c = 0; c < keep; ++c) {
          const double th = pp.theta + (vals[static_cast<std::size_t>(c)].second * gstep - halfw);
          const double obj = vals[static_cast<std::size_t>(c)].first +
                             holder_estimate(sample, th, caps.holder_alpha, pscale, cur.scale,
                                             caps.holder_resolution)
                                 .value;
          if (obj < best_obj) {
            best_obj = obj;
            best_t = vals[static_cast<std::size_t>(c)].second;
            best_f = vals[static_cast<std::size_t>(c)].first;
          }
        }
      }
      const double thb = pp.theta + (best_t * gstep - halfw);
      double width = 0.0;
      auto f = [&](double th) { return std::abs(detail::rotate_sum(coeffs, lo, th) - p.target_w); };
      p.theta = detail::golden_min(f, thb - gstep, thb + gstep, 30, width);
      p.angle_resolution = width;
      p.level_value = detail::rotate_sum(coeffs, lo, p.theta);
      p.level_gap = std::abs(p.level_value - p.target_w);
      p.value = eval_circle(sample, p.theta, flo, fhi);
      p.gap = std::abs(p.value - p.target_u);
      p.success = p.gap <= thr;
      if (caps.record_delta)
        p.delta_bound = holder_estimate(sample, p.theta, caps.holder_alpha, pscale, cur.scale,
                                        caps.holder_resolution)
                            .value;
      p.objective = p.level_gap + (caps.record_delta ? p.delta_bound : 0.0);
      cur.points.push_back(p);
    }
    std::vector<cplx> targets;
    targets.reserve(cur.points.size());
    for (const NetPoint& p : cur.points) targets.push_back(p.target_u);
    cur.nu = detail::covering_mesh(u, targets);
    net.degraded = net.degraded || cur.capped || cur.parent_coarse || cur.arc_coarse;
    net.level.push_back(std::move(cur));
  }
  net.ramp_complete = t_ramp >= 1.0 - 1e-12;
  return net;
}

}  // namespace gafcover
