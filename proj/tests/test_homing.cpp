#include "gafcover/homing.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

namespace gc = gafcover;

namespace {

gc::CoefficientModel model_of(double alpha, double beta, int L, std::uint64_t n_max,
                              gc::SlowVariation omega = gc::SlowVariation::constant(1.0)) {
  gc::CoefficientModel m;
  m.alpha = alpha;
  m.beta = beta;
  m.omega = omega;
  m.block_exponent = L;
  m.n_max = n_max;
  return m;
}

/*! Critical-regular model at beta = 1 with the placeholder budget constants. */
gc::ScaleTable table_of(int L, std::uint64_t n_max) {
  return gc::build_scales(model_of(0.5, 1.0, L, n_max));
}

}  // namespace

// ── candidate selection ───────────────────────────────────────────────

TEST(SelectStar, PicksLargerProjection) {
  const gc::cplx one{1.0, 0.0}, im{0.0, 1.0};

  EXPECT_EQ(gc::select_star_index({1.0, 0.0}, {2.0, 0.0}, one), 1);
  EXPECT_EQ(gc::select_star_index({2.0, 0.0}, {1.0, 0.0}, one), 0);
  EXPECT_EQ(gc::select_star_index({-3.0, 0.0}, {-1.0, 0.0}, one), 1);

  // Only the component along u matters: Re(conj(i)·5) = 0 < Re(conj(i)·i) = 1.
  EXPECT_EQ(gc::select_star_index({5.0, 0.0}, {0.0, 1.0}, im), 1);
  EXPECT_EQ(gc::select_star_index({0.0, 2.0}, {7.0, 1.0}, im), 0);

  // Ties and u = 0 keep the first candidate.
  EXPECT_EQ(gc::select_star_index({1.0, 1.0}, {1.0, -1.0}, one), 0);
  EXPECT_EQ(gc::select_star_index({0.0, 0.0}, {9.0, 9.0}, {0.0, 0.0}), 0);

  const gc::cplx z1{0.5, -0.25}, z2{1.5, 4.0};
  EXPECT_EQ(gc::select_star(z1, z2, one), z2);
  EXPECT_EQ(gc::select_star(z1, z2, {0.0, 0.0}), z1);
}

TEST(SelectOracle, ClosedFormMomentsAtSeven) {
  // For two independent standard complex Gaussians and a real target u, the
  // selected candidate has Re W_* = max of two N(0, 1/2) draws, so
  // E|W_* - u|^2 = u^2 + 1 - u*sqrt(2/pi) exactly.
  const double u = 7.0;
  const double second_moment = 44.414808074379945;  // 50 - 7*sqrt(2/pi)
  gc::CounterRng rng(7201u, 0u);
  gc::RunningStat m1, m2;
  for (int t = 0; t < 400000; ++t) {
    const auto [z1, z2] = gc::detail::correlated_pair(rng, {0.0, 0.0});
    const double d = std::abs(gc::select_star(z1, z2, {u, 0.0}) - gc::cplx{u, 0.0});
    m1.add(d);
    m2.add(d * d);
  }
  EXPECT_NEAR(m2.mean, second_moment, 5.0 * m2.std_error())
      << "second moment off by " << m2.mean - second_moment;
  EXPECT_LE(m1.mean, u - 0.25) << "selection fails the capture margin at u = 7";
}

TEST(SelectOracle, ZeroTargetKeepsFirstCandidate) {
  // u = 0 keeps Z1, whose modulus has mean sqrt(pi)/2.
  const double expected = 0.886226925452758014;
  gc::CounterRng rng(7202u, 0u);
  gc::RunningStat st;
  for (int t = 0; t < 200000; ++t) {
    const auto [z1, z2] = gc::detail::correlated_pair(rng, {0.3, 0.0});
    st.add(std::abs(gc::select_star(z1, z2, {0.0, 0.0})));
  }
  EXPECT_NEAR(st.mean, expected, 5.0 * st.std_error());
}

// ── oracle calibration ────────────────────────────────────────────────

TEST(Calibrate, ReproducibleAndSane) {
  const std::vector<double> us{2.0, 2.5, 3.0, 3.5, 4.0, 5.0, 7.0};
  const std::vector<double> rhos{0.0, 0.3, 0.6};
  const gc::OracleCalibration a = gc::calibrate_oracle(100000, us, rhos, 42u);
  const gc::OracleCalibration b = gc::calibrate_oracle(100000, us, rhos, 42u);

  EXPECT_EQ(a.r0, b.r0);
  EXPECT_EQ(a.delta, b.delta);
  EXPECT_EQ(a.rho_H, b.rho_H);
  EXPECT_EQ(a.C_H, b.C_H);
  EXPECT_EQ(a.C_D, b.C_D);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  EXPECT_EQ(a.sub_gaussian_norm, b.sub_gaussian_norm);

  EXPECT_GE(a.r0, 2.0);
  EXPECT_LE(a.r0, 4.0);
  EXPECT_LE(a.capture_mean, a.r0 - 0.25);
  EXPECT_GT(a.delta, 0.01);
  EXPECT_LT(a.delta, 0.5);
  EXPECT_NEAR(a.worst_margin, 2.0 * a.delta, 1e-12);
  bool on_grid = false;
  for (double r : rhos) on_grid = on_grid || r == a.rho_H;
  EXPECT_TRUE(on_grid);
  EXPECT_GE(a.rho_H, 0.3);
  EXPECT_GT(a.C_H, 0.0);
  EXPECT_LT(a.C_H, 2.0);
  EXPECT_GT(a.C_D, 0.5 * a.delta);
  EXPECT_LT(a.C_D, 2.0);
  EXPECT_GT(a.sub_gaussian_norm, 0.0);
  EXPECT_GE(a.iterations, 1);
  EXPECT_EQ(a.samples_per_point, 100000u);

  const gc::ScaleConstants c = a.constants();
  EXPECT_EQ(c.delta, a.delta);
  EXPECT_EQ(c.C_H, a.C_H);
  EXPECT_EQ(c.C_D, a.C_D);
  EXPECT_EQ(c.r0, a.r0);
  EXPECT_EQ(c.rho_H, a.rho_H);

  EXPECT_THROW(gc::calibrate_oracle(50000, us, rhos, 42u), std::invalid_argument);
  EXPECT_THROW(gc::calibrate_oracle(100000, {-1.0}, rhos, 42u), std::invalid_argument);
  EXPECT_THROW(gc::calibrate_oracle(100000, us, {1.0}, 42u), std::invalid_argument);
  // No target this small captures: E|W_* - 0.25| > 0 = u - 1/4.
  EXPECT_THROW(gc::calibrate_oracle(100000, {0.25}, {0.0}, 42u), std::runtime_error);
}

// ── decorrelated offsets ──────────────────────────────────────────────

TEST(Offsets, UndominatedFirstBlockFailsLoudly) {
  // At L = 1 the first block is a single frequency, so |rho_1| = 1 for every
  // candidate; at L = 2 its dominant coefficient still keeps |rho_1| > 0.6.
  EXPECT_THROW(gc::choose_offsets(model_of(0.5, 1.0, 1, 1u << 10), 0, 3, 0.6),
               std::runtime_error);
  EXPECT_THROW(gc::choose_offsets(model_of(0.5, 1.0, 2, 1u << 10), 0, 3, 0.6),
               std::runtime_error);

  // Starting one block later works even at L = 1.
  const gc::CoefficientModel m = model_of(0.5, 1.0, 1, 1u << 10);
  const gc::OffsetPlan plan = gc::choose_offsets(m, 1, 4, 0.6);
  EXPECT_EQ(plan.m, 1);
  EXPECT_EQ(plan.n, 4);
  ASSERT_EQ(plan.t.size(), 3u);
  for (int k = 2; k <= 4; ++k) {
    const double t = plan.offset_for(k);
    EXPECT_LE(std::abs(t), std::ldexp(1.0, -(k - 1)));
    EXPECT_GT(std::abs(t), 0.0);
    EXPECT_LT(plan.achieved_for(k), 0.6);
    EXPECT_DOUBLE_EQ(plan.achieved_for(k), std::abs(gc::rho_k(m, k, t)));
  }
  EXPECT_THROW(plan.offset_for(1), std::out_of_range);
  EXPECT_THROW(plan.offset_for(5), std::out_of_range);
  EXPECT_THROW(gc::choose_offsets(m, 1, 4, 0.0), std::invalid_argument);
  EXPECT_THROW(gc::choose_offsets(m, 3, 3, 0.6), std::invalid_argument);
}

TEST(Offsets, DecorrelationImprovesWithBlockExponent) {
  // The best candidate autocorrelation of a fixed block shrinks as the block
  // exponent grows (wider blocks decorrelate under smaller relative shifts).
  std::vector<double> best;
  for (int L = 3; L <= 6; ++L) {
    const gc::CoefficientModel m = model_of(0.5, 1.0, L, 1ull << 18);
    double b = 2.0;
    for (int q = 1; q <= 16; ++q) {
      for (int sign = 0; sign < 2; ++sign) {
        const double t = (sign ? -1.0 : 1.0) * std::ldexp(1.0, -2 * L) * (q / 16.0);
        b = std::min(b, std::abs(gc::rho_k(m, 3, t)));
      }
    }
    best.push_back(b);

    const gc::OffsetPlan plan = gc::choose_offsets(m, 2, 3, 0.6);
    EXPECT_LT(plan.achieved_for(3), 0.6) << "L = " << L;
    EXPECT_LE(std::abs(plan.offset_for(3)), std::ldexp(1.0, -2 * L));
  }
  EXPECT_LT(best.back(), best.front());
  for (double b : best) EXPECT_LT(b, 0.6);
}

// ── the homing process ────────────────────────────────────────────────

TEST(HomingTrace, StepAndBudgetInvariants) {
  const gc::ScaleTable tab = table_of(2, 1u << 14);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 6, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 6;
  cfg.u = {1.0, 0.5};
  cfg.theta0 = 0.2;

  const gc::CoefficientLaw law = gc::CoefficientLaw::complex_gaussian();
  const double sqeta = std::sqrt(cfg.eta_or_default());
  const int L = tab.model.block_exponent;
  for (std::uint64_t trial = 0; trial < 6; ++trial) {
    const gc::GafSample s = gc::make_sample(tab.model, law, 7101u, trial);
    const gc::HomingTrace tr = gc::run_homing(s, cfg);

    ASSERT_EQ(tr.steps.size(), 6u);
    EXPECT_EQ(tr.steps.front().k, 1);
    EXPECT_EQ(tr.steps.back().k, 6);
    EXPECT_EQ(tr.steps.front().H, gc::cplx(0.0, 0.0));
    EXPECT_DOUBLE_EQ(tr.steps.front().dist, std::abs(cfg.u));
    EXPECT_EQ(tr.steps.front().L_acc, 0.0);
    EXPECT_EQ(tr.steps.front().V_acc, 0.0);
    EXPECT_EQ(tr.steps.front().D_acc, 0.0);
    EXPECT_DOUBLE_EQ(tr.final_angle, tr.steps.back().angle);
    EXPECT_DOUBLE_EQ(tr.final_gap, tr.steps.back().dist);

    double d_running = 0.0;
    bool all_lucky = true;
    for (int k = 1; k <= 6; ++k) {
      const gc::HomingStep& st = tr.at(k);
      EXPECT_EQ(st.k, k);
      EXPECT_DOUBLE_EQ(st.s_next, tab.frak_s(k + 1));
      EXPECT_DOUBLE_EQ(st.L_acc, tab.drift_budget(1, k));
      EXPECT_DOUBLE_EQ(st.V_acc, tab.variance_budget(1, k));
      EXPECT_DOUBLE_EQ(st.D_acc, d_running);
      EXPECT_GT(st.M_ref, 0.0);

      // Recompute the state with the plain per-term evaluator.
      const auto [lo, hi] = gc::block_range(1, k, L);
      const gc::cplx H =
          (k == 1) ? gc::cplx{0.0, 0.0} : gc::eval_freq_range(s, st.angle, 1.0, lo, hi);
      EXPECT_NEAR(std::abs(st.H - H), 0.0, 1e-9);
      EXPECT_NEAR(st.dist, std::abs(st.H - cfg.u), 1e-15);

      if (k == 6) break;
      EXPECT_DOUBLE_EQ(st.offset_next, cfg.offsets.offset_for(k + 1));

      // Luck flag: the state must be insensitive to the offset.
      const gc::cplx Ht = (k == 1) ? gc::cplx{0.0, 0.0}
                                   : gc::eval_freq_range(s, st.angle + st.offset_next, 1.0, lo, hi);
      const double move = std::abs(st.H - Ht);
      const double thr = sqeta * st.s_next;
      if (std::abs(move - thr) > 1e-9)
        EXPECT_EQ(st.lucky, move <= thr) << "trial " << trial << " k " << k;
      if (!st.lucky) {
        d_running += tab.constants.C_D * st.s_next;
        all_lucky = false;
      }

      // Step size and selection direction.
      const double da = tr.at(k + 1).angle - st.angle;
      const bool stayed = da == 0.0;
      if (!stayed) {
        EXPECT_TRUE(st.lucky);
        EXPECT_NEAR(da, st.offset_next, 1e-12);
      }
      const auto [blo, bhi] = gc::block_range(k, k + 1, L);
      const gc::cplx Z1 = gc::eval_freq_range(s, st.angle, 1.0, blo, bhi);
      const gc::cplx Z2 = gc::eval_freq_range(s, st.angle + st.offset_next, 1.0, blo, bhi);
      const double gain = std::real(std::conj(cfg.u - st.H) * (Z2 - Z1));
      if (st.lucky && std::abs(gain) > 1e-9) {
        if (stayed) EXPECT_LE(gain, 0.0) << "trial " << trial << " k " << k;
        else EXPECT_GE(gain, 0.0) << "trial " << trial << " k " << k;
      }
    }
    EXPECT_EQ(tr.all_lucky, all_lucky);

    // Capture time: first state within r0 block-scale units of the target.
    int expect_T = -1;
    for (int k = 1; k <= 6; ++k)
      if (tr.at(k).dist < tab.constants.r0 * tr.at(k).s_next) { expect_T = k; break; }
    EXPECT_EQ(tr.T, expect_T);
    if (tr.T >= 0)
      for (int k = tr.T; k <= 6; ++k)
        EXPECT_DOUBLE_EQ(tr.at(k).M_ref, tr.at(tr.T).M_ref);

    const double V = tr.steps.back().V_acc;
    EXPECT_DOUBLE_EQ(tr.lambda_ref, tr.steps.back().L_acc / (8.0 * V));
  }

  // Total drift from a later start stays below twice the first offset scale.
  gc::HomingConfig cfg2 = cfg;
  cfg2.m = 2;
  cfg2.offsets = gc::choose_offsets(tab.model, 2, 6, tab.constants.rho_H);
  for (std::uint64_t trial = 0; trial < 4; ++trial) {
    const gc::GafSample s = gc::make_sample(tab.model, law, 7101u, trial);
    const gc::HomingTrace tr = gc::run_homing(s, cfg2);
    EXPECT_LE(std::abs(tr.final_angle - cfg2.theta0), std::ldexp(1.0, -2 * 2 + 1));
  }
}

TEST(HomingTrace, ZeroSampleDegenerates) {
  const gc::ScaleTable tab = table_of(2, 1u << 10);
  const gc::GafSample z = gc::make_zero_sample(tab.model);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 4, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 4;
  cfg.theta0 = 0.3;

  {
    cfg.u = {0.0, 0.0};
    const gc::HomingTrace tr = gc::run_homing(z, cfg);
    EXPECT_EQ(tr.T, 1);
    EXPECT_TRUE(tr.all_lucky);
    EXPECT_EQ(tr.final_gap, 0.0);
    for (const gc::HomingStep& st : tr.steps) {
      EXPECT_EQ(st.angle, 0.3);
      EXPECT_EQ(st.H, gc::cplx(0.0, 0.0));
      EXPECT_EQ(st.D_acc, 0.0);
      EXPECT_DOUBLE_EQ(st.M_ref, tr.steps.front().M_ref);
    }
  }
  {
    cfg.u = {9.0, 0.0};
    const gc::HomingTrace tr = gc::run_homing(z, cfg);
    EXPECT_EQ(tr.T, -1);  // never within r0 * frak_s of a distant target
    EXPECT_EQ(tr.final_gap, 9.0);
    for (const gc::HomingStep& st : tr.steps) {
      const double l = tr.lambda_ref;
      EXPECT_DOUBLE_EQ(st.M_ref, std::exp(l * (9.0 + st.L_acc) - l * l * st.V_acc));
    }
  }
}

TEST(HomingTrace, CsvGolden) {
  const gc::ScaleTable tab = table_of(2, 1u << 8);
  const gc::GafSample z = gc::make_zero_sample(tab.model);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 3, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 3;

  std::ostringstream os;
  gc::write_trace_csv(os, gc::run_homing(z, cfg));
  EXPECT_EQ(os.str(),
            "k,angle,re_h,im_h,chi,dist,d_budget\n"
            "1,0,0,0,1,0,0\n"
            "2,0,0,0,1,0,0\n"
            "3,0,0,0,1,0,0\n");
}

// ── per-block budgets along a trace ───────────────────────────────────

TEST(HolderBudgets, UnluckyChainBounds) {
  gc::ScaleConstants loose;  // wide margin so the explicit eta below is admissible
  loose.delta = 0.17;
  const gc::ScaleTable tab =
      gc::build_scales(model_of(0.5, 1.0, 2, 1u << 12), loose);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 5, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 5;
  cfg.u = {1.0, -0.5};
  cfg.eta = 1e-4;  // tight luck threshold: most steps charge the D budget

  const gc::CoefficientLaw law = gc::CoefficientLaw::complex_gaussian();
  const int L = tab.model.block_exponent;
  const double geo = 1.0 / (1.0 - std::exp2(-0.5 * L));
  bool saw_unlucky = false;
  for (std::uint64_t trial = 0; trial < 2; ++trial) {
    const gc::GafSample s = gc::make_sample(tab.model, law, 7102u, trial);
    const gc::HomingTrace tr = gc::run_homing(s, cfg);
    const gc::HolderBudgets hb = gc::collect_holder_budgets(s, tr, 4.0, 64, true);

    ASSERT_EQ(hb.delta.size(), 4u);
    for (int k = 2; k <= 5; ++k) EXPECT_GT(hb.at(k), 0.0);

    // Every unlucky step is certified by the measured block moduli: the luck
    // statistic at step j is at most sum_k Delta_k * 2^{-L(j-k)/2}, because
    // both comparison angles were injected into each block's pair grid.
    for (int j = 2; j < 5; ++j) {
      const gc::HomingStep& st = tr.at(j);
      if (st.lucky) continue;
      saw_unlucky = true;
      double dom = 0.0;
      for (int k = 2; k <= j; ++k) dom += hb.at(k) * std::exp2(-0.5 * L * (j - k));
      EXPECT_LE(std::sqrt(tr.eta) * st.s_next, dom * (1.0 + 1e-9) + 1e-9)
          << "trial " << trial << " step " << j;
    }

    // Aggregate D-budget chain, and its split at an intermediate block.
    const double d_total = tr.steps.back().D_acc;
    const double factor = tab.constants.C_D * geo / std::sqrt(tr.eta);
    EXPECT_LE(d_total, factor * hb.D0(1) * (1.0 + 1e-9) + 1e-9);
    const int mid = 3;
    const double d_tail = d_total - tr.at(mid).D_acc;
    EXPECT_LE(d_tail, factor * (hb.D1(mid) + hb.D0(mid)) * (1.0 + 1e-9) + 1e-9);
  }
  EXPECT_TRUE(saw_unlucky) << "luck threshold too generous for the chain test to bite";
}

TEST(HolderBudgets, BlockDominanceOfAggregateModulus) {
  const gc::ScaleTable tab = table_of(2, 1u << 12);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 5, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 5;
  cfg.u = {0.5, 0.5};

  const gc::GafSample s =
      gc::make_sample(tab.model, gc::CoefficientLaw::complex_gaussian(), 7102u, 0u);
  const gc::HomingTrace tr = gc::run_homing(s, cfg);
  const int L = tab.model.block_exponent;
  const int m = 1, n = 5;

  const gc::HolderEstimate agg = gc::holder_estimate(s, tr.final_angle, 1.0, m, n, 64);

  // Mirror the estimator's grid and pair enumeration to find its maximizer.
  const int res = 64;
  const int npsi = 2 * static_cast<int>(std::llround(1.0 * res)) + 1;
  const int ns = res + 1;
  const double dpsi = 2.0 / (npsi - 1);
  const double unit = std::ldexp(1.0, -L * n);
  const auto [flo, fhi] = gc::block_range(m, n, L);
  std::vector<double> px, py, vx, vy;
  const double phi_step = dpsi * unit;
  for (int si = 0; si < ns; ++si) {
    const double sv = static_cast<double>(si) / res;
    const double r = 1.0 - sv * unit;
    const std::vector<gc::cplx> c = gc::radial_coeffs(s, r, flo, fhi);
    const double theta0 = tr.final_angle - 1.0 * unit;
    for (int pi = 0; pi < npsi; ++pi) {
      const gc::cplx val = gc::detail::rotate_sum(c, flo, theta0 + pi * phi_step);
      px.push_back(-1.0 + pi * dpsi);
      py.push_back(sv);
      vx.push_back(val.real());
      vy.push_back(val.imag());
    }
  }
  double best2 = 0.0;
  std::size_t ba = 0, bb = 1;
  auto consider = [&](std::size_t a, std::size_t b) {
    const double d = std::abs(px[a] - px[b]) + std::abs(py[a] - py[b]);
    if (d == 0.0) return;
    const double dr = vx[a] - vx[b], di = vy[a] - vy[b];
    const double q2 = (dr * dr + di * di) / d;
    if (q2 > best2) { best2 = q2; ba = a; bb = b; }
  };
  std::vector<std::size_t> lattice;
  for (int si = 0; si < ns; si += res / 8)
    for (int pi = 0; pi < npsi; pi += res / 8)
      lattice.push_back(static_cast<std::size_t>(si) * npsi + static_cast<std::size_t>(pi));
  for (std::size_t a = 0; a < px.size(); ++a)
    for (std::size_t b : lattice)
      if (a != b) consider(a, b);
  const int rad = res / 16;
  for (int si = 0; si < ns; ++si)
    for (int pi = 0; pi < npsi; ++pi) {
      const std::size_t a = static_cast<std::size_t>(si) * npsi + static_cast<std::size_t>(pi);
      for (int dsi = 0; dsi <= rad; ++dsi) {
        const int sj = si + dsi;
        if (sj >= ns) break;
        const int pj_lo = (dsi == 0) ? pi + 1 : std::max(0, pi - rad);
        for (int pj = pj_lo; pj <= std::min(npsi - 1, pi + rad); ++pj)
          consider(a, static_cast<std::size_t>(sj) * npsi + static_cast<std::size_t>(pj));
      }
    }
  EXPECT_DOUBLE_EQ(agg.value, std::sqrt(best2)) << "pair enumeration drifted";

  // Inject the maximizing pair into every block window at the mapped
  // coordinates; the weighted block moduli then dominate the aggregate.
  double dominated = 0.0;
  for (int k = m + 1; k <= n; ++k) {
    const double scale = std::exp2(static_cast<double>(-L * (n - k)));
    const double shift = (tr.final_angle - tr.at(k).angle) * std::exp2(static_cast<double>(L * k));
    std::vector<gc::WindowPoint> extra{{shift + px[ba] * scale, py[ba] * scale},
                                       {shift + px[bb] * scale, py[bb] * scale}};
    const double dk = gc::holder_estimate(s, tr.at(k).angle, 4.0, k - 1, k, 64, extra).value;
    dominated += dk * std::exp2(-0.5 * L * (n - k));
  }
  EXPECT_LE(agg.value, dominated + 1e-9);
}

// ── window sup transfer ───────────────────────────────────────────────

TEST(WindowSup, GridTransferBound) {
  const gc::ScaleTable tab = table_of(2, 1u << 12);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 5, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 5;
  cfg.u = {0.8, 0.0};

  const gc::CoefficientLaw law = gc::CoefficientLaw::complex_gaussian();
  const int L = tab.model.block_exponent;
  const auto [flo, fhi] = gc::block_range(1, 5, L);
  const double unit = std::ldexp(1.0, -L * 5);
  for (std::uint64_t trial = 0; trial < 2; ++trial) {
    const gc::GafSample s = gc::make_sample(tab.model, law, 7102u, trial);
    const gc::HomingTrace tr = gc::run_homing(s, cfg);
    const double delta = gc::holder_estimate(s, tr.final_angle, 1.0, 1, 5, 64).value;

    // The window center is a sublattice node, so every grid value is within
    // Delta * sqrt(d) of the center value, d = |psi| + s <= 2.
    double sup = 0.0;
    for (int si = 0; si <= 64; ++si) {
      const double sv = si / 64.0;
      for (int pi = 0; pi <= 128; ++pi) {
        const double psi = -1.0 + pi / 64.0;
        const gc::cplx val =
            gc::eval_freq_range(s, tr.final_angle + psi * unit, 1.0 - sv * unit, flo, fhi);
        sup = std::max(sup, std::abs(val - cfg.u));
      }
    }
    EXPECT_LE(sup, tr.final_gap + std::sqrt(2.0) * delta + 1e-8);

    // A successful statistic transfers to a window sup bound with headroom.
    const double stat = tr.final_gap + delta;
    const double thr = 2.0 * std::pow(tab.frak_s(5), 1.0 - cfg.gamma);
    if (stat <= thr)
      EXPECT_LE(sup, 4.0 * std::pow(tab.frak_s(5), 1.0 - cfg.gamma) + 1e-8);
  }
}

// ── success-rate experiment ───────────────────────────────────────────

TEST(SuccessRate, GuardLabelsAndGammaNesting) {
  const gc::ScaleTable tab = table_of(2, 1u << 10);
  EXPECT_THROW(gc::homing_success_rate(tab, {0.5, 0.0}, 1, 4, 0.125, 0, 7104u),
               std::invalid_argument);

  const gc::SuccessReport rep = gc::homing_success_rate(tab, {0.5, 0.0}, 1, 4, 0.125, 40, 7104u);
  EXPECT_EQ(rep.trials, 40);
  ASSERT_EQ(rep.statistic.size(), 40u);

  // Guard labels recomputed from the reported budgets; labeling never throws.
  const double au = 0.5;
  EXPECT_EQ(rep.guard_2u_ok,
            rep.drift_budget >= std::max(2.0 * au, std::sqrt(rep.variance_budget)));
  EXPECT_EQ(rep.guard_4u_ok,
            rep.drift_budget >= std::max(4.0 * au, std::sqrt(rep.variance_budget)));
  EXPECT_EQ(rep.out_of_hypothesis, !rep.guard_4u_ok);
  EXPECT_FALSE(rep.guard_2u_ok);  // desk-scale budgets sit far below sqrt(V)

  EXPECT_DOUBLE_EQ(rep.drift_budget, tab.drift_budget(1, 4));
  EXPECT_DOUBLE_EQ(rep.variance_budget, tab.variance_budget(1, 4));
  EXPECT_DOUBLE_EQ(rep.threshold, 2.0 * std::pow(tab.frak_s(4), 1.0 - 0.125));
  EXPECT_DOUBLE_EQ(rep.gamma_ratio, tab.gamma_ratio(1, 4));
  EXPECT_DOUBLE_EQ(rep.n_power, std::pow(4.0, 0.25 * 0.125));
  EXPECT_DOUBLE_EQ(rep.decay_argument, std::min(rep.gamma_ratio, rep.n_power));

  int hits = 0;
  for (double s : rep.statistic) hits += (s <= rep.threshold) ? 1 : 0;
  EXPECT_DOUBLE_EQ(rep.rate, hits / 40.0);
  EXPECT_NEAR(rep.rate_se, std::sqrt(rep.rate * (1.0 - rep.rate) / 40.0), 1e-15);
  EXPECT_GE(rep.mean_gap, 0.0);
  EXPECT_GE(rep.mean_delta, 0.0);
  // At a zero observed rate the fitted decay constant is exactly zero.
  EXPECT_DOUBLE_EQ(rep.fitted_c,
                   -std::log(std::max(1.0 - rep.rate, 0.5 / 40.0)) / rep.decay_argument);
  EXPECT_GE(rep.fitted_c, 0.0);
  EXPECT_NEAR(rep.bound_reference, std::max(1.0 - rep.rate, 0.5 / 40.0), 1e-12);

  // Larger gamma widens the acceptance threshold, so rates nest.
  const double fs = tab.frak_s(4);
  const double r_tight = rep.rate_at_gamma(0.05, fs);
  const double r_mid = rep.rate_at_gamma(0.125, fs);
  const double r_loose = rep.rate_at_gamma(0.2, fs);
  EXPECT_LE(r_tight, r_mid);
  EXPECT_LE(r_mid, r_loose);
  EXPECT_DOUBLE_EQ(r_mid, rep.rate);
}

// ── stopped supermartingale ───────────────────────────────────────────

TEST(Supermartingale, StoppedValuesFrozenAndExact) {
  const gc::ScaleTable tab = table_of(2, 1u << 10);
  const gc::GafSample z = gc::make_zero_sample(tab.model);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 4, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 4;

  {
    cfg.u = {0.0, 0.0};
    const gc::HomingTrace tr = gc::run_homing(z, cfg);
    EXPECT_EQ(tr.T, 1);
    const gc::StoppedSupermartingale sm = gc::supermartingale_check(tr, {0.0, 0.1, 0.7});
    ASSERT_EQ(sm.values.size(), 3u);
    for (double v : sm.values[0]) EXPECT_EQ(v, 1.0);  // lambda = 0
    for (const std::vector<double>& row : sm.values)
      for (double v : row) EXPECT_DOUBLE_EQ(v, row.front());  // frozen at T = m
  }
  {
    cfg.u = {9.0, 0.0};
    const gc::HomingTrace tr = gc::run_homing(z, cfg);
    EXPECT_EQ(tr.T, -1);
    const std::vector<double> ls{0.05, 0.6};
    const gc::StoppedSupermartingale sm = gc::supermartingale_check(tr, ls);
    for (std::size_t i = 0; i < ls.size(); ++i)
      for (int k = 1; k <= 4; ++k) {
        const gc::HomingStep& st = tr.at(k);
        const double l = ls[i];
        EXPECT_DOUBLE_EQ(sm.values[i][static_cast<std::size_t>(k - 1)],
                         std::exp(l * (st.dist + st.L_acc - st.D_acc) - l * l * st.V_acc));
      }
    // The reference column reproduces the per-step M_ref diagnostics.
    const gc::StoppedSupermartingale ref = gc::supermartingale_check(tr, {tr.lambda_ref});
    for (int k = 1; k <= 4; ++k)
      EXPECT_DOUBLE_EQ(ref.values[0][static_cast<std::size_t>(k - 1)], tr.at(k).M_ref);
  }
  EXPECT_THROW(gc::supermartingale_experiment(tab, {1.0, 0.0}, 1, 4, 1, 7103u),
               std::invalid_argument);
}

TEST(Supermartingale, EmpiricalMeansNonincreasing) {
  // A live target (outside the immediate capture radius) over 400 trials:
  // stopped means must not increase at any step, for any lambda in the
  // bracketing grid around lambda* = L/(8V).
  const gc::ScaleTable tab = table_of(2, 1u << 14);
  const gc::SupermartingaleReport rep =
      gc::supermartingale_experiment(tab, {6.0, 0.0}, 1, 6, 400, 7103u);
  EXPECT_EQ(rep.trials, 400);
  ASSERT_EQ(rep.per_lambda.size(), 4u);
  EXPECT_DOUBLE_EQ(rep.lambda_star, tab.drift_budget(1, 6) / (8.0 * tab.variance_budget(1, 6)));
  EXPECT_DOUBLE_EQ(rep.per_lambda[2].lambda, rep.lambda_star);
  for (const gc::SupermartingaleLambda& pl : rep.per_lambda) {
    EXPECT_TRUE(pl.nonincreasing) << "lambda = " << pl.lambda
                                  << " violates at k = " << pl.argmax_k
                                  << " with z = " << pl.max_violation_z;
    EXPECT_GE(pl.argmax_k, 1);
    EXPECT_LT(pl.argmax_k, 6);
  }
  EXPECT_TRUE(rep.ok);
  EXPECT_LE(rep.max_violation_z, 2.0);
}

// ── recursive homing net ──────────────────────────────────────────────

TEST(HomingNet, DegenerateTargetAndFlags) {
  const gc::ScaleTable tab = table_of(1, 1u << 12);
  const gc::GafSample s =
      gc::make_sample(tab.model, gc::CoefficientLaw::complex_gaussian(), 7105u, 0u);

  const gc::NetResult net = gc::build_net(s, tab, {0.0, 0.0}, 1);
  ASSERT_EQ(net.level.size(), 1u);
  const gc::NetLevel& lv = net.level[0];
  EXPECT_EQ(lv.j, 1);
  EXPECT_EQ(lv.scale, 2);
  EXPECT_DOUBLE_EQ(lv.eps, 0.5);
  EXPECT_EQ(lv.b, 0.0);
  EXPECT_TRUE(lv.capped);  // honest hexagonal 1/2-covers exceed 2^{2^1} points
  EXPECT_EQ(lv.points.size(), 4u);
  EXPECT_TRUE(net.degraded);
  EXPECT_FALSE(net.ramp_complete);
  EXPECT_FALSE(net.hypothesis_ok);
  EXPECT_GE(net.hypothesis_floor, 1e15);  // 3^{4/gamma} at gamma = 1/8

  const double thr = 12.0 * std::pow(tab.frak_s(2), 1.0 - net.gamma);
  for (const gc::NetPoint& p : lv.points) {
    EXPECT_EQ(p.target_u, gc::cplx(0.0, 0.0));
    EXPECT_EQ(p.theta, net.base_angle);
    EXPECT_EQ(p.parent, -1);
    EXPECT_EQ(p.value, p.level_value);
    EXPECT_DOUBLE_EQ(p.gap, std::abs(p.value));
    EXPECT_TRUE(std::isfinite(p.delta_bound));
    EXPECT_LE(p.gap, thr);  // the minimized |F| sits far inside the threshold
    EXPECT_TRUE(p.success);
    EXPECT_LE(std::abs(p.x), 1.0 + 1e-12);
  }
  // All targets coincide at 0, so the verified mesh is the disk radius plus
  // the probe slack.
  EXPECT_GE(lv.nu, 1.0);
  EXPECT_LE(lv.nu, 1.05);

  EXPECT_THROW(gc::build_net(s, tab, {0.0, 0.0}, 0), std::invalid_argument);
  EXPECT_THROW(gc::build_net(s, tab, {0.0, 0.0}, 1, 1), std::invalid_argument);
  EXPECT_THROW(gc::build_net(s, tab, {0.0, 0.0}, 1, 2, 0.3), std::invalid_argument);
  EXPECT_THROW(gc::build_net(s, tab, {0.0, 0.0}, 20), std::invalid_argument);

  // A sample truncated below the top level scale is rejected up front.
  const gc::ScaleTable deep = table_of(1, 1u << 20);
  const gc::GafSample tiny =
      gc::make_sample(model_of(0.5, 1.0, 1, 255), gc::CoefficientLaw::complex_gaussian(), 7105u, 1u);
  EXPECT_THROW(gc::build_net(tiny, deep, {0.0, 0.0}, 4), std::invalid_argument);
}

TEST(HomingNet, RampParentsAndArcSelection) {
  const gc::ScaleTable tab = table_of(1, 1u << 10);
  const gc::GafSample s =
      gc::make_sample(tab.model, gc::CoefficientLaw::complex_gaussian(), 7106u, 0u);
  const gc::cplx u{0.4, 0.2};

  gc::NetCaps caps;
  caps.max_points = 16;
  caps.rerank = 0;
  caps.record_delta = false;
  const gc::NetResult net = gc::build_net(s, tab, u, 3, 2, 0.125, caps);

  ASSERT_EQ(net.level.size(), 3u);
  EXPECT_EQ(net.level[0].scale, 2);
  EXPECT_EQ(net.level[1].scale, 4);
  EXPECT_EQ(net.level[2].scale, 8);
  EXPECT_DOUBLE_EQ(net.level[1].eps, 0.25);
  EXPECT_DOUBLE_EQ(net.level[2].eps, 0.0625);
  EXPECT_FALSE(net.ramp_complete);  // desk-scale drift budgets are tiny

  const double need = std::abs(u) + 1.0;
  double prev_b = 0.0;
  gc::cplx prev_z{0.0, 0.0};
  for (std::size_t li = 1; li < 3; ++li) {
    const gc::NetLevel& lv = net.level[li];
    const gc::NetLevel& par = net.level[li - 1];
    const double budget = tab.drift_budget(par.scale, lv.scale) / 6.0;

    // Ramp: per-level travel obeys the drift allowance and points at u.
    const double travel = std::abs(lv.z - prev_z) + std::abs(lv.b - prev_b);
    EXPECT_LE(travel, budget * (1.0 + 1e-9));
    EXPECT_GT(lv.b, prev_b);
    EXPECT_NEAR(std::abs(lv.z - lv.b * u), 0.0, 1e-15);
    prev_b = lv.b;
    prev_z = lv.z;

    const double halfw =
        std::asin(std::min(1.0, std::exp2(static_cast<double>(-par.scale)))) / std::numbers::pi;
    const int N = std::max(16, caps.arc_nodes);
    const double gstep = 2.0 * halfw / N;
    const auto [lo, hi] = gc::block_range(par.scale, lv.scale, 1);
    const std::vector<gc::cplx> coeffs = gc::radial_coeffs(s, 1.0, lo, hi);

    for (const gc::NetPoint& p : lv.points) {
      ASSERT_GE(p.parent, 0);
      ASSERT_LT(static_cast<std::size_t>(p.parent), par.points.size());
      const gc::NetPoint& pp = par.points[static_cast<std::size_t>(p.parent)];

      // Parent is the nearest coordinate of the previous net.
      double dmin = std::numeric_limits<double>::infinity();
      for (const gc::NetPoint& q : par.points) dmin = std::min(dmin, std::abs(p.x - q.x));
      EXPECT_DOUBLE_EQ(p.parent_dist, dmin);
      EXPECT_NEAR(std::abs(p.x - pp.x), dmin, 1e-15);

      // Targets: ramped disk point, and the parent-corrected block target.
      EXPECT_NEAR(std::abs(p.target_u - (lv.z + lv.b * p.x)), 0.0, 1e-15);
      EXPECT_NEAR(std::abs(p.target_w - (p.target_u - pp.value)), 0.0, 1e-15);

      // The selected angle stays on the parent's arc.
      const double chord = std::abs(gc::unit_phase(p.theta) - gc::unit_phase(pp.theta));
      EXPECT_LE(chord, std::exp2(static_cast<double>(-par.scale) + 1.0) * 1.01);
      EXPECT_LE(p.angle_resolution, 1e-9);

      // The grid scan includes the arc midpoint, so the refined minimum can
      // never lose to the parent's own angle.
      const double at_parent = std::abs(gc::detail::rotate_sum(coeffs, lo, pp.theta) - p.target_w);
      EXPECT_LE(p.level_gap, at_parent + 1e-9);

      EXPECT_NEAR(std::abs(p.level_value - gc::detail::rotate_sum(coeffs, lo, p.theta)), 0.0,
                  1e-12);
      EXPECT_EQ(p.success, p.gap <= 12.0 * std::pow(tab.frak_s(lv.scale), 1.0 - net.gamma));
      EXPECT_TRUE(std::isnan(p.delta_bound));
      EXPECT_DOUBLE_EQ(p.objective, p.level_gap);
    }
    (void)gstep;
  }

  // With re-ranking and recorded moduli, the objective charges the gap plus
  // the measured window modulus at the selected angle.
  gc::NetCaps caps2;
  caps2.max_points = 8;
  caps2.rerank = 2;
  caps2.record_delta = true;
  const gc::NetResult net2 = gc::build_net(s, tab, u, 2, 2, 0.125, caps2);
  for (const gc::NetPoint& p : net2.level[1].points) {
    EXPECT_TRUE(std::isfinite(p.delta_bound));
    EXPECT_GT(p.delta_bound, 0.0);
    EXPECT_DOUBLE_EQ(p.objective, p.level_gap + p.delta_bound);
  }
}

TEST(HomingNet, SuccessFractionAtFinalLevel) {
  // Fifty independent three-level nets at beta = 1, constant slow variation:
  // the mean fraction of certified points at the deepest level stays >= 0.8.
  const gc::ScaleTable tab = table_of(1, 255);
  const gc::CoefficientLaw law = gc::CoefficientLaw::complex_gaussian();
  gc::NetCaps caps;
  caps.max_points = 256;
  caps.arc_nodes = 512;
  caps.rerank = 0;
  caps.record_delta = false;

  double fraction = 0.0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    const gc::GafSample s = gc::make_sample(tab.model, law, 7107u, trial);
    const gc::NetResult net = gc::build_net(s, tab, {0.3, -0.2}, 3, 2, 0.125, caps);
    const gc::NetLevel& last = net.level.back();
    ASSERT_FALSE(last.points.empty());
    int ok = 0;
    for (const gc::NetPoint& p : last.points) ok += p.success ? 1 : 0;
    fraction += static_cast<double>(ok) / static_cast<double>(last.points.size());
  }
  fraction /= 50.0;
  EXPECT_GE(fraction, 0.8) << "mean certified fraction " << fraction;
}

// ── configuration plumbing ────────────────────────────────────────────

TEST(HomingConfig, ValidationAndDefaults) {
  gc::ScaleConstants c;
  c.delta = 0.17;
  c.C_H = 0.59;
  EXPECT_DOUBLE_EQ(gc::default_eta(c), 0.085 * 0.085);
  c.C_H = 10.0;  // the sub-gaussian cap binds instead
  EXPECT_DOUBLE_EQ(gc::default_eta(c), 0.025 * 0.025);

  const gc::ScaleTable tab = table_of(2, 1u << 10);
  gc::HomingConfig cfg;
  cfg.table = tab;
  cfg.offsets = gc::choose_offsets(tab.model, 1, 4, tab.constants.rho_H);
  cfg.m = 1;
  cfg.n = 4;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.eta_or_default(), gc::default_eta(tab.constants));
  cfg.eta = 0.004;
  EXPECT_DOUBLE_EQ(cfg.eta_or_default(), 0.004);
  cfg.eta = 0.01;  // sqrt(eta) = 0.1 > delta/2
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.eta = 0.0;
  cfg.gamma = 0.3;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.gamma = 0.125;
  cfg.m = 4;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.m = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);  // offsets start at block 2
  cfg.m = 1;
  cfg.table = gc::build_scales(tab.model, tab.constants, 4);  // no block n+1
  EXPECT_THROW(cfg.validate(), std::invalid_argument);

  gc::HolderBudgets hb;
  hb.m = 1;
  hb.n = 3;
  hb.L = 2;
  hb.delta = {0.5, 0.25};
  EXPECT_THROW(hb.at(1), std::out_of_range);
  EXPECT_THROW(hb.at(4), std::out_of_range);
  EXPECT_DOUBLE_EQ(hb.at(2), 0.5);
  EXPECT_DOUBLE_EQ(hb.D0(1), 0.75);
  EXPECT_DOUBLE_EQ(hb.D0(2), 0.25);
  EXPECT_DOUBLE_EQ(hb.D1(3), 0.5 * 0.5 + 0.25);
}
