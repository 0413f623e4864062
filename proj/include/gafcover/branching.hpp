#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "numeric.hpp"
#include "rng.hpp"
#include "scales.hpp"

namespace gafcover {

// Abstract spatial branching random walk mirroring the block heuristic of the
// random series: every walker splits into b = 2^L children per level, each
// displaced by an independent rotationally invariant step.  Around each
// level-n walker sits a disk of radius r_n; the union of those disks is the
// fattened trail whose plane-coverage behaviour the experiments probe.
//
// Conventions: levels are 0-based with the root alone at the origin on level
// 0.  The step from level n-1 into level n has standard deviation
// step_scale[n-1], and level-n walkers (n >= 1) carry disks of radius
// fatten_radius[n-1]; the root carries no disk.  Under the default power-law
// profile both sequences follow the level number: s_n = n^-beta and
// r_n = n^{-1-2 beta}.

inline constexpr std::size_t kWalkerBudget = std::size_t{1} << 24;

// ── thinning ──────────────────────────────────────────────────────────

/*! Spawn-time thinning: when a level holds more than `keep` walkers, only the
 *  `keep` best-scoring ones spawn children.  Scores see the walker modulus
 *  only, so the surviving ensemble stays rotationally invariant in law. */
struct ThinningPolicy {
  enum class Kind { none, keep_top_k };
  Kind kind = Kind::none;
  std::size_t keep = 0;
  std::function<double(double, int)> score;  // (modulus, level) -> score, larger survives

  static ThinningPolicy none_policy() { return {}; }
  static ThinningPolicy keep_top_k(std::size_t keep,
                                   std::function<double(double, int)> score = {}) {
    if (keep == 0) throw std::invalid_argument("keep_top_k: keep must be positive");
    ThinningPolicy p;
    p.kind = Kind::keep_top_k;
    p.keep = keep;
    p.score = score ? std::move(score)
                    : [](double modulus, int) { return -modulus; };  // default: hug the origin
    return p;
  }
};

// ── specification ─────────────────────────────────────────────────────

struct BranchingSpec {
  int block_exponent = 1;  // b = 2^L children per split; 0 degenerates to a single walk
  int depth = 1;           // number of levels including the root
  std::vector<double> step_scale;     // sd of the step into level n at index n-1
  CoefficientLaw law = CoefficientLaw::complex_gaussian();
  std::vector<double> fatten_radius;  // disk radius of level-n walkers at index n-1
  ThinningPolicy thinning;

  std::uint64_t branching_factor() const { return std::uint64_t{1} << block_exponent; }

  void validate() const {
    if (block_exponent < 0 || block_exponent > 20)
      throw std::invalid_argument("BranchingSpec: block exponent outside [0, 20]");
    if (depth < 1) throw std::invalid_argument("BranchingSpec: depth must be >= 1");
    if (step_scale.size() + 1 < static_cast<std::size_t>(depth))
      throw std::invalid_argument("BranchingSpec: step_scale shorter than depth - 1");
    for (std::size_t i = 0; i + 1 < static_cast<std::size_t>(depth); ++i)
      if (!(step_scale[i] > 0.0) || !std::isfinite(step_scale[i]))
        throw std::invalid_argument("BranchingSpec: step scales must be positive and finite");
    for (std::size_t i = 0; i + 1 < std::min(fatten_radius.size() + 1,
                                             static_cast<std::size_t>(depth)); ++i) {
      if (!(fatten_radius[i] >= 0.0))
        throw std::invalid_argument("BranchingSpec: fattening radii must be nonnegative");
      if (i > 0 && fatten_radius[i] > fatten_radius[i - 1])
        throw std::invalid_argument("BranchingSpec: fattening radii must be nonincreasing");
    }
  }

  /*! Power-law profile: s_n = n^-beta, r_n = n^{-1-2 beta} (slow variation 1). */
  static BranchingSpec power_law(double beta, int block_exponent, int depth) {
    if (!(beta > 0.0)) throw std::invalid_argument("power_law: beta must be positive");
    BranchingSpec spec;
    spec.block_exponent = block_exponent;
    spec.depth = depth;
    for (int n = 1; n < depth; ++n) {
      const double nd = static_cast<double>(n);
      spec.step_scale.push_back(std::pow(nd, -beta));
      spec.fatten_radius.push_back(std::pow(nd, -1.0 - 2.0 * beta));
    }
    return spec;
  }

  /*! Step scales taken from a block-deviation table: s_n = frak_s(n). */
  static BranchingSpec from_table(const ScaleTable& table, int depth) {
    BranchingSpec spec;
    spec.block_exponent = table.model.block_exponent;
    spec.depth = depth;
    const double beta = table.model.beta;
    for (int n = 1; n < depth; ++n) {
      spec.step_scale.push_back(table.frak_s(n));
      spec.fatten_radius.push_back(std::pow(static_cast<double>(n), -1.0 - 2.0 * beta));
    }
    return spec;
  }
};

// ── tree ──────────────────────────────────────────────────────────────

struct BranchingTree {
  struct Level {
    std::vector<cplx> z;
    std::vector<std::int32_t> parent;  // index into the previous level; -1 at the root
    std::vector<std::uint64_t> key;    // stable birth key driving the step draw
  };
  std::vector<Level> level;
  std::uint64_t seed = 0;

  int levels() const { return static_cast<int>(level.size()); }
  std::size_t walkers() const {
    std::size_t n = 0;
    for (const Level& l : level) n += l.z.size();
    return n;
  }
};

namespace detail {

/*! Child birth key: a pure function of the parent key and child slot, so a
 *  walker's step never depends on how siblings were thinned or ordered. */
inline std::uint64_t child_key(std::uint64_t parent_key, std::uint64_t slot) {
  return mix64(parent_key ^ ((slot + 1) * 0xa3b195354a39b70dull));
}

/*! Indices of the walkers allowed to spawn, in deterministic order. */
inline std::vector<std::size_t> spawning_set(const BranchingTree::Level& lvl, int level_index,
                                             const ThinningPolicy& thinning) {
  std::vector<std::size_t> idx(lvl.z.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (thinning.kind != ThinningPolicy::Kind::keep_top_k || idx.size() <= thinning.keep)
    return idx;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return thinning.score(std::abs(lvl.z[a]), level_index) >
           thinning.score(std::abs(lvl.z[b]), level_index);
  });
  idx.resize(thinning.keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

/*! Grows the branching walk level by level, deterministically from the seed.
 *  Throws when the total walker count would pass the memory budget; deep or
 *  wide trees need a keep_top_k thinning policy. */
inline BranchingTree grow(const BranchingSpec& spec, std::uint64_t seed) {
  spec.validate();
  BranchingTree tree;
  tree.seed = seed;
  tree.level.resize(1);
  tree.level[0].z = {cplx{0.0, 0.0}};
  tree.level[0].parent = {-1};
  tree.level[0].key = {mix64(mix64(seed) ^ 0x42726e6368526f6full)};

  const std::uint64_t b = spec.branching_factor();
  std::size_t total = 1;
  for (int n = 1; n < spec.depth; ++n) {
    const BranchingTree::Level& prev = tree.level.back();
    const std::vector<std::size_t> parents = detail::spawning_set(prev, n - 1, spec.thinning);
    const std::size_t count = parents.size() * static_cast<std::size_t>(b);
    if (total + count > kWalkerBudget)
      throw std::invalid_argument(
          "grow: walker budget exceeded; attach or tighten a keep_top_k thinning policy");
    BranchingTree::Level next;
    next.z.reserve(count);
    next.parent.reserve(count);
    next.key.reserve(count);
    const double s = spec.step_scale[static_cast<std::size_t>(n) - 1];
    for (const std::size_t p : parents)
      for (std::uint64_t c = 0; c < b; ++c) {
        const std::uint64_t key = detail::child_key(prev.key[p], c);
        next.z.push_back(prev.z[p] + s * draw_zeta(spec.law, key));
        next.parent.push_back(static_cast<std::int32_t>(p));
        next.key.push_back(key);
      }
    total += count;
    tree.level.push_back(std::move(next));
  }
  return tree;
}

// ── fattened coverage ─────────────────────────────────────────────────

/*! Fraction of targets within distance fatten_radius[n-1] of some level-n
 *  walker, n >= 1; the root carries no disk. */
inline double fattened_cover(const BranchingTree& tree, const BranchingSpec& spec,
                             const std::vector<cplx>& targets) {
  spec.validate();
  if (targets.empty()) return 0.0;
  std::size_t covered = 0;
  for (const cplx& w : targets) {
    bool hit = false;
    for (int n = 1; n < tree.levels() && !hit; ++n) {
      const double r = spec.fatten_radius[static_cast<std::size_t>(n) - 1];
      if (!(r > 0.0)) continue;
      const double r2 = r * r;
      for (const cplx& z : tree.level[static_cast<std::size_t>(n)].z)
        if (std::norm(w - z) <= r2) {
          hit = true;
          break;
        }
    }
    covered += hit;
  }
  return static_cast<double>(covered) / static_cast<double>(targets.size());
}

// ── dense-walker selection ────────────────────────────────────────────

/*! Walker choice at a sparse level; sees moduli only, so the selected
 *  increments keep rotationally invariant law.  Ties go to the lowest
 *  index. */
struct DenseSelection {
  std::function<double(double)> score;  // modulus -> score, argmax wins

  static DenseSelection max_modulus() {
    return {[](double m) { return m; }};
  }
  static DenseSelection target_modulus(double r) {
    return {[r](double m) { return -std::abs(m - r); }};
  }
};

struct WalkPathStep {
  int level = 0;
  std::size_t index = 0;  // selected walker within the stored level
  cplx z;
  double inc_sq = 0.0;         // |z_k - z_{k-1}|^2, zero at the first sparse level
  double predicted_var = 0.0;  // sum of step variances over the level gap
};

struct WalkPath {
  std::vector<WalkPathStep> step;
  double emp_sum = 0.0;       // empirical sum of squared increments
  double pred_sum = 0.0;      // predicted variance along the path
  double mean_abs_inc = 0.0;  // mean |increment|, the sparse-walk drift scale
};

/*! Follows the best-scoring walker across the sparse levels and reports the
 *  increment diagnostics: a sequence with diverging predicted variance but
 *  vanishing mean increment is the dense-image regime. */
inline WalkPath dense_walker(const BranchingTree& tree, const BranchingSpec& spec,
                             const std::vector<int>& sparse_levels,
                             const DenseSelection& selection = DenseSelection::max_modulus()) {
  spec.validate();
  if (!selection.score) throw std::invalid_argument("dense_walker: selection needs a score");
  if (sparse_levels.empty()) throw std::invalid_argument("dense_walker: no sparse levels");
  for (std::size_t i = 0; i < sparse_levels.size(); ++i) {
    if (sparse_levels[i] < 0 || sparse_levels[i] >= tree.levels())
      throw std::invalid_argument("dense_walker: sparse level outside the tree");
    if (i > 0 && sparse_levels[i] <= sparse_levels[i - 1])
      throw std::invalid_argument("dense_walker: sparse levels must increase");
  }
  WalkPath path;
  KahanSum emp, absinc;
  cplx prev{0.0, 0.0};
  for (std::size_t k = 0; k < sparse_levels.size(); ++k) {
    const int n = sparse_levels[k];
    const BranchingTree::Level& lvl = tree.level[static_cast<std::size_t>(n)];
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < lvl.z.size(); ++j) {
      const double s = selection.score(std::abs(lvl.z[j]));
      if (s > best_score) {
        best_score = s;
        best = j;
      }
    }
    WalkPathStep step;
    step.level = n;
    step.index = best;
    step.z = lvl.z[best];
    if (k > 0) {
      step.inc_sq = std::norm(step.z - prev);
      KahanSum var;
      for (int m = sparse_levels[k - 1] + 1; m <= n; ++m)
        var.add(spec.step_scale[static_cast<std::size_t>(m) - 1] *
                spec.step_scale[static_cast<std::size_t>(m) - 1]);
      step.predicted_var = var.value();
      emp.add(step.inc_sq);
      absinc.add(std::sqrt(step.inc_sq));
      path.pred_sum += step.predicted_var;
    }
    path.step.push_back(step);
    prev = step.z;
  }
  path.emp_sum = emp.value();
  path.mean_abs_inc =
      path.step.size() > 1 ? absinc.value() / static_cast<double>(path.step.size() - 1) : 0.0;
  return path;
}

}  // namespace gafcover
