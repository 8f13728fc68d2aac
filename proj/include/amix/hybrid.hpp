#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amix/design_space.hpp"
#include "amix/gp.hpp"
#include "amix/rng.hpp"

namespace amix {

/// One-layer search tree: a leaf per level combination.
struct McTree {
  std::vector<LevelCombination> leaves;
  std::vector<std::size_t> visits;
  std::vector<double> mean_reward;
  std::size_t root_visits = 0;

  explicit McTree(const DesignSpace& space);
  std::size_t size() const { return leaves.size(); }
};

/// Leaf index maximizing mean reward + C sqrt(ln n_root / n_leaf). Unvisited
/// leaves come first, chosen uniformly from rng; score ties also go to rng.
std::size_t uct_select(const McTree& tree, double c, RngStream& rng);

/// Count the visit on the leaf and root and fold the reward into the leaf mean.
void backprop(McTree& tree, std::size_t leaf, double reward);

/// clip((worst_init - y_new) / (worst_init - best_current), 0, 1).
double hybrid_reward(double worst_init, double best_current, double y_new);

/// (combination, n, mean_reward) per leaf.
void write_tree_csv(const std::string& path, const McTree& tree);

using KernelFactory = std::function<std::shared_ptr<const CovarianceModel>(const DesignSpace&)>;

struct KernelPool {
  std::vector<KernelFactory> members;

  /// EzGP additive and multiplicative kernels.
  static KernelPool standard();
};

struct KernelRanking {
  std::size_t chosen = 0;
  std::vector<double> log_likelihood;  // -inf for failed fits
  std::vector<double> max_ei;          // -inf for failed fits
  std::vector<double> combined;
  std::vector<std::optional<FittedGP>> models;
};

/// Fit every pool member, rank by likelihood and by best EI over
/// `candidates` (higher rank is better, failures rank 1), and pick the
/// largest R_P + alpha R_A. Ties go to the higher likelihood, then the lower
/// index. Throws FitFailure only if every member fails.
KernelRanking kernel_rank_select(const KernelPool& pool, const Dataset& data, std::span<const MixedPoint> candidates,
                                 double alpha_rank, const FitOptions& opts, RngStream& rng);

struct HybridOptions {
  double c = 0.70710678118654752;
  /// Rank weight; empty means the adaptive schedule 2i/budget.
  std::optional<double> alpha_rank = 0.5;
};

/// alpha for iteration i (1-based) under the options, clamped to [0,1].
double rank_weight(const HybridOptions& opts, std::size_t iteration, std::size_t budget);

struct HybridChoice {
  MixedPoint chosen;
  std::size_t leaf = 0;
  std::size_t kernel = 0;
  std::size_t candidate = 0;  // index into the full pool
  double score = 0.0;
  double fit_seconds = 0.0;  // time spent fitting the pool
  std::shared_ptr<const FittedGP> model;
};

/// One Hybrid step: UCT picks the combination, the pool ranking picks the
/// kernel, EI over the pool restricted to that combination picks x. The
/// caller evaluates and calls backprop.
HybridChoice hybrid_step(const McTree& tree, const KernelPool& pool, const Dataset& data,
                         std::span<const MixedPoint> candidates, std::size_t iteration, std::size_t budget,
                         const HybridOptions& opts, const FitOptions& fit_opts, RngStream& rng);

}  // namespace amix
