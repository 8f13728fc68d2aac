#include "amix/hybrid.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "amix/acquisition.hpp"
#include "amix/csv.hpp"
#include "amix/kernel.hpp"

namespace amix {

McTree::McTree(const DesignSpace& space)
    : leaves(enumerate_level_combinations(space)), visits(leaves.size(), 0), mean_reward(leaves.size(), 0.0) {}

std::size_t uct_select(const McTree& tree, double c, RngStream& rng) {
  if (tree.leaves.empty()) throw std::invalid_argument("uct_select: empty tree");
  if (c < 0.0) throw std::invalid_argument("uct_select: C must be >= 0");
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < tree.size(); ++i)
    if (tree.visits[i] == 0) best.push_back(i);
  if (best.empty()) {
    const double log_root = std::log(static_cast<double>(tree.root_visits));
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tree.size(); ++i) {
      const double s = tree.mean_reward[i] + c * std::sqrt(log_root / static_cast<double>(tree.visits[i]));
      if (s > top) {
        top = s;
        best.assign(1, i);
      } else if (s == top) {
        best.push_back(i);
      }
    }
  }
  return best.size() == 1 ? best[0] : best[rng.below(best.size())];
}

void backprop(McTree& tree, std::size_t leaf, double reward) {
  if (leaf >= tree.size()) throw std::out_of_range("backprop: leaf index out of range");
  if (!std::isfinite(reward)) throw std::invalid_argument("backprop: reward must be finite");
  const auto n = static_cast<double>(++tree.visits[leaf]);
  tree.mean_reward[leaf] += (reward - tree.mean_reward[leaf]) / n;
  ++tree.root_visits;
}

double hybrid_reward(double worst_init, double best_current, double y_new) {
  const double span = worst_init - best_current;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((worst_init - y_new) / span, 0.0, 1.0);
}

void write_tree_csv(const std::string& path, const McTree& tree) {
  CsvWriter w(path, "amix.tree/1", {"combination", "n", "mean_reward"});
  for (std::size_t i = 0; i < tree.size(); ++i) {
    std::string label;
    for (std::size_t h = 0; h < tree.leaves[i].size(); ++h) {
      if (h) label += '-';
      label += std::to_string(tree.leaves[i][h]);
    }
    w << label << tree.visits[i];
    if (tree.visits[i] == 0)
      w << std::numeric_limits<double>::quiet_NaN();
    else
      w << tree.mean_reward[i];
    w.end_row();
  }
}

KernelPool KernelPool::standard() {
  KernelPool pool;
  pool.members.emplace_back([](const DesignSpace& s) { return std::make_shared<const EzGPKernel>(s); });
  pool.members.emplace_back([](const DesignSpace& s) { return std::make_shared<const MultiplicativeKernel>(s); });
  return pool;
}

namespace {

// Rank 1 for the worst value up to k for the best; equal values share the lower rank.
std::vector<double> ranks(const std::vector<double>& v) {
  const std::size_t k = v.size();
  std::vector<double> r(k, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (v[i] == -std::numeric_limits<double>::infinity()) continue;
    std::size_t below = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (v[j] < v[i]) ++below;
    r[i] = static_cast<double>(below + 1);
  }
  return r;
}

}  // namespace

KernelRanking kernel_rank_select(const KernelPool& pool, const Dataset& data, std::span<const MixedPoint> candidates,
                                 double alpha_rank, const FitOptions& opts, RngStream& rng) {
  const std::size_t k = pool.members.size();
  if (k == 0) throw std::invalid_argument("kernel_rank_select: empty pool");
  KernelRanking out;
  out.log_likelihood.assign(k, -std::numeric_limits<double>::infinity());
  out.max_ei.assign(k, -std::numeric_limits<double>::infinity());
  out.models.resize(k);
  double f_min = std::numeric_limits<double>::infinity();
  for (double y : data.responses()) f_min = std::min(f_min, y);
  std::string last_error;
  for (std::size_t i = 0; i < k; ++i) {
    try {
      auto model = fit(pool.members[i](data.space()), data, opts, rng.substream(i));
      out.log_likelihood[i] = -model.nll();
      double best = 0.0;
      for (const auto& post : model.predict(candidates)) best = std::max(best, ei_min(post, f_min));
      out.max_ei[i] = best;
      out.models[i].emplace(std::move(model));
    } catch (const std::runtime_error& e) {
      last_error = e.what();
    }
  }
  if (std::none_of(out.models.begin(), out.models.end(), [](const auto& m) { return m.has_value(); }))
    throw FitFailure("every kernel in the pool failed to fit: " + last_error);
  const auto rp = ranks(out.log_likelihood);
  const auto ra = ranks(out.max_ei);
  out.combined.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.combined[i] = rp[i] + alpha_rank * ra[i];
  std::size_t best = 0;
  for (std::size_t i = 1; i < k; ++i) {
    if (out.combined[i] > out.combined[best] ||
        (out.combined[i] == out.combined[best] && out.log_likelihood[i] > out.log_likelihood[best]))
      best = i;
  }
  out.chosen = best;
  return out;
}

double rank_weight(const HybridOptions& opts, std::size_t iteration, std::size_t budget) {
  if (opts.alpha_rank) return std::clamp(*opts.alpha_rank, 0.0, 1.0);
  if (budget == 0) return 0.0;
  return std::clamp(2.0 * static_cast<double>(iteration) / static_cast<double>(budget), 0.0, 1.0);
}

HybridChoice hybrid_step(const McTree& tree, const KernelPool& pool, const Dataset& data,
                         std::span<const MixedPoint> candidates, std::size_t iteration, std::size_t budget,
                         const HybridOptions& opts, const FitOptions& fit_opts, RngStream& rng) {
  if (data.size() == 0) throw std::invalid_argument("hybrid_step: needs at least one observation");
  HybridChoice out;
  out.leaf = uct_select(tree, opts.c, rng);
  const auto& combo = tree.leaves[out.leaf];
  std::vector<std::size_t> index;
  std::vector<MixedPoint> restricted;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].z == combo && !data.contains(candidates[i])) {
      index.push_back(i);
      restricted.push_back(candidates[i]);
    }
  }
  if (restricted.empty()) throw std::invalid_argument("hybrid_step: no candidates for the chosen combination");
  auto fit_rng = rng.substream(0x6b65726e);
  const auto t0 = std::chrono::steady_clock::now();
  auto ranking = kernel_rank_select(pool, data, restricted, rank_weight(opts, iteration, budget), fit_opts, fit_rng);
  out.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.kernel = ranking.chosen;
  const FittedGP& model = *ranking.models[out.kernel];
  double f_min = std::numeric_limits<double>::infinity();
  for (double y : data.responses()) f_min = std::min(f_min, y);
  const auto sel = select_ei(model.predict(restricted), f_min);
  out.candidate = index[sel.index];
  out.chosen = restricted[sel.index];
  out.score = sel.score;
  out.model = std::make_shared<const FittedGP>(std::move(*ranking.models[out.kernel]));
  return out;
}

}  // namespace amix
