#include <doctest.h>

#include <cmath>
#include <set>

#include "amix/hybrid.hpp"
#include "amix/kernel.hpp"
#include "amix/sampling.hpp"

using namespace amix;

namespace {

Dataset toy_data(const DesignSpace& space, std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  Dataset data(space);
  for (const auto& w : oneshot_design(space, n, rng)) {
    double y = std::cos(5.0 * w.x[0]);
    for (int z : w.z) y += 0.3 * z;
    data.add(w, y);
  }
  return data;
}

}  // namespace

TEST_CASE("uct forced exploration and tie randomness") {
  DesignSpace space(1, {3, 2});
  McTree tree(space);
  REQUIRE(tree.size() == 6);
  RngStream rng(1, 0);
  std::set<std::size_t> seen;
  for (std::size_t k = 0; k < tree.size(); ++k) {
    const auto leaf = uct_select(tree, 1.0, rng);
    CHECK(tree.visits[leaf] == 0);
    seen.insert(leaf);
    backprop(tree, leaf, 0.5);
  }
  CHECK(seen.size() == 6);
  for (auto v : tree.visits) CHECK(v >= 1);

  std::set<std::size_t> first;
  for (std::uint64_t s = 0; s < 64; ++s) {
    McTree fresh(space);
    RngStream r(s, 0);
    first.insert(uct_select(fresh, 1.0, r));
  }
  CHECK(first.size() > 1);
}

TEST_CASE("uct scores") {
  DesignSpace space(1, {2});
  McTree tree(space);
  tree.visits = {10, 1};
  tree.mean_reward = {0.5, 0.5};
  tree.root_visits = 11;
  RngStream rng(0, 0);
  CHECK(uct_select(tree, 1.0, rng) == 1);
  tree.mean_reward = {0.6, 0.5};
  CHECK(uct_select(tree, 0.0, rng) == 0);
  const double s0 = 0.6 + std::sqrt(std::log(11.0) / 10.0);
  const double s1 = 0.5 + std::sqrt(std::log(11.0) / 1.0);
  CHECK(s1 > s0);
}

TEST_CASE("backprop running mean and conservation") {
  DesignSpace space(0, {3});
  McTree tree(space);
  backprop(tree, 1, 0.7);
  CHECK(tree.visits[1] == 1);
  CHECK(tree.mean_reward[1] == doctest::Approx(0.7));
  backprop(tree, 1, 0.3);
  CHECK(tree.mean_reward[1] == doctest::Approx(0.5));
  RngStream rng(4, 0);
  for (int i = 0; i < 40; ++i) backprop(tree, rng.below(3), rng.uniform());
  std::size_t total = 0;
  for (auto v : tree.visits) total += v;
  CHECK(tree.root_visits == total);
  CHECK(tree.root_visits == 42);
  CHECK_THROWS(backprop(tree, 0, std::nan("")));
}

TEST_CASE("reward stays in the unit interval") {
  CHECK(hybrid_reward(2.0, 0.0, 1.0) == doctest::Approx(0.5));
  CHECK(hybrid_reward(2.0, 0.0, 3.0) == 0.0);
  CHECK(hybrid_reward(2.0, 0.0, -1.0) == 1.0);
  CHECK(hybrid_reward(1.0, 1.0, 1.0) == 0.0);
  DesignSpace space(1, {2, 2});
  McTree tree(space);
  RngStream rng(8, 0);
  const double worst = 3.0;
  double best = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double y = rng.uniform(-5.0, 6.0);
    best = std::min(best, y);
    backprop(tree, rng.below(tree.size()), hybrid_reward(worst, best, y));
  }
  for (std::size_t i = 0; i < tree.size(); ++i) {
    CHECK(tree.mean_reward[i] >= 0.0);
    CHECK(tree.mean_reward[i] <= 1.0);
  }
}

TEST_CASE("kernel ranking") {
  DesignSpace space(1, {2});
  const auto data = toy_data(space, 10, 3);
  RngStream rng(5, 0);
  const auto cands = candidate_set(space, 15, rng);
  FitOptions opts;
  opts.restarts = 2;

  KernelPool single;
  single.members.push_back([](const DesignSpace& s) { return std::make_shared<const EzGPKernel>(s); });
  for (double a : {0.0, 0.5, 1.0}) CHECK(kernel_rank_select(single, data, cands, a, opts, rng).chosen == 0);

  KernelPool twins;
  twins.members = {single.members[0], single.members[0]};
  RngStream r2(5, 1);
  const auto t = kernel_rank_select(twins, data, cands, 0.5, opts, r2);
  CHECK(t.chosen == 0);

  const auto std_pool = KernelPool::standard();
  RngStream r3(5, 2);
  const auto r = kernel_rank_select(std_pool, data, cands, 0.0, opts, r3);
  const std::size_t lik_winner = r.log_likelihood[1] > r.log_likelihood[0] ? 1 : 0;
  CHECK(r.chosen == lik_winner);
  CHECK(r.models[0].has_value());
  CHECK(r.models[1].has_value());
}

TEST_CASE("rank weight schedule") {
  HybridOptions o;
  CHECK(rank_weight(o, 3, 20) == 0.5);
  o.alpha_rank.reset();
  CHECK(rank_weight(o, 3, 20) == doctest::Approx(0.3));
  CHECK(rank_weight(o, 15, 20) == 1.0);
}

TEST_CASE("hybrid step picks from the chosen combination") {
  DesignSpace space(1, {3});
  const auto data = toy_data(space, 9, 11);
  McTree tree(space);
  RngStream rng(12, 0);
  const auto cands = candidate_set(space, 20, rng);
  FitOptions opts;
  opts.restarts = 2;
  const auto pool = KernelPool::standard();
  const auto c = hybrid_step(tree, pool, data, cands, 1, 15, {}, opts, rng);
  CHECK(c.chosen == cands[c.candidate]);
  CHECK(c.chosen.z == tree.leaves[c.leaf]);
  CHECK(c.kernel < 2);
  REQUIRE(c.model);

  RngStream again(12, 0);
  const auto cands2 = candidate_set(space, 20, again);
  const auto c2 = hybrid_step(tree, pool, data, cands2, 1, 15, {}, opts, again);
  CHECK(c2.chosen == c.chosen);

  DesignSpace cont(2, {});
  const auto d0 = toy_data(cont, 8, 2);
  McTree t0(cont);
  CHECK(t0.size() == 1);
  RngStream r0(3, 0);
  const auto cc = candidate_set(cont, 30, r0);
  const auto s0 = hybrid_step(t0, pool, d0, cc, 1, 12, {}, opts, r0);
  CHECK(s0.leaf == 0);
}
