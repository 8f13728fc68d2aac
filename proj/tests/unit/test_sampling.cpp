#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "amix/sampling.hpp"

using namespace amix;

namespace {

bool stratified(const Eigen::MatrixXd& m) {
  const auto n = m.rows();
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    std::vector<int> count(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double v = m(i, k);
      if (!(v >= 0.0 && v < 1.0)) return false;
      const auto s = static_cast<std::size_t>(std::floor(v * static_cast<double>(n)));
      if (s >= count.size()) return false;
      ++count[s];
    }
    if (!std::all_of(count.begin(), count.end(), [](int c) { return c == 1; })) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("random LHD stratification") {
  RngStream rng(1, 0);
  CHECK(stratified(random_lhd(4, 2, rng)));
  const auto one = random_lhd(1, 3, rng);
  CHECK(one.rows() == 1);
  CHECK(stratified(one));
  CHECK(stratified(random_lhd(200, 2, rng)));
}

TEST_CASE("random LHD stratification holds for 100 random shapes") {
  RngStream shapes(99, 1);
  RngStream rng(99, 2);
  for (int t = 0; t < 100; ++t) {
    const auto n = 1 + shapes.below(300);
    const auto p = 1 + shapes.below(8);
    CHECK(stratified(random_lhd(n, p, rng)));
  }
}

TEST_CASE("candidate set layout") {
  RngStream rng(3, 0);
  const auto c = candidate_set(DesignSpace(1, {3}), 100, rng);
  REQUIRE(c.size() == 300);
  std::map<int, int> per_level;
  for (const auto& w : c) ++per_level[w.z[0]];
  CHECK(per_level[1] == 100);
  CHECK(per_level[2] == 100);
  CHECK(per_level[3] == 100);

  CHECK(candidate_set(DesignSpace(2, {}), 50, rng).size() == 50);

  const auto small = candidate_set(DesignSpace(1, {2, 2}), 1, rng);
  REQUIRE(small.size() == 4);
  std::set<LevelCombination> combos;
  for (const auto& w : small) combos.insert(w.z);
  CHECK(combos.size() == 4);
}

TEST_CASE("one-shot design balance") {
  RngStream rng(5, 0);
  const DesignSpace s(1, {3});
  auto counts = [&](const std::vector<MixedPoint>& d) {
    std::vector<int> c(3, 0);
    for (const auto& w : d) ++c[static_cast<std::size_t>(w.z[0] - 1)];
    std::sort(c.begin(), c.end());
    return c;
  };
  CHECK(counts(oneshot_design(s, 9, rng)) == std::vector<int>{3, 3, 3});
  CHECK(counts(oneshot_design(s, 10, rng)) == std::vector<int>{3, 3, 4});

  const DesignSpace s2(2, {3, 3});
  for (std::size_t n : {5u, 9u, 13u, 27u, 40u}) {
    std::map<LevelCombination, int> c;
    for (const auto& w : oneshot_design(s2, n, rng)) ++c[w.z];
    int lo = 1 << 30, hi = 0;
    for (const auto& z : enumerate_level_combinations(s2)) {
      lo = std::min(lo, c[z]);
      hi = std::max(hi, c[z]);
    }
    CHECK(hi - lo <= 1);
  }

  const auto d = oneshot_design(s, 12, rng);
  Eigen::MatrixXd x(12, 1);
  for (int i = 0; i < 12; ++i) x(i, 0) = d[static_cast<std::size_t>(i)].x[0];
  CHECK(stratified(x));
}

TEST_CASE("designs are deterministic per stream") {
  const DesignSpace s(2, {3, 3});
  RngStream a(11, 4), b(11, 4), c(11, 5);
  CHECK(candidate_set(s, 10, a) == candidate_set(s, 10, b));
  RngStream a2(11, 4);
  CHECK(candidate_set(s, 10, a2) != candidate_set(s, 10, c));
  RngStream i1(8, 0), i2(8, 0);
  CHECK(initial_design(s, 9, i1) == oneshot_design(s, 9, i2));
  RngStream i3(8, 0);
  CHECK_THROWS(initial_design(s, 1, i3));
  RngStream q0(1, 1);
  CHECK(initial_design(DesignSpace(2, {}), 2, q0).size() == 2);
}

TEST_CASE("substreams do not consume draws") {
  RngStream a(1, 2), b(1, 2);
  (void)a.substream(9);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.substream(3).next_u64() == b.substream(3).next_u64());
  CHECK(a.substream(3).next_u64() != a.substream(4).next_u64());
}
