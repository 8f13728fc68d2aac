#include "amix/sampling.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace amix {

Eigen::MatrixXd random_lhd(std::size_t n, std::size_t p, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("random_lhd: n must be positive");
  Eigen::MatrixXd out(n, p);
  std::vector<std::size_t> perm(n);
  const double width = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < p; ++k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm.begin(), perm.end());
    for (std::size_t i = 0; i < n; ++i) {
      double v = (static_cast<double>(perm[i]) + rng.uniform()) * width;
      // rounding can land exactly on the upper stratum edge
      const double upper = static_cast<double>(perm[i] + 1) * width;
      if (v >= upper) v = std::nextafter(upper, 0.0);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
    }
  }
  return out;
}

namespace {

std::vector<double> row(const Eigen::MatrixXd& m, std::size_t i) {
  std::vector<double> r(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) r[static_cast<std::size_t>(k)] = m(static_cast<Eigen::Index>(i), k);
  return r;
}

}  // namespace

std::vector<MixedPoint> candidate_set(const DesignSpace& space, std::size_t n_per_combo, RngStream& rng) {
  if (n_per_combo == 0) throw std::invalid_argument("candidate_set: n_per_combo must be positive");
  const auto combos = enumerate_level_combinations(space);
  std::vector<MixedPoint> out;
  out.reserve(combos.size() * n_per_combo);
  for (const auto& z : combos) {
    const Eigen::MatrixXd lhd = random_lhd(n_per_combo, space.p(), rng);
    for (std::size_t i = 0; i < n_per_combo; ++i) out.push_back({row(lhd, i), z});
  }
  return out;
}

std::vector<MixedPoint> oneshot_design(const DesignSpace& space, std::size_t n, RngStream& rng) {
  if (n == 0) throw std::invalid_argument("oneshot_design: N must be positive");
  const auto combos = enumerate_level_combinations(space);
  const std::size_t m = combos.size();

  // counts differ by at most one; which combinations get the extra run is random
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  std::vector<std::size_t> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(order[i % m]);
  rng.shuffle(labels.begin(), labels.end());

  const Eigen::MatrixXd lhd = random_lhd(n, space.p(), rng);
  std::vector<MixedPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({row(lhd, i), combos[labels[i]]});
  return out;
}

std::vector<MixedPoint> initial_design(const DesignSpace& space, std::size_t n0, RngStream& rng) {
  if (n0 < 2) throw std::invalid_argument("initial_design: n0 must be at least 2");
  return oneshot_design(space, n0, rng);
}

}  // namespace amix
