#include "amix/design_space.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace amix {

DesignSpace::DesignSpace(std::size_t p, std::vector<int> levels)
    : p_(p), levels_(std::move(levels)) {
  if (p_ + levels_.size() == 0)
    throw std::invalid_argument("design space needs at least one input");
  for (int m : levels_)
    if (m < 2) throw std::invalid_argument("qualitative factor needs at least 2 levels");
}

std::size_t DesignSpace::combinations() const {
  std::size_t m = 1;
  for (int l : levels_) m *= static_cast<std::size_t>(l);
  return m;
}

std::vector<LevelCombination> enumerate_level_combinations(const DesignSpace& space) {
  const std::size_t q = space.q();
  std::vector<LevelCombination> out;
  out.reserve(space.combinations());
  LevelCombination z(q, 1);
  while (true) {
    out.push_back(z);
    // odometer increment, last factor fastest
    std::size_t h = q;
    while (h > 0) {
      --h;
      if (z[h] < space.levels(h)) {
        ++z[h];
        break;
      }
      z[h] = 1;
      if (h == 0) return out;
    }
    if (q == 0) return out;
  }
}

std::size_t combination_index(const DesignSpace& space, const LevelCombination& z) {
  std::size_t idx = 0;
  for (std::size_t h = 0; h < space.q(); ++h)
    idx = idx * static_cast<std::size_t>(space.levels(h)) + static_cast<std::size_t>(z[h] - 1);
  return idx;
}

std::optional<Violation> validate_point(const DesignSpace& space, const MixedPoint& w) {
  if (w.x.size() != space.p())
    return Violation{"x", "expected " + std::to_string(space.p()) + " quantitative coordinates, got " +
                              std::to_string(w.x.size())};
  if (w.z.size() != space.q())
    return Violation{"z", "expected " + std::to_string(space.q()) + " qualitative levels, got " +
                              std::to_string(w.z.size())};
  for (std::size_t k = 0; k < w.x.size(); ++k) {
    if (!(w.x[k] >= 0.0 && w.x[k] <= 1.0)) {
      const auto name = "x[" + std::to_string(k) + "]";
      return Violation{name, name + " out of [0,1]"};
    }
  }
  for (std::size_t h = 0; h < w.z.size(); ++h) {
    const auto name = "z[" + std::to_string(h) + "]";
    if (w.z[h] < 1) return Violation{name, name + " below 1"};
    if (w.z[h] > space.levels(h))
      return Violation{name, name + " exceeds " + std::to_string(space.levels(h))};
  }
  return std::nullopt;
}

bool Dataset::contains(const MixedPoint& w) const {
  return std::find(points_.begin(), points_.end(), w) != points_.end();
}

void Dataset::add(MixedPoint w, double y) {
  if (auto v = validate_point(space_, w)) throw std::invalid_argument(v->message);
  if (contains(w)) throw std::invalid_argument("duplicate design point");
  points_.push_back(std::move(w));
  responses_.push_back(y);
}

Dataset Dataset::prefix(std::size_t n) const {
  Dataset out(space_);
  n = std::min(n, points_.size());
  out.points_.assign(points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(n));
  out.responses_.assign(responses_.begin(), responses_.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

}  // namespace amix
