#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace amix {

/// Mixed input domain: p quantitative coordinates on [0,1] and q qualitative
/// factors, factor h having levels 1..m_h.
class DesignSpace {
 public:
  DesignSpace() = default;
  DesignSpace(std::size_t p, std::vector<int> levels);

  std::size_t p() const { return p_; }
  std::size_t q() const { return levels_.size(); }
  const std::vector<int>& levels() const { return levels_; }
  int levels(std::size_t h) const { return levels_[h]; }

  /// Number of level combinations M (1 when q = 0).
  std::size_t combinations() const;

  bool operator==(const DesignSpace&) const = default;

 private:
  std::size_t p_ = 0;
  std::vector<int> levels_;
};

/// Level indices are 1-based.
using LevelCombination = std::vector<int>;

struct MixedPoint {
  std::vector<double> x;
  std::vector<int> z;

  bool operator==(const MixedPoint&) const = default;
};

struct Violation {
  std::string coordinate;  // e.g. "x[0]" or "z[1]"
  std::string message;
};

/// All M combinations in lexicographic order of (z_1, ..., z_q).
std::vector<LevelCombination> enumerate_level_combinations(const DesignSpace& space);

/// Position of `z` in enumerate_level_combinations order.
std::size_t combination_index(const DesignSpace& space, const LevelCombination& z);

std::optional<Violation> validate_point(const DesignSpace& space, const MixedPoint& w);

/// Evaluated points. Points are pairwise distinct.
class Dataset {
 public:
  explicit Dataset(DesignSpace space) : space_(std::move(space)) {}

  const DesignSpace& space() const { return space_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<MixedPoint>& points() const { return points_; }
  const std::vector<double>& responses() const { return responses_; }
  const MixedPoint& point(std::size_t i) const { return points_[i]; }
  double response(std::size_t i) const { return responses_[i]; }

  bool contains(const MixedPoint& w) const;

  /// Throws std::invalid_argument on an invalid or duplicate point.
  void add(MixedPoint w, double y);

  /// First `n` observations.
  Dataset prefix(std::size_t n) const;

 private:
  DesignSpace space_;
  std::vector<MixedPoint> points_;
  std::vector<double> responses_;
};

}  // namespace amix
