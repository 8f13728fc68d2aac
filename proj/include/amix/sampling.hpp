#pragma once

#include <vector>

#include <Eigen/Dense>

#include "amix/design_space.hpp"
#include "amix/rng.hpp"

namespace amix {

/// Random Latin hypercube: n x p, one value per stratum [(k-1)/n, k/n) in each
/// column, uniform within the stratum, independent column permutations.
Eigen::MatrixXd random_lhd(std::size_t n, std::size_t p, RngStream& rng);

/// For every level combination (enumeration order), an independent
/// n_per_combo-run LHD on the quantitative inputs.
std::vector<MixedPoint> candidate_set(const DesignSpace& space, std::size_t n_per_combo, RngStream& rng);

/// One N-run LHD on x with nearly balanced level-combination counts
/// (floor or ceil of N/M), assignment order shuffled.
std::vector<MixedPoint> oneshot_design(const DesignSpace& space, std::size_t n, RngStream& rng);

/// Same construction as oneshot_design; requires n0 >= 2.
std::vector<MixedPoint> initial_design(const DesignSpace& space, std::size_t n0, RngStream& rng);

}  // namespace amix
