#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "cpinn/network.hpp"

namespace cpinn {

enum class PointRole { interior_collocation, boundary, evaluation_grid };

/// Points in [0,1]^d, stored one per column.
struct PointSet {
    Eigen::MatrixXd points;
    PointRole role = PointRole::interior_collocation;

    int dim() const { return static_cast<int>(points.rows()); }
    Eigen::Index size() const { return points.cols(); }
};

/// n equally spaced points strictly inside (0,1): k/(n+1), k = 1..n.
PointSet uniform_collocation_1d(int n);

/// n points in (0,1)^2 with one point per stratum [k/n,(k+1)/n) on each axis.
PointSet lhs_2d(int n, std::uint64_t seed);
PointSet lhs_2d(int n, std::mt19937_64& rng);

/// n points drawn uniformly in (0,1).
PointSet random_collocation_1d(int n, std::mt19937_64& rng);

/// dim 1: {0, 1}. dim 2: n_per_face evenly spaced points on each of the faces
/// x=0, x=1, y=0, y=1 (corners included when n_per_face >= 2).
PointSet boundary_points(int problem_dim, int n_per_face);

/// 1D: 1001 equally spaced points on [0,1] plus 50 geometrically spaced
/// points within 10*delta of every listed layer face. 2D: 101x101 tensor grid.
PointSet evaluation_grid(int problem_dim, const std::vector<BlendDescriptor>& layers);

} // namespace cpinn
