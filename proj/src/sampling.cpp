#include "cpinn/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpinn/errors.hpp"

namespace cpinn {

namespace {

double open_unit(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = 0.0;
    do {
        v = u(rng);
    } while (v <= 0.0);
    return v;
}

} // namespace

PointSet uniform_collocation_1d(int n) {
    if (n < 2) {
        throw ConfigError("1D collocation needs at least 2 points, got " + std::to_string(n));
    }
    PointSet ps;
    ps.points.resize(1, n);
    for (int k = 0; k < n; ++k) {
        ps.points(0, k) = static_cast<double>(k + 1) / static_cast<double>(n + 1);
    }
    return ps;
}

PointSet lhs_2d(int n, std::mt19937_64& rng) {
    if (n < 1) {
        throw ConfigError("LHS needs at least one point");
    }
    PointSet ps;
    ps.points.resize(2, n);
    for (int axis = 0; axis < 2; ++axis) {
        std::vector<int> strata(n);
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (int i = 0; i < n; ++i) {
            double v = (strata[i] + open_unit(rng)) / n;
            // rounding may push the top of a stratum onto its upper edge
            v = std::min(v, std::nextafter(static_cast<double>(strata[i] + 1) / n, 0.0));
            ps.points(axis, i) = v;
        }
    }
    return ps;
}

PointSet lhs_2d(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return lhs_2d(n, rng);
}

PointSet random_collocation_1d(int n, std::mt19937_64& rng) {
    if (n < 1) {
        throw ConfigError("collocation needs at least one point");
    }
    PointSet ps;
    ps.points.resize(1, n);
    for (int i = 0; i < n; ++i) ps.points(0, i) = open_unit(rng);
    return ps;
}

PointSet boundary_points(int problem_dim, int n_per_face) {
    PointSet ps;
    ps.role = PointRole::boundary;
    if (problem_dim == 1) {
        ps.points.resize(1, 2);
        ps.points << 0.0, 1.0;
        return ps;
    }
    if (problem_dim != 2) {
        throw ConfigError("boundary sampling supports dimensions 1 and 2");
    }
    if (n_per_face < 1) {
        throw ConfigError("need at least one boundary point per face");
    }
    ps.points.resize(2, 4 * n_per_face);
    Eigen::Index col = 0;
    for (int face = 0; face < 4; ++face) {
        const int fixed_axis = face < 2 ? 0 : 1;
        const double fixed_value = (face % 2 == 0) ? 0.0 : 1.0;
        for (int k = 0; k < n_per_face; ++k) {
            const double t = n_per_face == 1 ? 0.5 : static_cast<double>(k) / (n_per_face - 1);
            ps.points(fixed_axis, col) = fixed_value;
            ps.points(1 - fixed_axis, col) = t;
            ++col;
        }
    }
    return ps;
}

PointSet evaluation_grid(int problem_dim, const std::vector<BlendDescriptor>& layers) {
    PointSet ps;
    ps.role = PointRole::evaluation_grid;
    if (problem_dim == 1) {
        std::vector<double> xs;
        constexpr int kUniform = 1001;
        for (int i = 0; i < kUniform; ++i) xs.push_back(static_cast<double>(i) / (kUniform - 1));
        constexpr int kRefine = 50;
        for (const auto& layer : layers) {
            // distances from 10*delta down to 0.01*delta
            for (int k = 0; k < kRefine; ++k) {
                const double dist = 10.0 * layer.delta * std::pow(1e-3, static_cast<double>(k) / (kRefine - 1));
                const double face = layer.kind == BlendKind::from_origin ? layer.origin : 1.0;
                const double x = layer.kind == BlendKind::from_origin ? face + dist : face - dist;
                if (x > 0.0 && x < 1.0) xs.push_back(x);
            }
        }
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        ps.points = Eigen::Map<const Eigen::MatrixXd>(xs.data(), 1, static_cast<Eigen::Index>(xs.size()));
        return ps;
    }
    if (problem_dim != 2) {
        throw ConfigError("evaluation grids support dimensions 1 and 2");
    }
    constexpr int kSide = 101;
    ps.points.resize(2, kSide * kSide);
    for (int i = 0; i < kSide; ++i) {
        for (int j = 0; j < kSide; ++j) {
            ps.points(0, i * kSide + j) = static_cast<double>(i) / (kSide - 1);
            ps.points(1, i * kSide + j) = static_cast<double>(j) / (kSide - 1);
        }
    }
    return ps;
}

} // namespace cpinn
