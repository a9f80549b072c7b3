#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace cpinn {

using RowMatrixMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMatrixMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;

/// Parameter storage, aligned for the vectorized kernels.
using ParamVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Dense network with tanh hidden layers and an identity output layer.
///
/// Parameters live in one contiguous buffer, layer by layer: the weight
/// matrix of layer k (row-major, layer_sizes[k+1] x layer_sizes[k]) followed
/// by its bias vector.
class Mlp {
public:
    Mlp() = default;
    /// All parameters zero. Throws ConfigError on fewer than two sizes or a
    /// non-positive size.
    explicit Mlp(std::vector<int> layer_sizes);

    const std::vector<int>& layer_sizes() const { return sizes_; }
    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    int n_layers() const { return static_cast<int>(sizes_.size()) - 1; }

    RowMatrixMap weight(int k);
    ConstRowMatrixMap weight(int k) const;
    VectorMap bias(int k);
    ConstVectorMap bias(int k) const;

    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::size_t weight_offset(int k) const { return offsets_[k]; }
    std::size_t bias_offset(int k) const {
        return offsets_[k] + static_cast<std::size_t>(sizes_[k + 1]) * sizes_[k];
    }

    /// Plain forward pass at one point.
    Eigen::VectorXd forward(std::span<const double> x) const;

    friend bool operator==(const Mlp&, const Mlp&) = default;

private:
    std::vector<int> sizes_;
    ParamVector params_;
    std::vector<std::size_t> offsets_;
};

/// Glorot-uniform weights, zero biases.
Mlp xavier_init(const std::vector<int>& layer_sizes, std::mt19937_64& rng);
Mlp xavier_init(const std::vector<int>& layer_sizes, std::uint64_t seed);

/// Layer sizes for `hidden_layers` tanh layers of equal width.
std::vector<int> dense_layer_sizes(int input_dim, int width, int hidden_layers, int output_dim = 1);

constexpr double kSafeExpBound = 20.0;

/// exp(clamp(z, -20, 20)).
double safe_exp(double z);

/// Clamped exponential blend factor and its derivatives along the blend axis.
struct BlendFactor {
    double value = 1.0;
    double first = 0.0;
    double second = 0.0;
};

enum class BlendKind {
    /// p(x) = x[axis] - origin
    from_origin,
    /// p(x) = 1 - x[axis]
    to_one,
};

/// Location and thickness of one boundary layer.
struct BlendDescriptor {
    BlendKind kind = BlendKind::from_origin;
    int axis = 0;
    double origin = 0.0;
    double delta = 1.0;

    double distance(std::span<const double> x) const;
    /// safe_exp(-p(x)/delta). Derivatives vanish where the clamp is active.
    BlendFactor factor(std::span<const double> x) const;

    friend bool operator==(const BlendDescriptor&, const BlendDescriptor&) = default;
};

BlendDescriptor layer_at_zero(int axis, double delta);
BlendDescriptor layer_at_one(int axis, double delta);

struct InnerNet {
    Mlp net;
    BlendDescriptor blend;
    int component = 0;

    friend bool operator==(const InnerNet&, const InnerNet&) = default;
};

/// Outer networks (one per solution component) plus blended inner networks:
///   u_c(x) = outer_c(x) + sum_{j attached to c} inner_j(x) * safe_exp(-p_j(x)/delta_j)
class CompositeModel {
public:
    CompositeModel() = default;
    CompositeModel(int input_dim, std::vector<Mlp> outer, std::vector<InnerNet> inner = {});

    int input_dim() const { return input_dim_; }
    int n_components() const { return static_cast<int>(outer_.size()); }

    const std::vector<Mlp>& outer() const { return outer_; }
    const std::vector<InnerNet>& inner() const { return inner_; }
    std::vector<Mlp>& outer() { return outer_; }
    std::vector<InnerNet>& inner() { return inner_; }

    /// Outer networks first, then inner networks, in declaration order.
    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::span<const double>> parameter_blocks() const;
    std::size_t parameter_count() const;

    /// Component values at x.
    std::vector<double> forward(std::span<const double> x) const;

    friend bool operator==(const CompositeModel&, const CompositeModel&) = default;

private:
    int input_dim_ = 0;
    std::vector<Mlp> outer_;
    std::vector<InnerNet> inner_;
};

/// Component values at x; see CompositeModel.
std::vector<double> composite_forward(const CompositeModel& model, std::span<const double> x);

} // namespace cpinn
