#include "cpinn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpinn/errors.hpp"

namespace cpinn {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
        throw ConfigError("an MLP needs at least an input and an output layer");
    }
    for (int s : sizes_) {
        if (s < 1) {
            throw ConfigError("layer sizes must be positive, got " + std::to_string(s));
        }
    }
    std::size_t total = 0;
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
        offsets_.push_back(total);
        total += static_cast<std::size_t>(sizes_[k + 1]) * (sizes_[k] + 1);
    }
    params_.assign(total, 0.0);
}

RowMatrixMap Mlp::weight(int k) {
    return {params_.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}

ConstRowMatrixMap Mlp::weight(int k) const {
    return {params_.data() + offsets_[k], sizes_[k + 1], sizes_[k]};
}

VectorMap Mlp::bias(int k) { return {params_.data() + bias_offset(k), sizes_[k + 1]}; }

ConstVectorMap Mlp::bias(int k) const { return {params_.data() + bias_offset(k), sizes_[k + 1]}; }

Eigen::VectorXd Mlp::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim()) {
        throw ConfigError("input has " + std::to_string(x.size()) + " coordinates, network expects " +
                          std::to_string(input_dim()));
    }
    Eigen::VectorXd a = ConstVectorMap(x.data(), input_dim());
    for (int k = 0; k < n_layers(); ++k) {
        Eigen::VectorXd z = weight(k) * a + bias(k);
        a = (k + 1 < n_layers()) ? Eigen::VectorXd(z.array().tanh()) : z;
    }
    return a;
}

Mlp xavier_init(const std::vector<int>& layer_sizes, std::mt19937_64& rng) {
    Mlp mlp(layer_sizes);
    for (int k = 0; k < mlp.n_layers(); ++k) {
        const double fan_in = layer_sizes[k];
        const double fan_out = layer_sizes[k + 1];
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        auto w = mlp.weight(k);
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                w(r, c) = dist(rng);
            }
        }
    }
    return mlp;
}

Mlp xavier_init(const std::vector<int>& layer_sizes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return xavier_init(layer_sizes, rng);
}

std::vector<int> dense_layer_sizes(int input_dim, int width, int hidden_layers, int output_dim) {
    if (hidden_layers < 0) {
        throw ConfigError("hidden layer count must be non-negative");
    }
    std::vector<int> sizes{input_dim};
    sizes.insert(sizes.end(), hidden_layers, width);
    sizes.push_back(output_dim);
    return sizes;
}

double safe_exp(double z) { return std::exp(std::clamp(z, -kSafeExpBound, kSafeExpBound)); }

double BlendDescriptor::distance(std::span<const double> x) const {
    const double xi = x[axis];
    return kind == BlendKind::from_origin ? xi - origin : 1.0 - xi;
}

BlendFactor BlendDescriptor::factor(std::span<const double> x) const {
    const double z = -distance(x) / delta;
    BlendFactor f;
    f.value = safe_exp(z);
    if (z > -kSafeExpBound && z < kSafeExpBound) {
        // dz/dx along the blend axis
        const double slope = kind == BlendKind::from_origin ? -1.0 / delta : 1.0 / delta;
        f.first = f.value * slope;
        f.second = f.value * slope * slope;
    }
    return f;
}

BlendDescriptor layer_at_zero(int axis, double delta) {
    return {BlendKind::from_origin, axis, 0.0, delta};
}

BlendDescriptor layer_at_one(int axis, double delta) { return {BlendKind::to_one, axis, 0.0, delta}; }

CompositeModel::CompositeModel(int input_dim, std::vector<Mlp> outer, std::vector<InnerNet> inner)
    : input_dim_(input_dim), outer_(std::move(outer)), inner_(std::move(inner)) {
    if (input_dim_ < 1) {
        throw ConfigError("composite model input dimension must be positive");
    }
    if (outer_.empty()) {
        throw ConfigError("composite model needs at least one outer network");
    }
    for (const auto& net : outer_) {
        if (net.input_dim() != input_dim_ || net.output_dim() != 1) {
            throw ConfigError("outer networks must map R^d to a scalar");
        }
    }
    for (const auto& in : inner_) {
        if (in.component < 0 || in.component >= n_components()) {
            throw ConfigError("inner network references component " + std::to_string(in.component) +
                              " of a " + std::to_string(n_components()) + "-component model");
        }
        if (in.net.input_dim() != input_dim_ || in.net.output_dim() != 1) {
            throw ConfigError("inner networks must map R^d to a scalar");
        }
        if (!(in.blend.delta > 0.0)) {
            throw ConfigError("blend thickness must be positive");
        }
        if (in.blend.axis < 0 || in.blend.axis >= input_dim_) {
            throw ConfigError("blend axis out of range");
        }
    }
}

std::vector<std::span<double>> CompositeModel::parameter_blocks() {
    std::vector<std::span<double>> blocks;
    for (auto& net : outer_) blocks.push_back(net.parameters());
    for (auto& in : inner_) blocks.push_back(in.net.parameters());
    return blocks;
}

std::vector<std::span<const double>> CompositeModel::parameter_blocks() const {
    std::vector<std::span<const double>> blocks;
    for (const auto& net : outer_) blocks.push_back(net.parameters());
    for (const auto& in : inner_) blocks.push_back(in.net.parameters());
    return blocks;
}

std::size_t CompositeModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& b : parameter_blocks()) n += b.size();
    return n;
}

std::vector<double> CompositeModel::forward(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_dim_) {
        throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, model expects " +
                          std::to_string(input_dim_));
    }
    std::vector<double> u(outer_.size());
    for (std::size_t c = 0; c < outer_.size(); ++c) {
        u[c] = outer_[c].forward(x)(0);
    }
    for (const auto& in : inner_) {
        u[in.component] += in.net.forward(x)(0) * in.blend.factor(x).value;
    }
    return u;
}

std::vector<double> composite_forward(const CompositeModel& model, std::span<const double> x) {
    return model.forward(x);
}

} // namespace cpinn
