#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cpinn/jet.hpp"
#include "cpinn/network.hpp"

namespace cpinn {

/// Gradient of a scalar with respect to every parameter of a CompositeModel.
/// blocks[b] mirrors CompositeModel::parameter_blocks()[b] element for element.
struct ParamGradient {
    std::vector<ParamVector> blocks;

    static ParamGradient zeros_like(const CompositeModel& model);

    std::size_t size() const;
    bool all_finite() const;
    ParamGradient& operator+=(const ParamGradient& other);
    ParamGradient& operator*=(double s);
};

/// Forward intermediates of one MLP needed to run its adjoint.
struct MlpTape {
    int order = 2;
    Eigen::Index n_points = 0;
    /// inputs[k]: activations entering layer k, all channels side by side.
    std::vector<Eigen::MatrixXd> inputs;
    /// pre[k]: pre-activations of hidden layer k, all channels.
    std::vector<Eigen::MatrixXd> pre;
};

struct CompositeTape {
    int order = 2;
    Eigen::Index n_points = 0;
    std::vector<MlpTape> outer;
    std::vector<MlpTape> inner;
    std::vector<JetBatch> inner_out;
    /// Per inner net: blend value, first and second derivative along the blend axis.
    std::vector<Eigen::ArrayX3d> blend;
};

/// Propagates value (order 0) or value, gradient and diagonal Hessian
/// (order 2) through the network for every column of `points` (d x N).
///
/// The result has one row per network output. Columns are grouped by channel:
/// [value | d/dx_0 | ... | d/dx_{d-1} | d2/dx_0^2 | ... | d2/dx_{d-1}^2], each N wide.
Eigen::MatrixXd mlp_forward_jets(const Mlp& mlp, const Eigen::MatrixXd& points, int order,
                                 MlpTape* tape = nullptr);

/// Accumulates d(loss)/d(params) into `grad` given the adjoint of the forward
/// result (same shape as the value mlp_forward_jets returned).
void mlp_backward_jets(const Mlp& mlp, const MlpTape& tape, const Eigen::MatrixXd& adjoint,
                       std::span<double> grad);

/// Per-component jets of the composite model over a batch of points.
std::vector<JetBatch> forward_jets(const CompositeModel& model, const Eigen::MatrixXd& points, int order,
                                   CompositeTape* tape = nullptr);

/// Accumulates the parameter gradient for per-component jet adjoints.
void backward_jets(const CompositeModel& model, const CompositeTape& tape,
                   const std::vector<JetBatch>& adjoints, ParamGradient& grad);

/// Exact value, gradient and diagonal Hessian of one output at x.
Jet2 eval_jet(const Mlp& mlp, std::span<const double> x, int which_output = 0);
Jet2 eval_jet(const CompositeModel& model, std::span<const double> x, int which_output = 0);

/// One batch of points the loss needs jets for.
struct JetRequest {
    Eigen::MatrixXd points;
    int order = 2;
};

using JetSet = std::vector<std::vector<JetBatch>>;

/// A scalar loss over the jets of every request. It returns the loss and
/// writes d(loss)/d(jet entry) into `adjoints`, which arrives zero-filled and
/// shaped like `jets`. Adjoints of derivative channels of order-0 requests
/// are ignored.
using JetLoss = std::function<double(const JetSet& jets, JetSet& adjoints)>;

struct LossGradient {
    double loss = 0.0;
    ParamGradient gradient;
};

/// Evaluates `loss` on the model's jets and backpropagates it to all
/// parameters, including paths through input derivatives. Throws
/// DivergenceError (tagged with `epoch`) when the loss is not finite.
LossGradient loss_param_gradient(const CompositeModel& model, std::span<const JetRequest> requests,
                                 const JetLoss& loss, long epoch = -1);

} // namespace cpinn
