#include "cpinn/autodiff.hpp"

#include <cmath>
#include <string>

#include "cpinn/errors.hpp"

namespace cpinn {

namespace {

int channel_count(int order, int dim) { return order == 2 ? 1 + 2 * dim : 1; }

void check_order(int order) {
    if (order != 0 && order != 2) {
        throw ConfigError("jet order must be 0 or 2");
    }
}

JetBatch row_to_jets(const Eigen::MatrixXd& m, Eigen::Index row, Eigen::Index n, int dim, int order) {
    JetBatch j(n, dim);
    j.value = m.row(row).segment(0, n).transpose().array();
    if (order == 2) {
        for (int k = 0; k < dim; ++k) {
            j.grad.col(k) = m.row(row).segment((1 + k) * n, n).transpose().array();
            j.hess.col(k) = m.row(row).segment((1 + dim + k) * n, n).transpose().array();
        }
    }
    return j;
}

Eigen::MatrixXd jets_to_row(const JetBatch& j, int order) {
    const Eigen::Index n = j.size();
    const int dim = j.dim();
    Eigen::MatrixXd m(1, channel_count(order, dim) * n);
    m.row(0).segment(0, n) = j.value.matrix().transpose();
    if (order == 2) {
        for (int k = 0; k < dim; ++k) {
            m.row(0).segment((1 + k) * n, n) = j.grad.col(k).matrix().transpose();
            m.row(0).segment((1 + dim + k) * n, n) = j.hess.col(k).matrix().transpose();
        }
    }
    return m;
}

} // namespace

ParamGradient ParamGradient::zeros_like(const CompositeModel& model) {
    ParamGradient g;
    for (const auto& block : model.parameter_blocks()) {
        g.blocks.emplace_back(block.size(), 0.0);
    }
    return g;
}

std::size_t ParamGradient::size() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
}

bool ParamGradient::all_finite() const {
    for (const auto& b : blocks) {
        for (double v : b) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

ParamGradient& ParamGradient::operator+=(const ParamGradient& other) {
    if (other.blocks.size() != blocks.size()) {
        throw ConfigError("gradient layouts differ");
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (other.blocks[b].size() != blocks[b].size()) {
            throw ConfigError("gradient layouts differ");
        }
        for (std::size_t i = 0; i < blocks[b].size(); ++i) blocks[b][i] += other.blocks[b][i];
    }
    return *this;
}

ParamGradient& ParamGradient::operator*=(double s) {
    for (auto& b : blocks) {
        for (double& v : b) v *= s;
    }
    return *this;
}

Eigen::MatrixXd mlp_forward_jets(const Mlp& mlp, const Eigen::MatrixXd& points, int order, MlpTape* tape) {
    check_order(order);
    const int dim = mlp.input_dim();
    if (points.rows() != dim) {
        throw ConfigError("points have " + std::to_string(points.rows()) + " coordinates, network expects " +
                          std::to_string(dim));
    }
    const Eigen::Index n = points.cols();
    const int channels = channel_count(order, dim);

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, channels * n);
    a.leftCols(n) = points;
    if (order == 2) {
        for (int k = 0; k < dim; ++k) a.row(k).segment((1 + k) * n, n).setOnes();
    }
    if (tape) {
        tape->order = order;
        tape->n_points = n;
        tape->inputs.assign(mlp.n_layers(), {});
        tape->pre.assign(mlp.n_layers() - 1, {});
    }

    for (int layer = 0; layer < mlp.n_layers(); ++layer) {
        Eigen::MatrixXd z = mlp.weight(layer) * a;
        z.leftCols(n).colwise() += mlp.bias(layer);
        if (tape) tape->inputs[layer] = std::move(a);
        if (layer + 1 == mlp.n_layers()) return z;

        const Eigen::ArrayXXd h = z.leftCols(n).array().tanh();
        const Eigen::ArrayXXd s = 1.0 - h.square();
        Eigen::MatrixXd next(z.rows(), z.cols());
        next.leftCols(n) = h.matrix();
        if (order == 2) {
            const Eigen::ArrayXXd s2 = -2.0 * h * s;
            for (int k = 0; k < dim; ++k) {
                const auto zg = z.middleCols((1 + k) * n, n).array();
                const auto zh = z.middleCols((1 + dim + k) * n, n).array();
                next.middleCols((1 + k) * n, n) = (s * zg).matrix();
                next.middleCols((1 + dim + k) * n, n) = (s * zh + s2 * zg.square()).matrix();
            }
        }
        if (tape) tape->pre[layer] = std::move(z);
        a = std::move(next);
    }
    return a; // unreachable: n_layers() >= 1
}

void mlp_backward_jets(const Mlp& mlp, const MlpTape& tape, const Eigen::MatrixXd& adjoint,
                       std::span<double> grad) {
    if (grad.size() != mlp.parameter_count()) {
        throw ConfigError("gradient buffer does not match the network's parameter count");
    }
    const int dim = mlp.input_dim();
    const Eigen::Index n = tape.n_points;
    const int order = tape.order;

    Eigen::MatrixXd zbar = adjoint;
    for (int layer = mlp.n_layers() - 1; layer >= 0; --layer) {
        const Eigen::MatrixXd& input = tape.inputs[layer];
        RowMatrixMap gw(grad.data() + mlp.weight_offset(layer), mlp.layer_sizes()[layer + 1],
                        mlp.layer_sizes()[layer]);
        VectorMap gb(grad.data() + mlp.bias_offset(layer), mlp.layer_sizes()[layer + 1]);
        gw.noalias() += zbar * input.transpose();
        gb.noalias() += zbar.leftCols(n).rowwise().sum();
        if (layer == 0) break;

        // Adjoint of the tanh layer feeding `input`.
        const Eigen::MatrixXd abar = mlp.weight(layer).transpose() * zbar;
        const Eigen::MatrixXd& pre = tape.pre[layer - 1];
        const Eigen::ArrayXXd h = input.leftCols(n).array();
        const Eigen::ArrayXXd s = 1.0 - h.square();

        Eigen::MatrixXd next(abar.rows(), abar.cols());
        Eigen::ArrayXXd vbar = s * abar.leftCols(n).array();
        if (order == 2) {
            const Eigen::ArrayXXd s2 = -2.0 * h * s;
            const Eigen::ArrayXXd s3 = s * (4.0 * h.square() - 2.0 * s);
            Eigen::ArrayXXd via_curvature = Eigen::ArrayXXd::Zero(h.rows(), h.cols());
            Eigen::ArrayXXd via_third = Eigen::ArrayXXd::Zero(h.rows(), h.cols());
            for (int k = 0; k < dim; ++k) {
                const auto zg = pre.middleCols((1 + k) * n, n).array();
                const auto zh = pre.middleCols((1 + dim + k) * n, n).array();
                const auto gbar = abar.middleCols((1 + k) * n, n).array();
                const auto hbar = abar.middleCols((1 + dim + k) * n, n).array();
                via_curvature += zg * gbar + zh * hbar;
                via_third += zg.square() * hbar;
                next.middleCols((1 + k) * n, n) = (s * gbar + 2.0 * s2 * zg * hbar).matrix();
                next.middleCols((1 + dim + k) * n, n) = (s * hbar).matrix();
            }
            vbar += s2 * via_curvature + s3 * via_third;
        }
        next.leftCols(n) = vbar.matrix();
        zbar = std::move(next);
    }
}

std::vector<JetBatch> forward_jets(const CompositeModel& model, const Eigen::MatrixXd& points, int order,
                                   CompositeTape* tape) {
    check_order(order);
    const int dim = model.input_dim();
    if (points.rows() != dim) {
        throw ConfigError("points have " + std::to_string(points.rows()) + " coordinates, model expects " +
                          std::to_string(dim));
    }
    const Eigen::Index n = points.cols();
    if (tape) {
        tape->order = order;
        tape->n_points = n;
        tape->outer.assign(model.outer().size(), {});
        tape->inner.assign(model.inner().size(), {});
        tape->inner_out.assign(model.inner().size(), {});
        tape->blend.assign(model.inner().size(), {});
    }

    std::vector<JetBatch> out;
    out.reserve(model.outer().size());
    for (std::size_t c = 0; c < model.outer().size(); ++c) {
        const Eigen::MatrixXd m =
            mlp_forward_jets(model.outer()[c], points, order, tape ? &tape->outer[c] : nullptr);
        out.push_back(row_to_jets(m, 0, n, dim, order));
    }

    for (std::size_t j = 0; j < model.inner().size(); ++j) {
        const InnerNet& in = model.inner()[j];
        const Eigen::MatrixXd m = mlp_forward_jets(in.net, points, order, tape ? &tape->inner[j] : nullptr);
        JetBatch net = row_to_jets(m, 0, n, dim, order);

        Eigen::ArrayX3d blend(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const BlendFactor f = in.blend.factor(std::span<const double>(points.col(i).data(), dim));
            blend(i, 0) = f.value;
            blend(i, 1) = f.first;
            blend(i, 2) = f.second;
        }

        JetBatch& u = out[in.component];
        const auto b = blend.col(0);
        u.value += net.value * b;
        if (order == 2) {
            const int a = in.blend.axis;
            const auto b1 = blend.col(1);
            const auto b2 = blend.col(2);
            for (int k = 0; k < dim; ++k) {
                u.grad.col(k) += net.grad.col(k) * b;
                u.hess.col(k) += net.hess.col(k) * b;
            }
            u.grad.col(a) += net.value * b1;
            u.hess.col(a) += 2.0 * net.grad.col(a) * b1 + net.value * b2;
        }
        if (tape) {
            tape->inner_out[j] = std::move(net);
            tape->blend[j] = std::move(blend);
        }
    }
    return out;
}

void backward_jets(const CompositeModel& model, const CompositeTape& tape, const std::vector<JetBatch>& adjoints,
                   ParamGradient& grad) {
    if (adjoints.size() != model.outer().size()) {
        throw ConfigError("one adjoint per model component is required");
    }
    const std::size_t n_outer = model.outer().size();
    const int order = tape.order;
    const int dim = model.input_dim();

    for (std::size_t c = 0; c < n_outer; ++c) {
        mlp_backward_jets(model.outer()[c], tape.outer[c], jets_to_row(adjoints[c], order), grad.blocks[c]);
    }
    for (std::size_t j = 0; j < model.inner().size(); ++j) {
        const InnerNet& in = model.inner()[j];
        const JetBatch& ubar = adjoints[in.component];
        const auto b = tape.blend[j].col(0);
        JetBatch nbar(ubar.size(), dim);
        nbar.value = ubar.value * b;
        if (order == 2) {
            const int a = in.blend.axis;
            const auto b1 = tape.blend[j].col(1);
            const auto b2 = tape.blend[j].col(2);
            nbar.value += ubar.grad.col(a) * b1 + ubar.hess.col(a) * b2;
            for (int k = 0; k < dim; ++k) {
                nbar.grad.col(k) = ubar.grad.col(k) * b;
                nbar.hess.col(k) = ubar.hess.col(k) * b;
            }
            nbar.grad.col(a) += 2.0 * ubar.hess.col(a) * b1;
        }
        mlp_backward_jets(in.net, tape.inner[j], jets_to_row(nbar, order), grad.blocks[n_outer + j]);
    }
}

Jet2 eval_jet(const Mlp& mlp, std::span<const double> x, int which_output) {
    if (static_cast<int>(x.size()) != mlp.input_dim()) {
        throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, network expects " +
                          std::to_string(mlp.input_dim()));
    }
    if (which_output < 0 || which_output >= mlp.output_dim()) {
        throw ConfigError("output index out of range");
    }
    const Eigen::MatrixXd pts = Eigen::Map<const Eigen::MatrixXd>(x.data(), mlp.input_dim(), 1);
    const Eigen::MatrixXd m = mlp_forward_jets(mlp, pts, 2);
    return row_to_jets(m, which_output, 1, mlp.input_dim(), 2).at(0);
}

Jet2 eval_jet(const CompositeModel& model, std::span<const double> x, int which_output) {
    if (static_cast<int>(x.size()) != model.input_dim()) {
        throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, model expects " +
                          std::to_string(model.input_dim()));
    }
    if (which_output < 0 || which_output >= model.n_components()) {
        throw ConfigError("output index out of range");
    }
    const Eigen::MatrixXd pts = Eigen::Map<const Eigen::MatrixXd>(x.data(), model.input_dim(), 1);
    return forward_jets(model, pts, 2)[which_output].at(0);
}

LossGradient loss_param_gradient(const CompositeModel& model, std::span<const JetRequest> requests,
                                 const JetLoss& loss, long epoch) {
    std::vector<CompositeTape> tapes(requests.size());
    JetSet jets;
    JetSet adjoints;
    for (std::size_t r = 0; r < requests.size(); ++r) {
        jets.push_back(forward_jets(model, requests[r].points, requests[r].order, &tapes[r]));
        auto& adj = adjoints.emplace_back();
        for (const auto& j : jets.back()) adj.emplace_back(j.size(), j.dim());
    }

    LossGradient result;
    result.loss = loss(jets, adjoints);
    if (!std::isfinite(result.loss)) {
        throw DivergenceError("loss became non-finite" + (epoch >= 0 ? " at epoch " + std::to_string(epoch) : ""),
                              epoch, result.loss);
    }
    result.gradient = ParamGradient::zeros_like(model);
    for (std::size_t r = 0; r < requests.size(); ++r) {
        backward_jets(model, tapes[r], adjoints[r], result.gradient);
    }
    return result;
}

} // namespace cpinn
