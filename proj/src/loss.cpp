#include "cpinn/loss.hpp"

#include <cmath>
#include <string>

#include "cpinn/errors.hpp"

namespace cpinn {

namespace {

std::vector<JetRequest> requests_for(const TrainingSet& set) {
    std::vector<JetRequest> req;
    req.push_back({set.collocation.points, 2});
    req.push_back({set.boundary.points, 0});
    if (set.initial.size() > 0) req.push_back({set.initial.points, 0});
    return req;
}

} // namespace

std::string_view variant_name(Variant v) {
    switch (v) {
    case Variant::pinn:
        return "pinn";
    case Variant::pipinn:
        return "pipinn";
    case Variant::cpinn:
        return "cpinn";
    }
    return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (Variant v : {Variant::pinn, Variant::pipinn, Variant::cpinn}) {
        if (name == variant_name(v)) return v;
    }
    return std::nullopt;
}

void LossWeights::validate() const {
    for (double w : {lambda_D, lambda_B, lambda_I, lambda_bc_right, lambda_soft}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw ConfigError("loss weights must be finite and non-negative");
        }
    }
}

double residual_mse(std::span<const ResidualValue> residuals) {
    if (residuals.empty()) {
        throw ConfigError("residual MSE over an empty point set");
    }
    double sum = 0.0;
    for (const auto& r : residuals) {
        for (double v : r.components) sum += v * v;
    }
    return sum / static_cast<double>(residuals.size());
}

double soft_weighted_residual_loss(std::span<const ResidualValue> residuals, double lambda_soft) {
    if (!(lambda_soft >= 0.0)) {
        throw ConfigError("soft weighting scale must be non-negative");
    }
    double sum = 0.0;
    for (const auto& r : residuals) {
        for (double v : r.components) sum += std::exp(-lambda_soft * std::abs(v)) * v * v;
    }
    return sum;
}

double boundary_mse(const CompositeModel& model, const PointSet& boundary_pts) {
    if (boundary_pts.size() == 0) {
        throw ConfigError("boundary MSE over an empty point set");
    }
    const auto jets = forward_jets(model, boundary_pts.points, 0);
    double sum = 0.0;
    for (const auto& j : jets) sum += j.value.square().sum();
    return sum / static_cast<double>(boundary_pts.size());
}

TrainingSet make_training_set(const ProblemSpec& spec, PointSet collocation, PointSet boundary) {
    if (collocation.dim() != spec.dim || boundary.dim() != spec.dim) {
        throw ConfigError("point sets do not match the problem dimension");
    }
    if (collocation.size() == 0 || boundary.size() == 0) {
        throw ConfigError("collocation and boundary sets must be non-empty");
    }
    TrainingSet set;
    set.source.resize(collocation.size(), spec.n_components);
    for (Eigen::Index i = 0; i < collocation.size(); ++i) {
        const auto f = manufactured_source(spec, std::span<const double>(collocation.points.col(i).data(), spec.dim));
        for (int c = 0; c < spec.n_components; ++c) set.source(i, c) = f[c];
    }
    set.collocation = std::move(collocation);
    set.collocation.role = PointRole::interior_collocation;
    set.boundary = std::move(boundary);
    set.boundary.role = PointRole::boundary;
    set.initial.points.resize(spec.dim, 0);
    return set;
}

void check_architecture(const CompositeModel& model, const ProblemSpec& spec, Variant variant) {
    if (model.input_dim() != spec.dim || model.n_components() != spec.n_components) {
        throw ConfigError("model shape does not match problem " + std::string(problem_name(spec.id)));
    }
    if (variant == Variant::cpinn) {
        bool matches = model.inner().size() == spec.recipe.size();
        for (std::size_t j = 0; matches && j < spec.recipe.size(); ++j) {
            matches = model.inner()[j].component == spec.recipe[j].component &&
                      model.inner()[j].blend == spec.recipe[j].blend;
        }
        if (!matches) {
            throw ConfigError("cpinn model does not follow the problem's inner-network recipe");
        }
    } else if (!model.inner().empty()) {
        throw ConfigError(std::string(variant_name(variant)) + " expects plain networks without inner nets");
    }
}

LossBreakdown assemble_loss(const ProblemSpec& spec, const TrainingSet& set, const JetSet& jets,
                            const LossWeights& weights, Variant variant, JetSet* adjoints) {
    weights.validate();
    const bool has_initial = set.initial.size() > 0;
    if (jets.size() != (has_initial ? 3u : 2u)) {
        throw ConfigError("jets must cover collocation, boundary and any initial points");
    }
    const Eigen::Index n_coll = set.collocation.size();
    const Eigen::Index n_bnd = set.boundary.size();
    const int n_comp = spec.n_components;
    const int dim = spec.dim;

    LossBreakdown out;

    // Residuals, N x C.
    Eigen::ArrayXXd res(n_coll, n_comp);
    std::vector<OperatorCoefficients> coeffs(n_coll);
    for (Eigen::Index i = 0; i < n_coll; ++i) {
        coeffs[i] = operator_coefficients(spec, std::span<const double>(set.collocation.points.col(i).data(), dim));
        for (int c = 0; c < n_comp; ++c) {
            double acc = 0.0;
            for (int cc = 0; cc < n_comp; ++cc) {
                const JetBatch& u = jets[0][cc];
                acc += coeffs[i].reaction[c][cc] * u.value(i);
                for (int a = 0; a < dim; ++a) {
                    acc += coeffs[i].convection[c][cc][a] * u.grad(i, a) + coeffs[i].diffusion[c][cc][a] * u.hess(i, a);
                }
            }
            res(i, c) = acc - set.source(i, c);
        }
    }

    // d(residual_term)/dR
    Eigen::ArrayXXd rbar(n_coll, n_comp);
    if (variant == Variant::pipinn) {
        const Eigen::ArrayXXd w = (-weights.lambda_soft * res.abs()).exp();
        out.residual_term = (w * res.square()).sum();
        rbar = 2.0 * w * res;
    } else {
        out.residual_term = res.square().sum() / static_cast<double>(n_coll);
        rbar = 2.0 * res / static_cast<double>(n_coll);
    }

    // Boundary: homogeneous Dirichlet data.
    Eigen::ArrayXd face_weight = Eigen::ArrayXd::Ones(n_bnd);
    double bnd_scale = 1.0 / static_cast<double>(n_bnd);
    if (variant == Variant::pipinn) {
        bnd_scale = 1.0;
        for (Eigen::Index i = 0; i < n_bnd; ++i) {
            if (set.boundary.points(0, i) == 1.0) face_weight(i) = weights.lambda_bc_right;
        }
    }
    for (int c = 0; c < n_comp; ++c) {
        out.boundary_term += bnd_scale * (face_weight * jets[1][c].value.square()).sum();
    }

    if (has_initial) {
        const double scale = 1.0 / static_cast<double>(set.initial.size());
        for (int c = 0; c < n_comp; ++c) {
            out.initial_term += scale * (jets[2][c].value - set.initial_target.col(c)).square().sum();
        }
    }

    out.total = weights.lambda_D * out.residual_term + weights.lambda_B * out.boundary_term +
                weights.lambda_I * out.initial_term;

    if (adjoints) {
        rbar *= weights.lambda_D;
        for (Eigen::Index i = 0; i < n_coll; ++i) {
            for (int c = 0; c < n_comp; ++c) {
                const double r = rbar(i, c);
                for (int cc = 0; cc < n_comp; ++cc) {
                    JetBatch& ubar = (*adjoints)[0][cc];
                    ubar.value(i) += coeffs[i].reaction[c][cc] * r;
                    for (int a = 0; a < dim; ++a) {
                        ubar.grad(i, a) += coeffs[i].convection[c][cc][a] * r;
                        ubar.hess(i, a) += coeffs[i].diffusion[c][cc][a] * r;
                    }
                }
            }
        }
        for (int c = 0; c < n_comp; ++c) {
            (*adjoints)[1][c].value += weights.lambda_B * bnd_scale * 2.0 * face_weight * jets[1][c].value;
        }
        if (has_initial) {
            const double scale = 2.0 * weights.lambda_I / static_cast<double>(set.initial.size());
            for (int c = 0; c < n_comp; ++c) {
                (*adjoints)[2][c].value += scale * (jets[2][c].value - set.initial_target.col(c));
            }
        }
    }
    return out;
}

LossBreakdown total_loss(const CompositeModel& model, const ProblemSpec& spec, const TrainingSet& set,
                         const LossWeights& weights, Variant variant) {
    check_architecture(model, spec, variant);
    JetSet jets;
    for (const auto& r : requests_for(set)) jets.push_back(forward_jets(model, r.points, r.order));
    return assemble_loss(spec, set, jets, weights, variant);
}

LossEvaluation total_loss_and_gradient(const CompositeModel& model, const ProblemSpec& spec,
                                       const TrainingSet& set, const LossWeights& weights, Variant variant,
                                       long epoch) {
    check_architecture(model, spec, variant);
    const auto requests = requests_for(set);
    LossBreakdown breakdown;
    auto lg = loss_param_gradient(
        model, requests,
        [&](const JetSet& jets, JetSet& adjoints) {
            breakdown = assemble_loss(spec, set, jets, weights, variant, &adjoints);
            return breakdown.total;
        },
        epoch);
    return {breakdown, std::move(lg.gradient)};
}

} // namespace cpinn
