#pragma once

#include <optional>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "cpinn/autodiff.hpp"
#include "cpinn/network.hpp"
#include "cpinn/problems.hpp"
#include "cpinn/sampling.hpp"

namespace cpinn {

/// pinn: one plain network per component, mean-squared residual and boundary terms.
/// pipinn: like pinn, but residuals are summed with detached weights
///         exp(-lambda_soft |R|) and the x=1 boundary term is scaled by lambda_bc_right.
/// cpinn: composite model with blended inner networks, mean-squared terms.
enum class Variant { pinn, pipinn, cpinn };

std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

struct LossWeights {
    double lambda_D = 1.0;
    double lambda_B = 1.0;
    double lambda_I = 0.0;
    double lambda_bc_right = 3.0;
    double lambda_soft = 0.8;

    /// Throws ConfigError when any weight is negative or not finite.
    void validate() const;
};

struct LossBreakdown {
    double total = 0.0;
    double residual_term = 0.0;
    double boundary_term = 0.0;
    double initial_term = 0.0;
};

/// (1/N) sum_i sum_c R_c(x_i)^2. Throws ConfigError on an empty list.
double residual_mse(std::span<const ResidualValue> residuals);

/// sum_i sum_c exp(-lambda |R_c(x_i)|) R_c(x_i)^2.
double soft_weighted_residual_loss(std::span<const ResidualValue> residuals, double lambda_soft);

/// (1/N_B) sum_i sum_c u_c(x_i)^2 for homogeneous Dirichlet data.
double boundary_mse(const CompositeModel& model, const PointSet& boundary_pts);

/// Fixed point sets for one training run, with the source term cached at
/// every collocation point.
struct TrainingSet {
    PointSet collocation;
    /// N x n_components
    Eigen::ArrayXXd source;
    PointSet boundary;
    /// Optional initial-condition points and targets (N_I x n_components).
    PointSet initial;
    Eigen::ArrayXXd initial_target;
};

TrainingSet make_training_set(const ProblemSpec& spec, PointSet collocation, PointSet boundary);

/// Throws ConfigError unless the model matches the variant: cpinn needs the
/// problem's full inner-network recipe, pinn/pipinn need plain networks.
void check_architecture(const CompositeModel& model, const ProblemSpec& spec, Variant variant);

/// Loss from already evaluated jets. jets[0] holds collocation jets (order 2),
/// jets[1] boundary values and, if the set has initial points, jets[2] their
/// values. When `adjoints` is given (zero-filled, same shape) it receives
/// d(total)/d(jet entry); the soft residual weights are held constant.
LossBreakdown assemble_loss(const ProblemSpec& spec, const TrainingSet& set, const JetSet& jets,
                            const LossWeights& weights, Variant variant, JetSet* adjoints = nullptr);

LossBreakdown total_loss(const CompositeModel& model, const ProblemSpec& spec, const TrainingSet& set,
                         const LossWeights& weights, Variant variant);

struct LossEvaluation {
    LossBreakdown breakdown;
    ParamGradient gradient;
};

LossEvaluation total_loss_and_gradient(const CompositeModel& model, const ProblemSpec& spec,
                                       const TrainingSet& set, const LossWeights& weights, Variant variant,
                                       long epoch = -1);

} // namespace cpinn
