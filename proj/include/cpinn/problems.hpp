#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpinn/jet.hpp"
#include "cpinn/network.hpp"

namespace cpinn {

enum class ProblemId { cd1d, rd1d, cd_coupled, rd_coupled, cd2d_ex2, cd2d_ex3 };

inline constexpr ProblemId kAllProblems[] = {ProblemId::cd1d,       ProblemId::rd1d,     ProblemId::cd_coupled,
                                             ProblemId::rd_coupled, ProblemId::cd2d_ex2, ProblemId::cd2d_ex3};

/// CLI spelling: cd1d, rd1d, cd-coupled, rd-coupled, cd2d-ex2, cd2d-ex3.
std::string_view problem_name(ProblemId id);
/// Accepts the CLI spelling and the underscore variant.
std::optional<ProblemId> parse_problem_id(std::string_view name);

/// An inner network slot: which component it corrects and where its layer sits.
struct LayerRecipe {
    int component = 0;
    BlendDescriptor blend;
};

/// One benchmark: homogeneous Dirichlet data on the unit interval/square,
/// a linear second-order operator, and a closed-form solution from which the
/// source term is manufactured.
struct ProblemSpec {
    ProblemId id = ProblemId::cd1d;
    int dim = 1;
    int n_components = 1;
    double epsilon = 1e-5;
    /// Second perturbation parameter; only the coupled systems use it.
    std::optional<double> mu;
    std::vector<LayerRecipe> recipe;
};

double default_epsilon(ProblemId id);
std::optional<double> default_mu(ProblemId id);

/// Builds a benchmark with the given (or default) perturbation parameters.
/// Throws ConfigError for non-positive parameters or epsilon > 1.
ProblemSpec make_problem(ProblemId id, std::optional<double> epsilon = {}, std::optional<double> mu = {});

/// Layer faces of the composite recipe.
std::vector<BlendDescriptor> layer_faces(const ProblemSpec& spec);

/// Pointwise defect L[u](x) - f(x), one entry per component.
struct ResidualValue {
    std::vector<double> components;
};

/// Coefficients of the linear operator at a point:
///   L[u]_c = sum_{c'} reaction[c][c'] u_c'
///          + sum_{c',k} convection[c][c'][k] d_k u_c' + diffusion[c][c'][k] d_kk u_c'
struct OperatorCoefficients {
    double reaction[2][2] = {};
    double convection[2][2][2] = {};
    double diffusion[2][2][2] = {};
};

OperatorCoefficients operator_coefficients(const ProblemSpec& spec, std::span<const double> x);

/// L[u](x) for per-component jets.
std::vector<double> apply_operator(const ProblemSpec& spec, std::span<const Jet2> jets, std::span<const double> x);

/// L[u](x) - f(x).
ResidualValue residual(const ProblemSpec& spec, std::span<const Jet2> jets, std::span<const double> x);

/// Closed-form solution, one value per component.
std::vector<double> analytic_solution(const ProblemSpec& spec, std::span<const double> x);

/// Closed-form solution with its derivatives, obtained by forward-mode
/// differentiation of the closed-form expressions.
std::vector<Jet2> analytic_jets(const ProblemSpec& spec, std::span<const double> x);

/// f = L[analytic](x).
std::vector<double> manufactured_source(const ProblemSpec& spec, std::span<const double> x);

} // namespace cpinn
