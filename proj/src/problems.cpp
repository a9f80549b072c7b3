#include "cpinn/problems.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "cpinn/errors.hpp"

namespace cpinn {

namespace {

using std::cos;
using std::exp;
using std::sin;

struct ProblemInfo {
    ProblemId id;
    std::string_view name;
    std::string_view alt_name;
    int dim;
    int n_components;
    double epsilon;
    double mu; // 0 when unused
};

constexpr ProblemInfo kInfo[] = {
    {ProblemId::cd1d, "cd1d", "cd1d", 1, 1, 1e-5, 0.0},
    {ProblemId::rd1d, "rd1d", "rd1d", 1, 1, 1e-5, 0.0},
    {ProblemId::cd_coupled, "cd-coupled", "cd_coupled", 1, 2, 1e-7, 1e-5},
    {ProblemId::rd_coupled, "rd-coupled", "rd_coupled", 1, 2, 1e-10, 1e-8},
    {ProblemId::cd2d_ex2, "cd2d-ex2", "cd2d_ex2", 2, 1, 1e-5, 0.0},
    {ProblemId::cd2d_ex3, "cd2d-ex3", "cd2d_ex3", 2, 1, 1e-5, 0.0},
};

const ProblemInfo& info(ProblemId id) {
    for (const auto& i : kInfo) {
        if (i.id == id) return i;
    }
    throw ConfigError("unknown problem id");
}

// (1 - e^{-x/d}) / (1 - e^{-1/d}); the denominator is exactly 1 once e^{-1/d} underflows.
template <typename S>
S rising_layer(const S& x, double d) {
    return (1.0 - exp(-x / d)) / (1.0 - std::exp(-1.0 / d));
}

template <typename S>
std::array<S, 2> analytic_impl(const ProblemSpec& spec, const S& x, const S& y) {
    const double eps = spec.epsilon;
    const double mu = spec.mu.value_or(eps);
    constexpr double pi = std::numbers::pi;
    switch (spec.id) {
    case ProblemId::cd1d:
        return {(1.0 - exp((x - 1.0) / eps)) * sin(x), S(0.0)};
    case ProblemId::rd1d:
        return {exp(-x / eps) + exp(-(1.0 - x) / eps) - 1.0 - std::exp(-1.0 / eps), S(0.0)};
    case ProblemId::cd_coupled: {
        const S layer_mu = rising_layer(x, mu);
        return {rising_layer(x, eps) + layer_mu - 2.0 * sin(pi / 2.0 * x), layer_mu - x * exp(x - 1.0)};
    }
    case ProblemId::rd_coupled: {
        const S pair_eps = (exp(-x / eps) + exp(-(1.0 - x) / eps)) / (1.0 - std::exp(-1.0 / eps));
        const S pair_mu = (exp(-x / mu) + exp(-(1.0 - x) / mu)) / (1.0 - std::exp(-1.0 / mu));
        return {pair_eps + pair_mu - 2.0, pair_mu - 1.0};
    }
    case ProblemId::cd2d_ex2: {
        const double tail = std::exp(-1.0 / eps);
        const S x_part = cos(pi * x / 2.0) - (exp(-x / eps) - tail) / (1.0 - tail);
        return {x_part * rising_layer(y, eps), S(0.0)};
    }
    case ProblemId::cd2d_ex3:
        return {sin(pi * x) * sin(pi * y) * (1.0 - exp(-x / eps)) * (1.0 - exp(-y / eps)), S(0.0)};
    }
    throw ConfigError("unknown problem id");
}

void check_point(const ProblemSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.dim) {
        throw ConfigError("point has " + std::to_string(x.size()) + " coordinates, problem " +
                          std::string(problem_name(spec.id)) + " is " + std::to_string(spec.dim) + "D");
    }
}

} // namespace

std::string_view problem_name(ProblemId id) { return info(id).name; }

std::optional<ProblemId> parse_problem_id(std::string_view name) {
    for (const auto& i : kInfo) {
        if (name == i.name || name == i.alt_name) return i.id;
    }
    return std::nullopt;
}

double default_epsilon(ProblemId id) { return info(id).epsilon; }

std::optional<double> default_mu(ProblemId id) {
    const double mu = info(id).mu;
    return mu > 0.0 ? std::optional<double>(mu) : std::nullopt;
}

ProblemSpec make_problem(ProblemId id, std::optional<double> epsilon, std::optional<double> mu) {
    const ProblemInfo& pi = info(id);
    ProblemSpec spec;
    spec.id = id;
    spec.dim = pi.dim;
    spec.n_components = pi.n_components;
    spec.epsilon = epsilon.value_or(pi.epsilon);
    if (!(spec.epsilon > 0.0) || spec.epsilon > 1.0) {
        throw ConfigError("epsilon must lie in (0, 1]");
    }
    if (pi.n_components == 2) {
        spec.mu = mu.value_or(pi.mu);
        if (!(*spec.mu > 0.0) || *spec.mu > 1.0) {
            throw ConfigError("mu must lie in (0, 1]");
        }
    } else if (mu) {
        throw ConfigError("mu only applies to the coupled systems");
    }

    const double eps = spec.epsilon;
    switch (id) {
    case ProblemId::cd1d:
        spec.recipe = {{0, layer_at_one(0, eps)}};
        break;
    case ProblemId::rd1d:
        spec.recipe = {{0, layer_at_zero(0, eps)}, {0, layer_at_one(0, eps)}};
        break;
    case ProblemId::cd_coupled:
        spec.recipe = {{0, layer_at_zero(0, eps)}, {1, layer_at_zero(0, *spec.mu)}};
        break;
    case ProblemId::rd_coupled:
        spec.recipe = {{0, layer_at_zero(0, eps)},
                       {0, layer_at_one(0, eps)},
                       {1, layer_at_zero(0, *spec.mu)},
                       {1, layer_at_one(0, *spec.mu)}};
        break;
    case ProblemId::cd2d_ex2:
        // the y=1 net is auxiliary: the solution has no layer there
        spec.recipe = {{0, layer_at_zero(0, eps)}, {0, layer_at_zero(1, eps)}, {0, layer_at_one(1, eps)}};
        break;
    case ProblemId::cd2d_ex3:
        spec.recipe = {{0, layer_at_zero(0, eps)}, {0, layer_at_zero(1, eps)}};
        break;
    }
    return spec;
}

std::vector<BlendDescriptor> layer_faces(const ProblemSpec& spec) {
    std::vector<BlendDescriptor> faces;
    for (const auto& r : spec.recipe) faces.push_back(r.blend);
    return faces;
}

OperatorCoefficients operator_coefficients(const ProblemSpec& spec, std::span<const double> x) {
    check_point(spec, x);
    OperatorCoefficients k;
    const double eps = spec.epsilon;
    const double mu = spec.mu.value_or(eps);
    switch (spec.id) {
    case ProblemId::cd1d:
        k.diffusion[0][0][0] = -eps;
        k.convection[0][0][0] = 1.0;
        k.reaction[0][0] = 1.0;
        break;
    case ProblemId::rd1d:
        k.diffusion[0][0][0] = -eps * eps;
        k.reaction[0][0] = 8.0;
        break;
    case ProblemId::cd_coupled:
        k.diffusion[0][0][0] = -eps;
        k.convection[0][0][0] = -1.0;
        k.reaction[0][0] = 2.0;
        k.reaction[0][1] = -1.0;
        k.diffusion[1][1][0] = -mu;
        k.convection[1][1][0] = -2.0;
        k.reaction[1][1] = 4.0;
        k.reaction[1][0] = -1.0;
        break;
    case ProblemId::rd_coupled:
        k.diffusion[0][0][0] = -eps * eps;
        k.reaction[0][0] = 2.0;
        k.reaction[0][1] = -1.0;
        k.diffusion[1][1][0] = -mu * mu;
        k.reaction[1][0] = -1.0;
        k.reaction[1][1] = 4.0;
        break;
    case ProblemId::cd2d_ex2:
        k.diffusion[0][0][0] = -eps;
        k.diffusion[0][0][1] = -eps;
        k.convection[0][0][0] = -(2.0 - x[0]);
        k.convection[0][0][1] = -1.0;
        k.reaction[0][0] = 1.5;
        break;
    case ProblemId::cd2d_ex3:
        k.diffusion[0][0][0] = -eps;
        k.diffusion[0][0][1] = -eps;
        k.convection[0][0][0] = -1.0;
        k.convection[0][0][1] = -1.0;
        k.reaction[0][0] = 1.0;
        break;
    }
    return k;
}

std::vector<double> apply_operator(const ProblemSpec& spec, std::span<const Jet2> jets, std::span<const double> x) {
    if (static_cast<int>(jets.size()) != spec.n_components) {
        throw ConfigError("expected one jet per solution component");
    }
    const OperatorCoefficients k = operator_coefficients(spec, x);
    std::vector<double> out(spec.n_components, 0.0);
    for (int c = 0; c < spec.n_components; ++c) {
        double acc = 0.0;
        for (int cc = 0; cc < spec.n_components; ++cc) {
            const Jet2& j = jets[cc];
            if (j.dim() != spec.dim) {
                throw ConfigError("jet dimension does not match the problem");
            }
            acc += k.reaction[c][cc] * j.value;
            for (int a = 0; a < spec.dim; ++a) {
                acc += k.convection[c][cc][a] * j.grad[a] + k.diffusion[c][cc][a] * j.hess_diag[a];
            }
        }
        out[c] = acc;
    }
    return out;
}

ResidualValue residual(const ProblemSpec& spec, std::span<const Jet2> jets, std::span<const double> x) {
    ResidualValue r{apply_operator(spec, jets, x)};
    const std::vector<double> f = manufactured_source(spec, x);
    for (std::size_t c = 0; c < f.size(); ++c) r.components[c] -= f[c];
    return r;
}

std::vector<double> analytic_solution(const ProblemSpec& spec, std::span<const double> x) {
    check_point(spec, x);
    const double y = spec.dim == 2 ? x[1] : 0.0;
    const auto u = analytic_impl<double>(spec, x[0], y);
    return {u.begin(), u.begin() + spec.n_components};
}

std::vector<Jet2> analytic_jets(const ProblemSpec& spec, std::span<const double> x) {
    check_point(spec, x);
    std::vector<Jet2> jets(spec.n_components, Jet2(spec.dim));
    for (int axis = 0; axis < spec.dim; ++axis) {
        using D = Dual2<double>;
        const D xs = axis == 0 ? D::variable(x[0]) : D(x[0]);
        const D ys = spec.dim == 2 ? (axis == 1 ? D::variable(x[1]) : D(x[1])) : D(0.0);
        const auto u = analytic_impl<D>(spec, xs, ys);
        for (int c = 0; c < spec.n_components; ++c) {
            jets[c].value = u[c].v;
            jets[c].grad[axis] = u[c].d;
            jets[c].hess_diag[axis] = u[c].dd;
        }
    }
    return jets;
}

std::vector<double> manufactured_source(const ProblemSpec& spec, std::span<const double> x) {
    const auto jets = analytic_jets(spec, x);
    return apply_operator(spec, jets, x);
}

} // namespace cpinn
