#include <doctest.h>

#include <cmath>
#include <random>

#include "cpinn/errors.hpp"
#include "cpinn/loss.hpp"
#include "cpinn/trainer.hpp"
#include "oracles.hpp"

using namespace cpinn;

namespace {

ResidualValue rv(std::vector<double> c) { return ResidualValue{std::move(c)}; }

// Jets of the analytic solution at every point of the set, shaped for assemble_loss.
JetSet analytic_jet_set(const ProblemSpec& spec, const TrainingSet& set) {
    JetSet jets(2);
    const PointSet* sets[2] = {&set.collocation, &set.boundary};
    for (int s = 0; s < 2; ++s) {
        const auto n = sets[s]->size();
        for (int c = 0; c < spec.n_components; ++c) {
            JetBatch b;
            b.value.resize(n);
            b.grad.resize(n, spec.dim);
            b.hess.resize(n, spec.dim);
            jets[s].push_back(b);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::span<const double> x(sets[s]->points.col(i).data(), spec.dim);
            const auto aj = analytic_jets(spec, x);
            for (int c = 0; c < spec.n_components; ++c) {
                jets[s][c].value(i) = aj[c].value;
                for (int k = 0; k < spec.dim; ++k) {
                    jets[s][c].grad(i, k) = aj[c].grad[k];
                    jets[s][c].hess(i, k) = aj[c].hess_diag[k];
                }
            }
        }
    }
    return jets;
}

} // namespace

TEST_CASE("variant names") {
    CHECK(variant_name(Variant::pipinn) == "pipinn");
    CHECK(parse_variant("cpinn") == Variant::cpinn);
    CHECK(parse_variant("pinn") == Variant::pinn);
    CHECK_FALSE(parse_variant("cPINN").has_value());
}

TEST_CASE("residual_mse examples") {
    CHECK(residual_mse(std::vector{rv({0.0}), rv({0.0})}) == 0.0);
    CHECK(residual_mse(std::vector{rv({2.0})}) == 4.0);
    CHECK(residual_mse(std::vector{rv({1.0}), rv({3.0})}) == 5.0);
    CHECK(residual_mse(std::vector{rv({1.0, 2.0})}) == 5.0);
    CHECK_THROWS_AS(residual_mse(std::vector<ResidualValue>{}), ConfigError);
}

TEST_CASE("soft weighted residual examples") {
    const std::vector r{rv({1.0}), rv({-2.0}), rv({0.0})};
    CHECK(soft_weighted_residual_loss(r, 0.0) == 5.0);
    CHECK(soft_weighted_residual_loss(std::vector{rv({1.0})}, 0.8) == doctest::Approx(0.449328964117).epsilon(1e-11));
    CHECK(soft_weighted_residual_loss(std::vector{rv({0.0})}, 0.8) == 0.0);
    CHECK(soft_weighted_residual_loss(r, 0.8) == doctest::Approx(std::exp(-0.8) + 4.0 * std::exp(-1.6)));
}

TEST_CASE("boundary_mse examples") {
    CompositeModel zero(1, {Mlp({1, 4, 1})});
    CHECK(boundary_mse(zero, boundary_points(1, 1)) == 0.0);

    // u(x) = 0.1 - 0.2 x
    Mlp lin({1, 1});
    lin.weight(0)(0, 0) = -0.2;
    lin.bias(0)(0) = 0.1;
    const CompositeModel model(1, {lin});
    CHECK(boundary_mse(model, boundary_points(1, 1)) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK_THROWS_AS(boundary_mse(model, PointSet{Eigen::MatrixXd(1, 0), PointRole::boundary}), ConfigError);
}

TEST_CASE("loss weights validation") {
    LossWeights w;
    CHECK_NOTHROW(w.validate());
    w.lambda_B = -1.0;
    CHECK_THROWS_AS(w.validate(), ConfigError);
    w.lambda_B = std::nan("");
    CHECK_THROWS_AS(w.validate(), ConfigError);
}

TEST_CASE("zero model on rd1d") {
    const auto spec = make_problem(ProblemId::rd1d);
    const auto set = make_training_set(spec, uniform_collocation_1d(50), boundary_points(1, 1));
    const CompositeModel model(1, {Mlp({1, 5, 5, 1})});
    const auto b = total_loss(model, spec, set, {}, Variant::pinn);
    CHECK(b.boundary_term == 0.0);
    CHECK(b.residual_term == doctest::Approx(set.source.square().mean()).epsilon(1e-14));
    CHECK(b.total == b.residual_term);

    LossWeights none;
    none.lambda_D = none.lambda_B = none.lambda_I = 0.0;
    CHECK(total_loss(model, spec, set, none, Variant::pinn).total == 0.0);
}

TEST_CASE("architecture must match the variant") {
    std::mt19937_64 rng(1);
    const auto spec = make_problem(ProblemId::rd1d);
    const auto set = make_training_set(spec, uniform_collocation_1d(10), boundary_points(1, 1));
    const CompositeModel plain = build_model(spec, Variant::pinn, {2, 4, 4}, rng);
    const CompositeModel comp = build_model(spec, Variant::cpinn, {2, 4, 4}, rng);
    CHECK_THROWS_AS(total_loss(plain, spec, set, {}, Variant::cpinn), ConfigError);
    CHECK_THROWS_AS(total_loss(comp, spec, set, {}, Variant::pinn), ConfigError);
    CHECK_THROWS_AS(total_loss(comp, spec, set, {}, Variant::pipinn), ConfigError);
    const auto cd = make_problem(ProblemId::cd1d);
    CHECK_THROWS_AS(total_loss(comp, cd, set, {}, Variant::cpinn), ConfigError);
    const auto coupled = make_problem(ProblemId::cd_coupled);
    CHECK_THROWS_AS(total_loss(plain, coupled, make_training_set(coupled, uniform_collocation_1d(10),
                                                                 boundary_points(1, 1)),
                               {}, Variant::pinn),
                    ConfigError);
}

TEST_CASE("analytic field gives a near-zero pipinn loss on cd1d") {
    const auto spec = make_problem(ProblemId::cd1d);
    const auto set = make_training_set(spec, uniform_collocation_1d(600), boundary_points(1, 1));
    const JetSet jets = analytic_jet_set(spec, set);
    CHECK(assemble_loss(spec, set, jets, {}, Variant::pipinn).total <= 1e-6);
    CHECK(assemble_loss(spec, set, jets, {}, Variant::cpinn).total <= 1e-6);
}

TEST_CASE("pipinn scales the x=1 boundary term") {
    const auto spec = make_problem(ProblemId::cd1d);
    const auto set = make_training_set(spec, uniform_collocation_1d(4), boundary_points(1, 1));
    Mlp constant({1, 1});
    constant.bias(0)(0) = 0.5;
    const CompositeModel model(1, {constant});
    const auto pip = total_loss(model, spec, set, {}, Variant::pipinn);
    const auto pin = total_loss(model, spec, set, {}, Variant::pinn);
    CHECK(pip.boundary_term == doctest::Approx(0.25 + 3.0 * 0.25).epsilon(1e-15));
    CHECK(pin.boundary_term == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("loss identity, nonnegativity and scaling on random models") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (ProblemId id : kAllProblems) {
        const auto spec = make_problem(id);
        const PointSet coll = spec.dim == 1 ? uniform_collocation_1d(40) : lhs_2d(40, rng);
        const auto set = make_training_set(spec, coll, boundary_points(spec.dim, 5));
        for (Variant v : {Variant::pinn, Variant::pipinn, Variant::cpinn}) {
            CAPTURE(problem_name(id));
            CAPTURE(variant_name(v));
            const CompositeModel model = build_model(spec, v, {2, 6, 6}, rng);
            LossWeights w;
            w.lambda_D = u(rng);
            w.lambda_B = u(rng);
            w.lambda_I = u(rng);
            const auto b = total_loss(model, spec, set, w, v);
            CHECK(std::isfinite(b.total));
            CHECK(b.residual_term >= 0.0);
            CHECK(b.boundary_term >= 0.0);
            CHECK(b.initial_term >= 0.0);
            const double sum = w.lambda_D * b.residual_term + w.lambda_B * b.boundary_term + w.lambda_I * b.initial_term;
            CHECK(cpinn::testing::close(b.total, sum, 1e-12, 0.0));

            LossWeights w2 = w;
            w2.lambda_D *= 2.0;
            const auto b2 = total_loss(model, spec, set, w2, v);
            CHECK(b2.total - b.total == doctest::Approx(w.lambda_D * b.residual_term).epsilon(1e-12));

            const auto ev = total_loss_and_gradient(model, spec, set, w, v);
            CHECK(ev.breakdown.total == b.total);
            CHECK(ev.gradient.all_finite());
        }
    }
}

TEST_CASE("initial-condition term") {
    const auto spec = make_problem(ProblemId::rd1d);
    auto set = make_training_set(spec, uniform_collocation_1d(10), boundary_points(1, 1));
    set.initial = PointSet{Eigen::MatrixXd::Constant(1, 2, 0.5), PointRole::boundary};
    set.initial_target = Eigen::ArrayXXd::Constant(2, 1, 1.0);
    const CompositeModel model(1, {Mlp({1, 3, 1})});
    LossWeights w;
    w.lambda_I = 2.0;
    const auto b = total_loss(model, spec, set, w, Variant::pinn);
    CHECK(b.initial_term == 1.0);
    CHECK(b.total == doctest::Approx(b.residual_term + 2.0).epsilon(1e-14));
}
