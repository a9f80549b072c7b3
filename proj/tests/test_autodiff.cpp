#include <doctest.h>

#include <random>

#include "cpinn/autodiff.hpp"
#include "cpinn/errors.hpp"
#include "cpinn/loss.hpp"
#include "cpinn/trainer.hpp"
#include "oracles.hpp"

using namespace cpinn;
using cpinn::testing::close;

namespace {

Mlp linear_unit(double w, double b) {
    Mlp m({1, 1});
    m.weight(0)(0, 0) = w;
    m.bias(0)(0) = b;
    return m;
}

void check_jet_against_fd(const std::function<double(std::span<const double>)>& f, const Jet2& got,
                          const std::vector<double>& x) {
    const Jet2 fd = cpinn::testing::fd_jet(f, x, 1e-4);
    CHECK(got.value == doctest::Approx(fd.value).epsilon(1e-14));
    for (int k = 0; k < got.dim(); ++k) {
        CHECK_MESSAGE(close(got.grad[k], fd.grad[k], 1e-5, 1e-8), "grad ", k, ": ", got.grad[k], " vs ", fd.grad[k]);
        CHECK_MESSAGE(close(got.hess_diag[k], fd.hess_diag[k], 1e-5, 1e-6), "hess ", k, ": ", got.hess_diag[k],
                      " vs ", fd.hess_diag[k]);
    }
}

} // namespace

TEST_CASE("linear unit has exact jet") {
    const Mlp m = linear_unit(3.0, 1.0);
    const std::vector<double> x{0.5};
    const Jet2 j = eval_jet(m, x);
    CHECK(j.value == 2.5);
    CHECK(j.grad[0] == 3.0);
    CHECK(j.hess_diag[0] == 0.0);
}

TEST_CASE("all-zero weights give the output bias and flat derivatives") {
    Mlp m({2, 7, 7, 1});
    m.bias(2)(0) = -0.75;
    const std::vector<double> x{0.2, 0.9};
    const Jet2 j = eval_jet(m, x);
    CHECK(j.value == -0.75);
    for (int k = 0; k < 2; ++k) {
        CHECK(j.grad[k] == 0.0);
        CHECK(j.hess_diag[k] == 0.0);
    }
}

TEST_CASE("random tanh MLP jet matches finite differences at x=0.3") {
    std::mt19937_64 rng(11);
    const Mlp m = cpinn::testing::random_mlp({1, 20, 20, 20, 1}, rng);
    const std::vector<double> x{0.3};
    check_jet_against_fd([&](std::span<const double> p) { return m.forward(p)(0); }, eval_jet(m, x), x);
}

TEST_CASE("jets agree with finite differences over random models and points") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<int> width(3, 24);
    for (int trial = 0; trial < 120; ++trial) {
        const int dim = 1 + trial % 2;
        const Mlp m = cpinn::testing::random_mlp({dim, width(rng), width(rng), width(rng), 1}, rng);
        std::vector<double> x(dim);
        for (double& v : x) v = u01(rng);
        check_jet_against_fd([&](std::span<const double> p) { return m.forward(p)(0); }, eval_jet(m, x), x);
    }
}

TEST_CASE("jets match an independent dual-number forward pass") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int dim = 1 + trial % 2;
        const Mlp m = cpinn::testing::random_mlp({dim, 16, 16, 16, 1}, rng);
        std::vector<double> x(dim);
        for (double& v : x) v = u01(rng);
        const Jet2 got = eval_jet(m, x);
        const Jet2 ref = cpinn::testing::dual_jet(m, x);
        CHECK(close(got.value, ref.value, 1e-12, 1e-14));
        for (int k = 0; k < dim; ++k) {
            CHECK(close(got.grad[k], ref.grad[k], 1e-12, 1e-14));
            CHECK(close(got.hess_diag[k], ref.hess_diag[k], 1e-12, 1e-14));
        }
    }
}

TEST_CASE("composite jet equals the expanded product rule") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int dim = 1 + trial % 2;
        const Mlp outer = cpinn::testing::random_mlp({dim, 10, 10, 1}, rng);
        const Mlp in0 = cpinn::testing::random_mlp({dim, 12, 12, 1}, rng);
        const Mlp in1 = cpinn::testing::random_mlp({dim, 12, 12, 1}, rng);
        const BlendDescriptor b0 = layer_at_zero(0, 0.3);
        const BlendDescriptor b1 = layer_at_one(dim - 1, 0.2);
        const CompositeModel model(dim, {outer}, {{in0, b0, 0}, {in1, b1, 0}});
        std::vector<double> x(dim);
        for (double& v : x) v = u01(rng);

        const Jet2 got = eval_jet(model, x);
        Jet2 want = cpinn::testing::dual_jet(outer, x);
        for (const auto& [net, blend] : {std::pair{&in0, b0}, std::pair{&in1, b1}}) {
            const Jet2 n = cpinn::testing::dual_jet(*net, x);
            const BlendFactor f = blend.factor(x);
            want.value += n.value * f.value;
            for (int k = 0; k < dim; ++k) {
                const bool on_axis = k == blend.axis;
                const double f1 = on_axis ? f.first : 0.0;
                const double f2 = on_axis ? f.second : 0.0;
                want.grad[k] += n.grad[k] * f.value + n.value * f1;
                want.hess_diag[k] += n.hess_diag[k] * f.value + 2.0 * n.grad[k] * f1 + n.value * f2;
            }
        }
        CHECK(close(got.value, want.value, 1e-10, 1e-14));
        for (int k = 0; k < dim; ++k) {
            CHECK(close(got.grad[k], want.grad[k], 1e-10, 1e-14));
            CHECK(close(got.hess_diag[k], want.hess_diag[k], 1e-10, 1e-14));
        }
    }
}

TEST_CASE("eval_jet rejects a point of the wrong dimension") {
    const Mlp m({2, 3, 1});
    const std::vector<double> x{0.1};
    CHECK_THROWS_AS(eval_jet(m, x), ConfigError);
    const CompositeModel model(2, {m});
    CHECK_THROWS_AS(eval_jet(model, x), ConfigError);
    const std::vector<double> ok{0.1, 0.2};
    CHECK_THROWS_AS(eval_jet(model, ok, 1), ConfigError);
}

TEST_CASE("gradient of (u(0.5) - 1)^2 for a linear unit") {
    const CompositeModel model(1, {linear_unit(3.0, 1.0)});
    const std::vector<JetRequest> req{{Eigen::MatrixXd::Constant(1, 1, 0.5), 2}};
    const auto lg = loss_param_gradient(model, req, [](const JetSet& jets, JetSet& adj) {
        const double u = jets[0][0].value(0);
        adj[0][0].value(0) = 2.0 * (u - 1.0);
        return (u - 1.0) * (u - 1.0);
    });
    CHECK(lg.loss == 2.25);
    REQUIRE(lg.gradient.blocks.size() == 1);
    CHECK(lg.gradient.blocks[0][0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(lg.gradient.blocks[0][1] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("zero loss yields an all-zero gradient") {
    std::mt19937_64 rng(3);
    const auto spec = make_problem(ProblemId::rd1d);
    const CompositeModel model = build_model(spec, Variant::cpinn, {2, 6, 6}, rng);
    const auto set = make_training_set(spec, uniform_collocation_1d(8), boundary_points(1, 1));
    LossWeights w;
    w.lambda_D = w.lambda_B = w.lambda_I = 0.0;
    const auto ev = total_loss_and_gradient(model, spec, set, w, Variant::cpinn);
    CHECK(ev.breakdown.total == 0.0);
    for (const auto& b : ev.gradient.blocks) {
        for (double g : b) CHECK(g == 0.0);
    }
}

TEST_CASE("non-finite loss raises a divergence error carrying the epoch") {
    const CompositeModel model(1, {linear_unit(1.0, 0.0)});
    const std::vector<JetRequest> req{{Eigen::MatrixXd::Constant(1, 1, 0.5), 0}};
    try {
        loss_param_gradient(model, req, [](const JetSet&, JetSet&) { return std::nan(""); }, 17);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.epoch() == 17);
    }
}

TEST_CASE("cd1d residual MSE gradient matches parameter finite differences") {
    std::mt19937_64 rng(8);
    const auto spec = make_problem(ProblemId::cd1d);
    CompositeModel model(1, {cpinn::testing::random_mlp({1, 8, 8, 1}, rng)});
    const auto set = make_training_set(spec, uniform_collocation_1d(10), boundary_points(1, 1));
    LossWeights w;
    w.lambda_B = 0.0;
    const auto ev = total_loss_and_gradient(model, spec, set, w, Variant::pinn);
    auto loss = [&] { return total_loss(model, spec, set, w, Variant::pinn).total; };
    auto params = model.parameter_blocks()[0];
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double fd = cpinn::testing::fd_param(loss, params[i], 1e-5);
        CHECK_MESSAGE(close(ev.gradient.blocks[0][i], fd, 1e-4, 1e-8), "param ", i, ": ", ev.gradient.blocks[0][i],
                      " vs ", fd);
    }
}

TEST_CASE("gradient is linear in the loss") {
    std::mt19937_64 rng(21);
    const CompositeModel model(2, {cpinn::testing::random_mlp({2, 9, 9, 1}, rng)},
                               {{cpinn::testing::random_mlp({2, 7, 1}, rng), layer_at_zero(1, 0.4), 0}});
    Eigen::MatrixXd pts(2, 5);
    pts << 0.1, 0.3, 0.5, 0.7, 0.9, 0.2, 0.8, 0.4, 0.6, 0.05;
    const std::vector<JetRequest> req{{pts, 2}};
    auto l1 = [](const JetSet& j, JetSet& a) {
        a[0][0].hess = 2.0 * j[0][0].hess;
        return j[0][0].hess.square().sum();
    };
    auto l2 = [](const JetSet& j, JetSet& a) {
        a[0][0].value = Eigen::ArrayXd::Ones(j[0][0].size());
        a[0][0].grad.col(1) = 3.0 * j[0][0].grad.col(1).square();
        return j[0][0].value.sum() + j[0][0].grad.col(1).cube().sum();
    };
    const double a = 0.7, b = -2.5;
    const auto g1 = loss_param_gradient(model, req, l1).gradient;
    const auto g2 = loss_param_gradient(model, req, l2).gradient;
    const auto g = loss_param_gradient(model, req, [&](const JetSet& j, JetSet& adj) {
                       JetSet t1 = adj, t2 = adj;
                       const double v = a * l1(j, t1) + b * l2(j, t2);
                       for (std::size_t c = 0; c < adj[0].size(); ++c) {
                           adj[0][c].value = a * t1[0][c].value + b * t2[0][c].value;
                           adj[0][c].grad = a * t1[0][c].grad + b * t2[0][c].grad;
                           adj[0][c].hess = a * t1[0][c].hess + b * t2[0][c].hess;
                       }
                       return v;
                   }).gradient;
    for (std::size_t blk = 0; blk < g.blocks.size(); ++blk) {
        for (std::size_t i = 0; i < g.blocks[blk].size(); ++i) {
            const double want = a * g1.blocks[blk][i] + b * g2.blocks[blk][i];
            CHECK(close(g.blocks[blk][i], want, 1e-12, 1e-15));
        }
    }
}

TEST_CASE("jets and gradients are bit-identical across repeated evaluation") {
    std::mt19937_64 rng(4);
    const auto spec = make_problem(ProblemId::cd2d_ex2);
    const CompositeModel model = build_model(spec, Variant::cpinn, {2, 10, 12}, rng);
    const auto set = make_training_set(spec, lhs_2d(15, 1), boundary_points(2, 3));
    const auto a = total_loss_and_gradient(model, spec, set, {}, Variant::cpinn);
    const auto b = total_loss_and_gradient(model, spec, set, {}, Variant::cpinn);
    CHECK(a.breakdown.total == b.breakdown.total);
    CHECK(a.gradient.blocks == b.gradient.blocks);
    const std::vector<double> x{0.25, 0.75};
    const Jet2 j1 = eval_jet(model, x), j2 = eval_jet(model, x);
    CHECK(j1.value == j2.value);
    CHECK(j1.grad == j2.grad);
    CHECK(j1.hess_diag == j2.hess_diag);
}


TEST_CASE("loss gradient matches finite differences for every variant") {
    std::mt19937_64 rng(31);
    for (ProblemId id : {ProblemId::cd1d, ProblemId::rd1d, ProblemId::cd_coupled, ProblemId::cd2d_ex3}) {
        // Moderate layer thickness keeps the blend factors away from the clamp.
        const bool two_d = id == ProblemId::cd2d_ex3;
        const auto spec = make_problem(id, 0.05, id == ProblemId::cd_coupled ? std::optional(0.02) : std::nullopt);
        const PointSet coll = two_d ? lhs_2d(6, rng) : uniform_collocation_1d(6);
        const auto set = make_training_set(spec, coll, boundary_points(spec.dim, 2));
        for (Variant variant : {Variant::pinn, Variant::pipinn, Variant::cpinn}) {
            CAPTURE(problem_name(id));
            CAPTURE(variant_name(variant));
            CompositeModel model = build_model(spec, variant, {2, 5, 6}, rng);
            // Non-zero biases so no parameter sits at a symmetric point.
            for (auto blk : model.parameter_blocks()) {
                std::uniform_real_distribution<double> u(-0.2, 0.2);
                for (double& p : blk) p += u(rng);
            }
            const LossWeights w;
            const auto ev = total_loss_and_gradient(model, spec, set, w, variant);
            std::vector<double> frozen;
            const double ref = cpinn::testing::reference_loss(model, spec, set, w, variant, nullptr, &frozen);
            CHECK(close(ev.breakdown.total, ref, 1e-10, 1e-14));

            auto loss = [&] {
                const auto* fw = variant == Variant::pipinn ? &frozen : nullptr;
                return cpinn::testing::reference_loss(model, spec, set, w, variant, fw);
            };
            auto blocks = model.parameter_blocks();
            for (std::size_t b = 0; b < blocks.size(); ++b) {
                for (std::size_t i = 0; i < blocks[b].size(); i += 3) {
                    const double fd = cpinn::testing::fd_param(loss, blocks[b][i], 1e-5);
                    CHECK_MESSAGE(close(ev.gradient.blocks[b][i], fd, 1e-4, 1e-8), "block ", b, " param ", i, ": ",
                                  ev.gradient.blocks[b][i], " vs ", fd);
                }
            }
        }
    }
}
