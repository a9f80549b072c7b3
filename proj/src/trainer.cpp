#include "cpinn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "cpinn/errors.hpp"

namespace cpinn {

namespace {

bool is_scalar_1d(ProblemId id) { return id == ProblemId::cd1d || id == ProblemId::rd1d; }

std::mt19937_64 seeded(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

PointSet sample_collocation(const ProblemSpec& spec, const TrainingConfig& cfg, std::mt19937_64& rng,
                            bool random_1d) {
    if (spec.dim == 1) {
        return random_1d ? random_collocation_1d(cfg.n_collocation, rng) : uniform_collocation_1d(cfg.n_collocation);
    }
    return lhs_2d(cfg.n_collocation, rng);
}

TrainingSet window(const TrainingSet& full, Eigen::Index start, Eigen::Index count) {
    TrainingSet w;
    const Eigen::Index n = full.collocation.size();
    w.collocation.points.resize(full.collocation.dim(), count);
    w.source.resize(count, full.source.cols());
    for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::Index k = (start + i) % n;
        w.collocation.points.col(i) = full.collocation.points.col(k);
        w.source.row(i) = full.source.row(k);
    }
    w.boundary = full.boundary;
    w.initial = full.initial;
    w.initial_target = full.initial_target;
    return w;
}

} // namespace

Architecture default_architecture(ProblemId problem, Variant variant) {
    Architecture a;
    if (is_scalar_1d(problem)) {
        a.outer_width = 50;
        a.inner_width = 100;
    } else {
        a.outer_width = 100;
        a.inner_width = 150;
    }
    if (variant == Variant::pipinn) a.outer_width = 150;
    return a;
}

CompositeModel build_model(const ProblemSpec& spec, Variant variant, const Architecture& arch,
                           std::mt19937_64& rng) {
    if (arch.hidden_layers < 1 || arch.outer_width < 1 || arch.inner_width < 1) {
        throw ConfigError("architecture needs at least one hidden layer of positive width");
    }
    std::vector<Mlp> outer;
    for (int c = 0; c < spec.n_components; ++c) {
        outer.push_back(xavier_init(dense_layer_sizes(spec.dim, arch.outer_width, arch.hidden_layers), rng));
    }
    std::vector<InnerNet> inner;
    if (variant == Variant::cpinn) {
        for (const auto& r : spec.recipe) {
            inner.push_back(
                {xavier_init(dense_layer_sizes(spec.dim, arch.inner_width, arch.hidden_layers), rng), r.blend,
                 r.component});
        }
    }
    return CompositeModel(spec.dim, std::move(outer), std::move(inner));
}

TrainingConfig default_config(ProblemId problem, Variant variant) {
    TrainingConfig c;
    c.problem = problem;
    c.variant = variant;
    c.epochs = is_scalar_1d(problem) ? 10000 : 7000;
    c.lr = 5e-4;
    if (variant == Variant::pipinn) {
        c.lr = 1e-3;
        c.schedule.kind = ScheduleKind::step_decay;
    }
    c.arch = default_architecture(problem, variant);
    return c;
}

void validate(const TrainingConfig& config) {
    if (config.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (!(config.lr > 0.0) || !std::isfinite(config.lr)) throw ConfigError("learning rate must be positive");
    if (config.log_every < 1 || config.log_every > config.epochs) {
        throw ConfigError("log_every must lie in [1, epochs]");
    }
    if (config.n_collocation < 2) throw ConfigError("need at least 2 collocation points");
    if (config.n_boundary_per_face < 1) throw ConfigError("need at least 1 boundary point per face");
    if (config.schedule.kind == ScheduleKind::step_decay &&
        (!(config.schedule.decay_factor > 0.0) || config.schedule.decay_factor > 1.0 ||
         config.schedule.decay_every < 1)) {
        throw ConfigError("step decay needs a factor in (0,1] and a positive interval");
    }
    if (config.batch_size && (*config.batch_size < 1 || *config.batch_size > config.n_collocation)) {
        throw ConfigError("batch size must lie in [1, n_collocation]");
    }
    config.weights.validate();
}

Evaluation evaluate(const std::function<std::vector<double>(std::span<const double>)>& field,
                    const ProblemSpec& spec, const PointSet& grid) {
    if (grid.dim() != spec.dim) throw ConfigError("grid dimension does not match the problem");
    Evaluation ev;
    ev.table.dim = spec.dim;
    const int nc = spec.n_components;
    std::vector<double> err_sq(nc, 0.0), exact_sq(nc, 0.0);
    ev.metrics.max_abs_error.assign(nc, 0.0);
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        const std::span<const double> x(grid.points.col(i).data(), spec.dim);
        const auto pred = field(x);
        const auto exact = analytic_solution(spec, x);
        for (int c = 0; c < nc; ++c) {
            SolutionRow row;
            row.x[0] = x[0];
            if (spec.dim == 2) row.x[1] = x[1];
            row.component = c;
            row.predicted = pred[c];
            row.exact = exact[c];
            row.abs_error = std::abs(pred[c] - exact[c]);
            err_sq[c] += row.abs_error * row.abs_error;
            exact_sq[c] += exact[c] * exact[c];
            ev.metrics.max_abs_error[c] = std::max(ev.metrics.max_abs_error[c], row.abs_error);
            ev.table.rows.push_back(row);
        }
    }
    for (int c = 0; c < nc; ++c) {
        const double err = std::sqrt(err_sq[c]);
        const double ref = std::sqrt(exact_sq[c]);
        ev.metrics.l2_rel_error.push_back(ref > 0.0 ? err / ref : err);
    }
    return ev;
}

Evaluation evaluate(const CompositeModel& model, const ProblemSpec& spec, const PointSet& grid) {
    if (model.input_dim() != spec.dim || model.n_components() != spec.n_components) {
        throw ConfigError("model shape does not match the problem");
    }
    const auto jets = forward_jets(model, grid.points, 0);
    Eigen::Index next = 0;
    // grid points are visited in order, so index the batched values sequentially
    return evaluate(
        [&](std::span<const double>) {
            std::vector<double> u(jets.size());
            for (std::size_t c = 0; c < jets.size(); ++c) u[c] = jets[c].value(next);
            ++next;
            return u;
        },
        spec, grid);
}

CompositeModel initial_model(const TrainingConfig& config) {
    validate(config);
    std::mt19937_64 rng = seeded(config.seed, 1);
    return build_model(make_problem(config.problem, config.epsilon, config.mu), config.variant, config.arch, rng);
}

TrainingSet initial_training_set(const TrainingConfig& config) {
    validate(config);
    const ProblemSpec spec = make_problem(config.problem, config.epsilon, config.mu);
    std::mt19937_64 rng = seeded(config.seed, 2);
    return make_training_set(spec, sample_collocation(spec, config, rng, false),
                             boundary_points(spec.dim, config.n_boundary_per_face));
}

TrainingResult train(const TrainingConfig& config, const ProgressCallback& progress) {
    validate(config);
    const auto t0 = std::chrono::steady_clock::now();

    TrainingResult result;
    result.spec = make_problem(config.problem, config.epsilon, config.mu);
    const ProblemSpec& spec = result.spec;

    result.model = initial_model(config);
    CompositeModel& model = result.model;
    check_architecture(model, spec, config.variant);

    // Same stream as initial_training_set, kept alive for resampling.
    std::mt19937_64 sample_rng = seeded(config.seed, 2);
    TrainingSet full = make_training_set(spec, sample_collocation(spec, config, sample_rng, false),
                                         boundary_points(spec.dim, config.n_boundary_per_face));
    const bool batched = config.batch_size && *config.batch_size < config.n_collocation;

    AdamState adam = AdamState::for_parameters(model.parameter_blocks(), config.lr);
    double last_finite = std::nan("");

    auto record = [&](long epoch, const LossBreakdown& b, double lr) {
        LossRecord r{epoch, b.total, b.residual_term, b.boundary_term, lr};
        result.records.push_back(r);
        if (progress) progress(r);
    };

    try {
        for (long epoch = 0; epoch < config.epochs; ++epoch) {
            if (config.resample_every_epoch && epoch > 0) {
                full = make_training_set(spec, sample_collocation(spec, config, sample_rng, true),
                                         std::move(full.boundary));
            }
            const double lr = effective_lr(config.schedule, config.lr, epoch);
            adam.lr = lr;

            LossEvaluation ev;
            if (batched) {
                const Eigen::Index start = (epoch * *config.batch_size) % config.n_collocation;
                ev = total_loss_and_gradient(model, spec, window(full, start, *config.batch_size), config.weights,
                                             config.variant, epoch);
                if (epoch % config.log_every == 0) {
                    record(epoch, total_loss(model, spec, full, config.weights, config.variant), lr);
                }
            } else {
                ev = total_loss_and_gradient(model, spec, full, config.weights, config.variant, epoch);
                if (epoch % config.log_every == 0) record(epoch, ev.breakdown, lr);
            }
            adam_step(adam, model.parameter_blocks(), ev.gradient, epoch);
            last_finite = ev.breakdown.total;
        }
        const LossBreakdown final_loss = total_loss(model, spec, full, config.weights, config.variant);
        if (!std::isfinite(final_loss.total)) {
            throw DivergenceError("loss became non-finite after the last update", config.epochs, final_loss.total);
        }
        if (config.epochs % config.log_every == 0) {
            record(config.epochs, final_loss, effective_lr(config.schedule, config.lr, config.epochs));
        }
        result.metrics.final_loss = final_loss.total;
    } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (last finite loss " + std::to_string(last_finite) + ")",
                              e.epoch(), last_finite);
    }

    Evaluation ev = evaluate(model, spec, evaluation_grid(spec.dim, layer_faces(spec)));
    ev.metrics.final_loss = result.metrics.final_loss;
    result.metrics = std::move(ev.metrics);
    result.solution = std::move(ev.table);
    result.metrics.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

} // namespace cpinn
