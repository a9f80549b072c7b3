#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "cpinn/loss.hpp"
#include "cpinn/network.hpp"
#include "cpinn/optimizer.hpp"
#include "cpinn/problems.hpp"
#include "cpinn/sampling.hpp"

namespace cpinn {

/// Subnetwork shapes. For pinn/pipinn only `outer_width` is used (the plain
/// network per component).
struct Architecture {
    int hidden_layers = 3;
    int outer_width = 50;
    int inner_width = 100;
};

/// 1D scalar problems: outer 50 / inner 100. Coupled and 2D: 100 / 150.
/// pipinn uses width 150; pinn uses the problem's outer width.
Architecture default_architecture(ProblemId problem, Variant variant);

/// Xavier-initialized model for the variant: cpinn follows the problem's
/// inner-network recipe, pinn/pipinn get one plain network per component.
CompositeModel build_model(const ProblemSpec& spec, Variant variant, const Architecture& arch,
                           std::mt19937_64& rng);

struct TrainingConfig {
    ProblemId problem = ProblemId::cd1d;
    std::optional<double> epsilon;
    std::optional<double> mu;
    Variant variant = Variant::cpinn;
    long epochs = 10000;
    double lr = 5e-4;
    LrSchedule schedule;
    int n_collocation = 600;
    int n_boundary_per_face = 50;
    std::uint64_t seed = 0;
    long log_every = 500;
    LossWeights weights;
    Architecture arch;
    bool resample_every_epoch = false;
    /// Collocation points per step; unset means the whole set.
    std::optional<int> batch_size;
};

/// Per-problem defaults: 10000 epochs for the 1D scalar problems, 7000
/// otherwise; lr 5e-4 (1e-3 with step decay for pipinn); 600 collocation points.
TrainingConfig default_config(ProblemId problem, Variant variant);

/// Throws ConfigError for inconsistent settings.
void validate(const TrainingConfig& config);

struct LossRecord {
    long epoch = 0;
    double total = 0.0;
    double residual_term = 0.0;
    double boundary_term = 0.0;
    double lr_used = 0.0;
};

struct RunMetrics {
    double final_loss = 0.0;
    /// Per component.
    std::vector<double> l2_rel_error;
    std::vector<double> max_abs_error;
    double wall_time_seconds = 0.0;
};

struct SolutionRow {
    std::array<double, 2> x{};
    int component = 0;
    double predicted = 0.0;
    double exact = 0.0;
    double abs_error = 0.0;
};

struct SolutionTable {
    int dim = 1;
    std::vector<SolutionRow> rows;
};

struct Evaluation {
    RunMetrics metrics;
    SolutionTable table;
};

/// Compares a model against the analytic solution on `grid`.
Evaluation evaluate(const CompositeModel& model, const ProblemSpec& spec, const PointSet& grid);

/// Same, for any field given as a point -> component values function.
Evaluation evaluate(const std::function<std::vector<double>(std::span<const double>)>& field,
                    const ProblemSpec& spec, const PointSet& grid);

struct TrainingResult {
    ProblemSpec spec;
    CompositeModel model;
    std::vector<LossRecord> records;
    RunMetrics metrics;
    SolutionTable solution;
};

/// Model and point sets train() starts from for this config.
CompositeModel initial_model(const TrainingConfig& config);
TrainingSet initial_training_set(const TrainingConfig& config);

using ProgressCallback = std::function<void(const LossRecord&)>;

/// Runs `epochs` Adam steps on the fixed point sets, logging epoch 0 and
/// every `log_every` epochs (the loss after that many updates). Deterministic
/// for a given config. Throws DivergenceError on a non-finite loss.
TrainingResult train(const TrainingConfig& config, const ProgressCallback& progress = {});

} // namespace cpinn
