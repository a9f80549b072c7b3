#pragma once

#include <span>
#include <vector>

#include "cpinn/autodiff.hpp"

namespace cpinn {

/// Adam moments for a block-structured parameter set.
struct AdamState {
    long step_count = 0;
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_hat = 1e-8;
    double lr = 1e-3;

    /// Zero moments shaped like `params`.
    static AdamState for_parameters(std::span<const std::span<double>> params, double lr);
};

/// One bias-corrected Adam update in place. Throws DivergenceError (tagged
/// with `epoch`) on a non-finite gradient and ConfigError on a shape mismatch.
void adam_step(AdamState& state, std::span<const std::span<double>> params, const ParamGradient& grads,
               long epoch = -1);

enum class ScheduleKind { constant, step_decay };

struct LrSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double decay_factor = 0.9;
    long decay_every = 1000;
};

/// base_lr, or base_lr * factor^floor(epoch / decay_every) for step decay.
double effective_lr(const LrSchedule& schedule, double base_lr, long epoch);

} // namespace cpinn
