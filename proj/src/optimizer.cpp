#include "cpinn/optimizer.hpp"

#include <cmath>
#include <string>

#include "cpinn/errors.hpp"

namespace cpinn {

AdamState AdamState::for_parameters(std::span<const std::span<double>> params, double lr) {
    AdamState s;
    s.lr = lr;
    for (const auto& p : params) {
        s.m.emplace_back(p.size(), 0.0);
        s.v.emplace_back(p.size(), 0.0);
    }
    return s;
}

void adam_step(AdamState& state, std::span<const std::span<double>> params, const ParamGradient& grads,
               long epoch) {
    if (params.size() != grads.blocks.size() || params.size() != state.m.size()) {
        throw ConfigError("parameter, gradient and moment layouts differ");
    }
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads.blocks[b].size() || params[b].size() != state.m[b].size()) {
            throw ConfigError("parameter, gradient and moment layouts differ");
        }
    }
    if (!grads.all_finite()) {
        throw DivergenceError("non-finite gradient" + (epoch >= 0 ? " at epoch " + std::to_string(epoch) : ""),
                              epoch, std::nan(""));
    }

    ++state.step_count;
    const double t = static_cast<double>(state.step_count);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t b = 0; b < params.size(); ++b) {
        auto& m = state.m[b];
        auto& v = state.v[b];
        const auto& g = grads.blocks[b];
        auto p = params[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps_hat);
        }
    }
}

double effective_lr(const LrSchedule& schedule, double base_lr, long epoch) {
    if (schedule.kind == ScheduleKind::constant || epoch <= 0) return base_lr;
    return base_lr * std::pow(schedule.decay_factor, static_cast<double>(epoch / schedule.decay_every));
}

} // namespace cpinn
