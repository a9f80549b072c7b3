#pragma once

#include <stdexcept>
#include <string>

namespace cpinn {

/// Invalid configuration: bad sizes, unknown ids, mismatched architectures.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long epoch, double last_finite_loss)
        : std::runtime_error(what), epoch_(epoch), last_finite_loss_(last_finite_loss) {}

    long epoch() const noexcept { return epoch_; }
    double last_finite_loss() const noexcept { return last_finite_loss_; }

private:
    long epoch_;
    double last_finite_loss_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cpinn
