#pragma once

#include <stdexcept>
#include <string>

namespace lrq {

// Failure of the numerics during a run (pole hit, non-finite sample, ...).
// Distinct from config/usage errors so the CLI can map them to exit code 3.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The auxiliary angle system reached a coordinate pole where cot(lambda)
// blows up. Carries the first offending time.
class singularity_error : public numerical_error {
public:
    singularity_error(double t, double lambda_value)
        : numerical_error("auxiliary system hit a coordinate pole at t = " +
                          std::to_string(t) + " (lambda = " + std::to_string(lambda_value) + ")"),
          time_(t), lambda_(lambda_value) {}

    double time() const noexcept { return time_; }
    double lambda_value() const noexcept { return lambda_; }

private:
    double time_;
    double lambda_;
};

// Scenario-config problems: parse errors, unknown keys, bad values.
class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lrq
