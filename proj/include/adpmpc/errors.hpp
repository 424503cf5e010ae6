#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace adpmpc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularLinearizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthesisOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PlantBlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyRegionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnreachableSetpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No quantized level keeps the one-step prediction inside the state
/// constraint set. Carries the level with the smallest constraint excess
/// so a harness can still apply something.
struct InfeasibleError : std::runtime_error {
    InfeasibleError(const std::string& msg, Eigen::VectorXd least_violating,
                    double excess)
        : std::runtime_error(msg),
          least_violating_control(std::move(least_violating)),
          violation_excess(excess) {}

    Eigen::VectorXd least_violating_control;
    double violation_excess;
};

}  // namespace adpmpc
