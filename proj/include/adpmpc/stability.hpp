#pragma once

#include <string>

#include <Eigen/Dense>

#include "adpmpc/controller.hpp"

namespace adpmpc {

struct AuditConfig {
    Polytope X;
    int points_per_axis = 21;
    double exclusion_radius = 1e-4;  // division by ||x||^2 is ill-posed near 0
    const ControllerSpec* controller = nullptr;
    const NonlinearPlant* plant = nullptr;
};

enum class AuditVerdict { CertifiedDecrease, Violated, Inconclusive };

struct AuditReport {
    double c1 = 0.0;  // lambda_min(Q)
    double c2 = 0.0;  // -max c(x) over the tested grid
    Eigen::VectorXd worst_state;
    long points_tested = 0;
    double grid_step = 0.0;       // largest per-axis spacing actually used
    double precision_digits = 0;  // h, from the grid step
    double origin_cost = 0.0;     // J*_N(0); nonzero constant block is flagged
    bool origin_offset_flagged = false;
    AuditVerdict verdict = AuditVerdict::Inconclusive;
    std::string note;
};

/// Realized closed-loop cost at x: stage cost of the applied control plus the
/// selected quadratic at the one-step prediction.
double closed_loop_cost(const Eigen::VectorXd& x, const ControllerSpec& spec,
                        const NonlinearPlant& plant);

/// Grid-based Lyapunov decrease audit of the configured closed loop.
AuditReport audit(const AuditConfig& config);

std::string format_report(const AuditReport& report);

}  // namespace adpmpc
