#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "adpmpc/geometry.hpp"

namespace adpmpc {

struct IntegratorSettings {
    enum class Method { RK4, Euler };
    Method method = Method::RK4;
    int substeps = 1;
};

/// Continuous-time plant x' = rhs(x, u) sampled with period Ts. The same
/// abstraction backs the simulator and the controllers' one-step predictor.
struct NonlinearPlant {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
        rhs;
    int n = 0;
    int m = 0;
    Polytope state_constraint;  // X
    Box control_box;            // U
    double sample_time = 0.0;   // Ts, seconds
    IntegratorSettings integrator;
    std::optional<Box> state_clamp;  // physical limits, e.g. [0, H_max]
};

struct StepResult {
    Eigen::VectorXd x;
    bool clamped = false;
};

/// Fixed-step integration over one sampling period. Throws PlantBlowupError
/// on non-finite states.
StepResult step_detailed(const NonlinearPlant& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u);

Eigen::VectorXd step(const NonlinearPlant& plant, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u);

// ---------------------------------------------------------------------------
// Multi-tank system
// ---------------------------------------------------------------------------

/// Cascade of three tanks with variable cross sections: rectangular top tank,
/// trapezoidal middle tank, cylindrical bottom tank. The pump feeds the top
/// tank; outflows follow a power law C_i * H_i^alpha_i.
struct TankParams {
    // geometry (m)
    double a = 0.25;
    double b = 0.345;
    double c = 0.10;
    double w_t = 0.035;
    double R = 0.365;
    double h_max = 0.35;  // same limit for all three tanks

    // valve resistances (m^3/s per m^alpha) and flow exponents.
    // Not published for the experimental rig; these are placeholder defaults.
    double C1 = 1e-3;
    double C2 = 1e-3;
    double C3 = 1e-3;
    double alpha1 = 0.29;
    double alpha2 = 0.2256;
    double alpha3 = 0.2487;

    // pump
    double u_min = 0.54;   // volts
    double u_max = 1.0;    // volts
    double q_max = 1e-3;   // m^3/s at u_max

    void validate() const;
};

/// Right-hand side of the level dynamics, dH/dt for inflow q.
Eigen::Vector3d tank_rhs(const Eigen::Vector3d& H, double q,
                         const TankParams& p);

/// Affine voltage-to-flow map: q(u_min) = 0, q(u_max) = q_max. Voltages
/// outside the box are clamped.
double pump_map(double u, const TankParams& p);

/// Inverse of pump_map, clamped to [u_min, u_max].
double pump_map_inverse(double q, const TankParams& p);

/// Continuous-time Jacobians of the tank dynamics with respect to levels and
/// pump voltage, evaluated analytically.
void tank_jacobians(const Eigen::Vector3d& H, double u, const TankParams& p,
                    Eigen::Matrix3d& dfdH, Eigen::Vector3d& dfdu);

NonlinearPlant make_tank_plant(const TankParams& p, double sample_time,
                               IntegratorSettings integ = {});

struct SteadyState {
    Eigen::Vector3d H;
    double q = 0.0;
    double u = 0.0;
    bool cascade_adjusted = false;  // input levels were not flow-balanced
};

/// Steady state matching the requested top-tank level. If the requested
/// levels are not cascade-consistent, H2 and H3 are recomputed from the flow
/// balance and the result is flagged. Throws UnreachableSetpointError when
/// the required flow exceeds the pump.
SteadyState solve_steady_input(const Eigen::Vector3d& levels,
                               const TankParams& p);

}  // namespace adpmpc
