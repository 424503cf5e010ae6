#include "adpmpc/plant.hpp"

#include <cmath>

#include "adpmpc/errors.hpp"

namespace adpmpc {

namespace {

Eigen::VectorXd clamp_state(const NonlinearPlant& plant, Eigen::VectorXd x,
                            bool& clamped) {
    if (!plant.state_clamp) return x;
    const Eigen::VectorXd clipped = plant.state_clamp->clip(x);
    if ((clipped - x).cwiseAbs().maxCoeff() > 0.0) clamped = true;
    return clipped;
}

}  // namespace

StepResult step_detailed(const NonlinearPlant& plant, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u) {
    StepResult out{x, false};
    const int substeps = std::max(1, plant.integrator.substeps);
    const double h = plant.sample_time / substeps;
    for (int s = 0; s < substeps; ++s) {
        if (plant.integrator.method == IntegratorSettings::Method::Euler) {
            out.x += h * plant.rhs(out.x, u);
        } else {
            const Eigen::VectorXd k1 = plant.rhs(out.x, u);
            const Eigen::VectorXd k2 = plant.rhs(out.x + 0.5 * h * k1, u);
            const Eigen::VectorXd k3 = plant.rhs(out.x + 0.5 * h * k2, u);
            const Eigen::VectorXd k4 = plant.rhs(out.x + h * k3, u);
            out.x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.x = clamp_state(plant, std::move(out.x), out.clamped);
    }
    if (!out.x.allFinite())
        throw PlantBlowupError("integration produced a non-finite state");
    return out;
}

Eigen::VectorXd step(const NonlinearPlant& plant, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u) {
    return step_detailed(plant, x, u).x;
}

// ---------------------------------------------------------------------------
// Multi-tank
// ---------------------------------------------------------------------------

void TankParams::validate() const {
    if (a <= 0 || b <= 0 || c <= 0 || w_t <= 0 || R <= 0 || h_max <= 0)
        throw ConfigError("tank params: geometric parameters must be positive");
    if (C1 <= 0 || C2 <= 0 || C3 <= 0)
        throw ConfigError("tank params: valve resistances must be positive");
    if (alpha1 <= 0 || alpha1 > 1 || alpha2 <= 0 || alpha2 > 1 || alpha3 <= 0 ||
        alpha3 > 1)
        throw ConfigError("tank params: flow exponents must be in (0, 1]");
    if (u_min >= u_max || q_max <= 0)
        throw ConfigError("tank params: invalid pump range");
}

namespace {

constexpr double kMinBottomLevel = 1e-6;  // keeps beta3 away from zero

double beta1(const TankParams& p) { return p.a * p.w_t; }

double beta2(double h2, const TankParams& p) {
    return p.c * p.w_t + (h2 / p.h_max) * p.b * p.w_t;
}

double beta3(double h3, const TankParams& p) {
    const double h = std::max(h3, kMinBottomLevel);
    return p.w_t * std::sqrt(std::max(p.R * p.R - (p.R - h) * (p.R - h), 0.0));
}

}  // namespace

Eigen::Vector3d tank_rhs(const Eigen::Vector3d& H, double q,
                         const TankParams& p) {
    const double out1 = p.C1 * std::pow(std::max(H[0], 0.0), p.alpha1);
    const double out2 = p.C2 * std::pow(std::max(H[1], 0.0), p.alpha2);
    const double out3 = p.C3 * std::pow(std::max(H[2], 0.0), p.alpha3);
    Eigen::Vector3d dH;
    dH[0] = (q - out1) / beta1(p);
    dH[1] = (out1 - out2) / beta2(H[1], p);
    dH[2] = (out2 - out3) / beta3(H[2], p);
    return dH;
}

double pump_map(double u, const TankParams& p) {
    const double uc = std::clamp(u, p.u_min, p.u_max);
    return p.q_max * (uc - p.u_min) / (p.u_max - p.u_min);
}

double pump_map_inverse(double q, const TankParams& p) {
    const double qc = std::clamp(q, 0.0, p.q_max);
    return p.u_min + (p.u_max - p.u_min) * qc / p.q_max;
}

void tank_jacobians(const Eigen::Vector3d& H, double u, const TankParams& p,
                    Eigen::Matrix3d& dfdH, Eigen::Vector3d& dfdu) {
    (void)u;
    const double b1 = beta1(p);
    const double b2 = beta2(H[1], p);
    const double b3 = beta3(H[2], p);
    if (b3 <= 0.0 || H[2] <= kMinBottomLevel || H[2] >= 2.0 * p.R)
        throw SingularLinearizationError(
            "tank_jacobians: bottom-tank cross section degenerate");

    const double out1 = p.C1 * std::pow(H[0], p.alpha1);
    const double out2 = p.C2 * std::pow(H[1], p.alpha2);
    const double out3 = p.C3 * std::pow(H[2], p.alpha3);
    const double dout1 = p.C1 * p.alpha1 * std::pow(H[0], p.alpha1 - 1.0);
    const double dout2 = p.C2 * p.alpha2 * std::pow(H[1], p.alpha2 - 1.0);
    const double dout3 = p.C3 * p.alpha3 * std::pow(H[2], p.alpha3 - 1.0);
    const double q = pump_map(u, p);

    const double db2 = p.b * p.w_t / p.h_max;
    const double db3 = p.w_t * (p.R - H[2]) /
                       std::sqrt(p.R * p.R - (p.R - H[2]) * (p.R - H[2]));

    dfdH.setZero();
    dfdH(0, 0) = -dout1 / b1;
    dfdH(1, 0) = dout1 / b2;
    // quotient rule: the trapezoid width depends on H2
    dfdH(1, 1) = -dout2 / b2 - (out1 - out2) * db2 / (b2 * b2);
    dfdH(2, 1) = dout2 / b3;
    dfdH(2, 2) = -dout3 / b3 - (out2 - out3) * db3 / (b3 * b3);
    (void)q;

    const double dq_du = p.q_max / (p.u_max - p.u_min);
    dfdu = Eigen::Vector3d(dq_du / b1, 0.0, 0.0);
}

NonlinearPlant make_tank_plant(const TankParams& p, double sample_time,
                               IntegratorSettings integ) {
    p.validate();
    NonlinearPlant plant;
    plant.n = 3;
    plant.m = 1;
    plant.sample_time = sample_time;
    plant.integrator = integ;
    plant.rhs = [p](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return Eigen::VectorXd(tank_rhs(x.head<3>(), pump_map(u[0], p), p));
    };
    const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
    const Eigen::Vector3d hmax = Eigen::Vector3d::Constant(p.h_max);
    plant.state_constraint = Polytope::box(zero, hmax);
    plant.control_box = Box{Eigen::VectorXd::Constant(1, p.u_min),
                            Eigen::VectorXd::Constant(1, p.u_max)};
    plant.state_clamp = Box{zero, hmax};
    return plant;
}

SteadyState solve_steady_input(const Eigen::Vector3d& levels,
                               const TankParams& p) {
    p.validate();
    SteadyState ss;
    ss.q = p.C1 * std::pow(levels[0], p.alpha1);
    if (ss.q > p.q_max)
        throw UnreachableSetpointError(
            "steady flow exceeds pump capacity for requested top level");
    ss.H[0] = levels[0];
    ss.H[1] = std::pow(ss.q / p.C2, 1.0 / p.alpha2);
    ss.H[2] = std::pow(ss.q / p.C3, 1.0 / p.alpha3);
    const double tol = 1e-10;
    ss.cascade_adjusted = (std::abs(ss.H[1] - levels[1]) > tol ||
                           std::abs(ss.H[2] - levels[2]) > tol);
    ss.u = pump_map_inverse(ss.q, p);
    return ss;
}

}  // namespace adpmpc
