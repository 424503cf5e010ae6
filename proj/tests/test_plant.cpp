#include <doctest.h>

#include <cmath>

#include "adpmpc/errors.hpp"
#include "adpmpc/plant.hpp"

using namespace adpmpc;

namespace {

TankParams defaults() { return TankParams{}; }

}  // namespace

TEST_CASE("balanced cascade has zero derivative") {
    const TankParams p = defaults();
    const SteadyState ss = solve_steady_input({0.15, 0.15, 0.15}, p);
    const Eigen::Vector3d dH = tank_rhs(ss.H, ss.q, p);
    CHECK(dH.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("intermediate tank width at H2 = 0 is the trapezoid base") {
    const TankParams p = defaults();
    // dH2/dt = (out1 - out2) / beta2; at H2 = 0 the outflow term vanishes and
    // beta2 = c * w_t
    Eigen::Vector3d H(0.15, 0.0, 0.15);
    const double out1 = p.C1 * std::pow(0.15, p.alpha1);
    const Eigen::Vector3d dH = tank_rhs(H, 0.0, p);
    CHECK(dH[1] == doctest::Approx(out1 / (p.c * p.w_t)));
}

TEST_CASE("derivative sign pattern follows the flow balance") {
    const TankParams p = defaults();
    const Eigen::Vector3d H(0.15, 0.15, 0.15);
    const double q = 5e-5;
    const Eigen::Vector3d dH = tank_rhs(H, q, p);
    CHECK(dH.allFinite());
    const double out1 = p.C1 * std::pow(0.15, p.alpha1);
    const double out2 = p.C2 * std::pow(0.15, p.alpha2);
    CHECK(std::signbit(dH[0]) == std::signbit(q - out1));
    CHECK(std::signbit(dH[1]) == std::signbit(out1 - out2));
}

TEST_CASE("pump map endpoints and midpoint") {
    const TankParams p = defaults();
    CHECK(pump_map(p.u_min, p) == 0.0);
    CHECK(pump_map(p.u_max, p) == doctest::Approx(p.q_max));
    CHECK(pump_map(0.5 * (p.u_min + p.u_max), p) == doctest::Approx(0.5 * p.q_max));
    // out-of-box voltages are clamped
    CHECK(pump_map(p.u_min - 1.0, p) == 0.0);
}

TEST_CASE("zero net flow keeps the state") {
    const TankParams p = defaults();
    NonlinearPlant plant = make_tank_plant(p, 1.0);
    const SteadyState ss = solve_steady_input({0.2, 0.1, 0.1}, p);
    const Eigen::VectorXd x0 = ss.H;
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, ss.u);
    const Eigen::VectorXd x1 = step(plant, x0, u);
    CHECK((x1 - x0).norm() < 1e-12);
}

TEST_CASE("RK4 empirical order on a smooth segment") {
    const TankParams p = defaults();
    const Eigen::VectorXd x0 = Eigen::Vector3d(0.20, 0.12, 0.10);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, 0.9);
    auto solve = [&](int substeps) {
        NonlinearPlant plant = make_tank_plant(p, 50.0);
        plant.integrator.substeps = substeps;
        plant.state_clamp.reset();  // no clamp kinks on this segment
        return step(plant, x0, u);
    };
    const Eigen::VectorXd c = solve(8);
    const Eigen::VectorXd f = solve(16);
    const Eigen::VectorXd ref = solve(256);
    const double e_c = (c - ref).norm();
    const double e_f = (f - ref).norm();
    const double order = std::log2(e_c / e_f);
    CHECK(order >= 3.5);
}

TEST_CASE("zero inflow drains monotonically") {
    const TankParams p = defaults();
    NonlinearPlant plant = make_tank_plant(p, 1.0);
    // levels ordered so every tank's outflow exceeds its inflow
    Eigen::VectorXd x = Eigen::Vector3d(0.10, 0.15, 0.20);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, p.u_min);
    for (int k = 0; k < 200; ++k) {
        const Eigen::VectorXd next = step(plant, x, u);
        CHECK(next[0] <= x[0] + 1e-12);
        CHECK(next[1] <= x[1] + 1e-12);
        CHECK(next[2] <= x[2] + 1e-12);
        x = next;
    }
}

TEST_CASE("steady state solver") {
    const TankParams p = defaults();

    SUBCASE("cascade-consistent setpoint returned unchanged") {
        const SteadyState base = solve_steady_input({0.2, 0.1, 0.1}, p);
        const SteadyState again = solve_steady_input(base.H, p);
        CHECK_FALSE(again.cascade_adjusted);
        CHECK((again.H - base.H).norm() < 1e-14);
    }

    SUBCASE("inconsistent levels are rebalanced and flagged") {
        const SteadyState ss = solve_steady_input({0.2, 0.3, 0.3}, p);
        CHECK(ss.cascade_adjusted);
        const double expected_h2 =
            std::pow(p.C1 * std::pow(0.2, p.alpha1) / p.C2, 1.0 / p.alpha2);
        CHECK(ss.H[1] == doctest::Approx(expected_h2));
    }

    SUBCASE("fixed point attracts nearby initial conditions") {
        const SteadyState ss = solve_steady_input({0.2, 0.1, 0.1}, p);
        NonlinearPlant plant = make_tank_plant(p, 0.5);
        // the bottom tank's open-loop time constant is ~80 s, so only
        // millimetre-scale offsets decay below 0.1 mm within the window
        Eigen::VectorXd x = ss.H + Eigen::Vector3d(0.001, -0.001, 0.001);
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, ss.u);
        for (int k = 0; k < 1000; ++k) x = step(plant, x, u);  // 500 s
        CHECK((x - ss.H).cwiseAbs().maxCoeff() < 1e-4);
    }

    SUBCASE("pump-limited setpoint is rejected") {
        TankParams small = p;
        small.q_max = 1e-6;
        CHECK_THROWS_AS(solve_steady_input({0.2, 0.1, 0.1}, small),
                        UnreachableSetpointError);
    }

    SUBCASE("boundary flow maps to u_max exactly") {
        TankParams q = p;
        q.q_max = p.C1 * std::pow(0.2, p.alpha1);
        const SteadyState ss = solve_steady_input({0.2, 0.1, 0.1}, q);
        CHECK(ss.u == doctest::Approx(q.u_max));
    }
}

TEST_CASE("state clamping is recorded") {
    const TankParams p = defaults();
    NonlinearPlant plant = make_tank_plant(p, 200.0);
    plant.integrator.substeps = 64;
    // full throttle from a nearly full top tank overflows it
    const Eigen::VectorXd x0 = Eigen::Vector3d(0.349, 0.1, 0.1);
    const Eigen::VectorXd u = Eigen::VectorXd::Constant(1, p.u_max);
    const StepResult r = step_detailed(plant, x0, u);
    CHECK(r.clamped);
    CHECK(r.x[0] <= p.h_max + 1e-15);
}

TEST_CASE("parameter validation") {
    TankParams p = defaults();
    p.alpha1 = 1.5;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = defaults();
    p.u_min = p.u_max;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
