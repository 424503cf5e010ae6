#include <doctest.h>

#include <cmath>
#include <random>

#include "adpmpc/errors.hpp"
#include "adpmpc/model.hpp"

using namespace adpmpc;

namespace {

NonlinearPlant scalar_integrator(double Ts) {
    // x' = u
    NonlinearPlant plant;
    plant.n = 1;
    plant.m = 1;
    plant.sample_time = Ts;
    plant.rhs = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) {
        return u;
    };
    plant.control_box = Box{Eigen::VectorXd::Constant(1, -10.0),
                            Eigen::VectorXd::Constant(1, 10.0)};
    plant.state_constraint =
        Polytope::box(Eigen::VectorXd::Constant(1, -100.0),
                      Eigen::VectorXd::Constant(1, 100.0));
    return plant;
}

}  // namespace

TEST_CASE("scalar integrator discretizes exactly") {
    const NonlinearPlant plant = scalar_integrator(1.0);
    const auto [A, B] = linearize(plant, Eigen::VectorXd::Constant(1, 0.3),
                                  Eigen::VectorXd::Zero(1), 1.0);
    CHECK(A(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(B(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tank analytic Jacobians match finite differences") {
    const TankParams p;
    NonlinearPlant plant = make_tank_plant(p, 1.0);
    for (const Eigen::Vector3d H0 :
         {Eigen::Vector3d(0.15, 0.15, 0.15), Eigen::Vector3d(0.22, 0.09, 0.13)}) {
        const Eigen::VectorXd u0 = Eigen::VectorXd::Constant(1, 0.8);
        Eigen::Matrix3d dfdH;
        Eigen::Vector3d dfdu;
        tank_jacobians(H0, 0.8, p, dfdH, dfdu);
        const auto [Ac, Bc] = numeric_jacobians(plant, H0, u0);
        CHECK((Ac - dfdH).cwiseAbs().maxCoeff() /
                  dfdH.cwiseAbs().maxCoeff() <
              1e-6);
        CHECK((Bc - Eigen::MatrixXd(dfdu)).cwiseAbs().maxCoeff() /
                  dfdu.cwiseAbs().maxCoeff() <
              1e-6);
    }
}

TEST_CASE("analytic (1,1) entry has the closed-form value") {
    const TankParams p;
    const Eigen::Vector3d H0(0.15, 0.15, 0.15);
    Eigen::Matrix3d dfdH;
    Eigen::Vector3d dfdu;
    tank_jacobians(H0, 0.8, p, dfdH, dfdu);
    const double expected =
        -p.C1 * p.alpha1 / (p.a * p.w_t * std::pow(0.15, 1.0 - p.alpha1));
    CHECK(dfdH(0, 0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(dfdH(0, 1) == 0.0);
}

TEST_CASE("linearization at a degenerate bottom level fails loudly") {
    const TankParams p;
    Eigen::Matrix3d dfdH;
    Eigen::Vector3d dfdu;
    CHECK_THROWS_AS(tank_jacobians({0.15, 0.15, 0.0}, 0.8, p, dfdH, dfdu),
                    SingularLinearizationError);
}

TEST_CASE("switched model block structure") {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const Eigen::MatrixXd B = Eigen::MatrixXd::Constant(1, 1, 1.0);
    QuantizedControlSet set = QuantizedControlSet::uniform(-1.0, 1.0, 3);
    CostWeights w{Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
                  Eigen::MatrixXd::Identity(1, 1)};
    const SwitchedAffineModel model = build_switched_model(A, B, set, w);

    SUBCASE("zero control level") {
        Eigen::Matrix2d abar2;
        abar2 << 1, 0, 0, 1;
        CHECK((model.abar[1] - abar2).cwiseAbs().maxCoeff() == 0.0);
        Eigen::Matrix2d qbar2;
        qbar2 << 1, 0, 0, 0;
        CHECK((model.qbar[1] - qbar2).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("unit control level") {
        Eigen::Matrix2d abar3;
        abar3 << 1, 1, 0, 1;
        CHECK((model.abar[2] - abar3).cwiseAbs().maxCoeff() == 0.0);
        Eigen::Matrix2d qbar3;
        qbar3 << 1, 0, 0, 1;
        CHECK((model.qbar[2] - qbar3).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("terminal cost block") {
        Eigen::Matrix2d qbarN;
        qbarN << 1, 0, 0, 0;
        CHECK((model.qbar_N - qbarN).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("affine and cost embeddings hold on random states") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    const Eigen::MatrixXd A = (Eigen::MatrixXd(2, 2) << 0.9, 0.1, -0.2, 0.8)
                                  .finished();
    const Eigen::MatrixXd B = (Eigen::MatrixXd(2, 1) << 0.5, 1.0).finished();
    QuantizedControlSet set = QuantizedControlSet::uniform(-2.0, 2.0, 4);
    CostWeights w{2.0 * Eigen::MatrixXd::Identity(2, 2),
                  0.5 * Eigen::MatrixXd::Identity(1, 1),
                  Eigen::MatrixXd::Identity(2, 2)};
    const SwitchedAffineModel model = build_switched_model(A, B, set, w);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd x(2);
        x << dist(rng), dist(rng);
        const Eigen::VectorXd xbar = augment(x);
        for (int s = 0; s < set.size(); ++s) {
            const Eigen::VectorXd mapped = model.abar[s] * xbar;
            const Eigen::VectorXd expected = A * x + B * set.levels[s];
            CHECK((mapped.head(2) - expected).cwiseAbs().maxCoeff() < 1e-12);
            CHECK(mapped[2] == 1.0);
            const double quad = (xbar.transpose() * model.qbar[s] * xbar)(0, 0);
            const double direct =
                (x.transpose() * w.Q * x)(0, 0) +
                (set.levels[s].transpose() * w.R * set.levels[s])(0, 0);
            CHECK(quad == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("error coordinates") {
    const TankParams p;
    NonlinearPlant plant = make_tank_plant(p, 2.0);
    const SteadyState ss = solve_steady_input({0.20, 0.15, 0.10}, p);
    const Setpoint sp{Eigen::VectorXd(ss.H), Eigen::VectorXd::Constant(1, ss.u)};
    const NonlinearPlant err = shift_to_error_coordinates(plant, sp);

    SUBCASE("origin is an equilibrium") {
        const Eigen::VectorXd e1 =
            step(err, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(1));
        CHECK(e1.cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("setpoint is a discrete fixed point") {
        const Eigen::VectorXd x1 =
            step(plant, ss.H, Eigen::VectorXd::Constant(1, ss.u));
        CHECK((x1 - Eigen::VectorXd(ss.H)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("control box translates") {
        CHECK(err.control_box.lo[0] == doctest::Approx(p.u_min - ss.u));
        CHECK(err.control_box.hi[0] == doctest::Approx(p.u_max - ss.u));
    }
    SUBCASE("trajectories are preserved") {
        Eigen::VectorXd x = Eigen::Vector3d(0.22, 0.13, 0.12);
        Eigen::VectorXd e = x - Eigen::VectorXd(ss.H);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> du(p.u_min, p.u_max);
        for (int k = 0; k < 25; ++k) {
            const double u = du(rng);
            x = step(plant, x, Eigen::VectorXd::Constant(1, u));
            e = step(err, e, Eigen::VectorXd::Constant(1, u - ss.u));
            CHECK((x - (Eigen::VectorXd(ss.H) + e)).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("translated interval example") {
    QuantizedControlSet set = QuantizedControlSet::uniform(0.54, 1.0, 6);
    Box box{Eigen::VectorXd::Constant(1, 0.54), Eigen::VectorXd::Constant(1, 1.0)};
    const Eigen::VectorXd u_r = Eigen::VectorXd::Constant(1, 0.8);
    const Box shifted = box.translated(u_r);
    CHECK(shifted.lo[0] == doctest::Approx(-0.26));
    CHECK(shifted.hi[0] == doctest::Approx(0.2));
    const QuantizedControlSet tset = set.translated(u_r);
    CHECK(tset.levels.front()[0] == doctest::Approx(-0.26));
    CHECK(tset.levels.back()[0] == doctest::Approx(0.2));
}

TEST_CASE("weight validation rejects bad inputs") {
    CostWeights w{Eigen::MatrixXd::Identity(2, 2),
                  Eigen::MatrixXd::Zero(1, 1),
                  Eigen::MatrixXd::Identity(2, 2)};
    CHECK_THROWS_AS(w.validate(), ConfigError);  // R not PD
    CostWeights w2{(Eigen::MatrixXd(2, 2) << 1, 0.5, 0.0, 1).finished(),
                   Eigen::MatrixXd::Identity(1, 1),
                   Eigen::MatrixXd::Identity(2, 2)};
    CHECK_THROWS_AS(w2.validate(), ConfigError);  // Q not symmetric
    CHECK_THROWS_AS(
        build_switched_model(Eigen::MatrixXd::Identity(2, 2),
                             Eigen::MatrixXd::Identity(2, 1),
                             QuantizedControlSet::uniform(0, 1, 3),
                             CostWeights{Eigen::MatrixXd::Identity(3, 3),
                                         Eigen::MatrixXd::Identity(1, 1),
                                         Eigen::MatrixXd::Identity(3, 3)}),
        DimensionError);
}
