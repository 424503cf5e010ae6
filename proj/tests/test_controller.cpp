#include <doctest.h>

#include <random>

#include "adpmpc/controller.hpp"
#include "adpmpc/errors.hpp"

using namespace adpmpc;

namespace {

struct Fixture {
    SwitchedAffineModel model;
    RiccatiSet pset;
    NonlinearPlant plant;

    explicit Fixture(int horizon = 2)
        : model(build_switched_model(
              Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Identity(1, 1),
              QuantizedControlSet::uniform(-1.0, 1.0, 3),
              CostWeights{Eigen::MatrixXd::Identity(1, 1),
                          Eigen::MatrixXd::Identity(1, 1),
                          Eigen::MatrixXd::Identity(1, 1)})),
          pset(build_p1_set(model, horizon, 0.0)) {
        plant.n = 1;
        plant.m = 1;
        plant.sample_time = 1.0;
        plant.rhs = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return Eigen::VectorXd::Zero(1);
        };
        plant.control_box = Box{Eigen::VectorXd::Constant(1, -1.0),
                                Eigen::VectorXd::Constant(1, 1.0)};
        plant.state_constraint =
            Polytope::box(Eigen::VectorXd::Constant(1, -100.0),
                          Eigen::VectorXd::Constant(1, 100.0));
    }

    ControllerSpec spec(Strategy strategy, int horizon = 2) const {
        ControllerSpec s;
        s.strategy = strategy;
        s.riccati = &pset;
        s.control_set = model.control_set;
        s.weights = model.weights;
        s.control_box = plant.control_box;
        s.refinement = RefinementSpec{2, 0.25};
        s.horizon = horizon;
        s.predictor = Predictor::Linear;
        s.model = &model;
        return s;
    }
};

SwitchedAffineModel random_model(int n, int M, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::MatrixXd A(n, n), B(n, 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = 0.8 * dist(rng) / n;
        A(i, i) += 0.4;
        B(i, 0) = dist(rng);
    }
    Eigen::MatrixXd Qh(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Qh(i, j) = dist(rng);
    return build_switched_model(
        A, B, QuantizedControlSet::uniform(-1.0, 1.0, M),
        CostWeights{Eigen::MatrixXd(Qh.transpose() * Qh / n),
                    Eigen::MatrixXd::Identity(1, 1) * 0.3,
                    Eigen::MatrixXd(Qh.transpose() * Qh / n)});
}

NonlinearPlant dummy_plant(int n) {
    NonlinearPlant plant;
    plant.n = n;
    plant.m = 1;
    plant.sample_time = 1.0;
    plant.rhs = [n](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(n);
    };
    plant.control_box = Box{Eigen::VectorXd::Constant(1, -1.0),
                            Eigen::VectorXd::Constant(1, 1.0)};
    return plant;
}

}  // namespace

TEST_CASE("ADP-1 hand example at x = 1") {
    const Fixture f;
    const auto spec = f.spec(Strategy::ADP1);
    const ControlDecision dec =
        adp1_step(Eigen::VectorXd::Constant(1, 1.0), spec, f.plant);
    // exhaustive 2-step DP gives u = -1 as the first move
    CHECK(dec.u_applied[0] == doctest::Approx(-1.0));
    CHECK(dec.feasible_count == 3);
}

TEST_CASE("equilibrium start stays at the zero level") {
    const Fixture f;
    const auto spec = f.spec(Strategy::ADP1);
    const ControlDecision dec =
        adp1_step(Eigen::VectorXd::Zero(1), spec, f.plant);
    CHECK(dec.u_applied[0] == doctest::Approx(0.0));
}

TEST_CASE("ADP-1 equals exhaustive enumeration on the linear model") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int n : {1, 2, 3}) {
        for (int M : {2, 3, 4}) {
            for (int N : {1, 2, 3, 4}) {
                const SwitchedAffineModel model = random_model(n, M, 7 * n + M + N);
                const RiccatiSet pset = build_p1_set(model, N, 0.0);
                const NonlinearPlant plant = dummy_plant(n);
                ControllerSpec spec;
                spec.riccati = &pset;
                spec.control_set = model.control_set;
                spec.weights = model.weights;
                spec.control_box = plant.control_box;
                spec.horizon = N;
                spec.predictor = Predictor::Linear;
                spec.model = &model;
                for (int trial = 0; trial < 4; ++trial) {
                    Eigen::VectorXd x(n);
                    for (int i = 0; i < n; ++i) x[i] = dist(rng);
                    const ControlDecision a = adp1_step(x, spec, plant);
                    const ControlDecision b = nmpc_exhaustive_step(x, spec, plant);
                    CHECK((a.u_applied - b.u_applied).cwiseAbs().maxCoeff() == 0.0);
                    CHECK(a.stage1_value ==
                          doctest::Approx(b.stage1_value).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("ADP-2 refinement") {
    const Fixture f;
    auto spec = f.spec(Strategy::ADP2);

    SUBCASE("degenerate grid reproduces ADP-1") {
        spec.refinement.delta_u = 0.0;
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.7);
        const ControlDecision one = adp1_step(x, spec, f.plant);
        const ControlDecision two = adp2_step(x, spec, f.plant);
        CHECK((two.u_applied - one.u_applied).cwiseAbs().maxCoeff() == 0.0);
        CHECK(*two.stage2_value == doctest::Approx(one.stage1_value));
    }

    SUBCASE("stage-2 value never exceeds stage 1") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, dist(rng));
            const ControlDecision dec = adp2_step(x, spec, f.plant);
            REQUIRE(dec.stage2_value.has_value());
            CHECK(*dec.stage2_value <= dec.stage1_value);
        }
    }

    SUBCASE("refinement grid clips at the box edge") {
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.6);
        const ControlDecision dec = adp2_step(x, spec, f.plant);
        CHECK(dec.u_applied[0] >= -1.0);
        CHECK(dec.u_applied[0] <= 1.0);
        CHECK(*dec.stage2_value <= dec.stage1_value);
    }
}

TEST_CASE("ADP-3 constrained scan") {
    const Fixture f;
    auto spec = f.spec(Strategy::ADP3);

    SUBCASE("vacuous constraint matches ADP-1") {
        spec.constraint_polytope =
            Polytope::box(Eigen::VectorXd::Constant(1, -1e6),
                          Eigen::VectorXd::Constant(1, 1e6));
        std::mt19937_64 rng(31);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, dist(rng));
            const ControlDecision a = adp1_step(x, spec, f.plant);
            const ControlDecision b = adp3_step(x, spec, f.plant);
            CHECK((a.u_applied - b.u_applied).cwiseAbs().maxCoeff() == 0.0);
            CHECK(b.feasible_count == 3);
        }
    }

    SUBCASE("predictions never leave the constraint set") {
        spec.constraint_polytope =
            Polytope::box(Eigen::VectorXd::Constant(1, -1.5),
                          Eigen::VectorXd::Constant(1, 1.5));
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
        const ControlDecision dec = adp3_step(x, spec, f.plant);
        const Eigen::VectorXd next = predict(x, dec.u_applied, spec, f.plant);
        CHECK(spec.constraint_polytope->violation(next) <= 1e-9);
        CHECK(dec.feasible_count < 3);  // x + 1 = 2 is out of bounds
    }

    SUBCASE("infeasibility carries the least-violating level") {
        spec.constraint_polytope =
            Polytope::box(Eigen::VectorXd::Constant(1, 10.0),
                          Eigen::VectorXd::Constant(1, 11.0));
        const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 1.0);
        try {
            adp3_step(x, spec, f.plant);
            FAIL("expected InfeasibleError");
        } catch (const InfeasibleError& inf) {
            // closest next state to [10, 11] is x + 1 = 2 via the top level
            CHECK(inf.least_violating_control[0] == doctest::Approx(1.0));
            CHECK(inf.violation_excess == doctest::Approx(8.0));
        }
    }
}

TEST_CASE("NMPC budget guard") {
    const Fixture f;
    auto spec = f.spec(Strategy::NmpcExhaustive, 30);
    spec.rollout_budget = 1000;
    CHECK_THROWS_AS(
        nmpc_exhaustive_step(Eigen::VectorXd::Zero(1), spec, f.plant),
        SynthesisOverflowError);
}

TEST_CASE("N=1 exhaustive step is the single-stage argmin") {
    const Fixture f(1);
    auto spec = f.spec(Strategy::NmpcExhaustive, 1);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.9);
    const ControlDecision dec = nmpc_exhaustive_step(x, spec, f.plant);
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXd arg;
    for (const auto& v : spec.control_set.levels) {
        const Eigen::VectorXd next = spec.model->A * x + spec.model->B * v;
        const double cost = stage_cost(x, v, spec.weights) +
                            (next.transpose() * spec.weights.Q_N * next)(0, 0);
        if (cost < best) {
            best = cost;
            arg = v;
        }
    }
    CHECK((dec.u_applied - arg).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dec.stage1_value == doctest::Approx(best));
}

TEST_CASE("decisions are deterministic across repeated calls") {
    const Fixture f;
    const auto spec = f.spec(Strategy::ADP2);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.37);
    const ControlDecision a = adp2_step(x, spec, f.plant);
    const ControlDecision b = adp2_step(x, spec, f.plant);
    CHECK((a.u_applied - b.u_applied).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.stage1_value == b.stage1_value);
    CHECK(*a.stage2_value == *b.stage2_value);
    CHECK(a.argmin_matrix_index == b.argmin_matrix_index);
}

TEST_CASE("fingerprint mismatch is rejected") {
    const Fixture f;
    const SwitchedAffineModel other = random_model(1, 3, 99);
    auto spec = f.spec(Strategy::ADP1);
    spec.model = &other;
    CHECK_THROWS_AS(adp1_step(Eigen::VectorXd::Zero(1), spec, f.plant),
                    ConfigError);
}
