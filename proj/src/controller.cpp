#include "adpmpc/controller.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "adpmpc/errors.hpp"

namespace adpmpc {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_fingerprint(const ControllerSpec& spec, const RiccatiSet& set) {
    if (spec.model && set.model_fingerprint() != spec.model->fingerprint())
        throw ConfigError("Riccati set fingerprint does not match the model");
}

}  // namespace

void ControllerSpec::validate() const {
    if (strategy != Strategy::NmpcExhaustive && !riccati)
        throw ConfigError("controller: Riccati set required");
    if (strategy == Strategy::ADP2 &&
        (refinement.W < 1 || refinement.delta_u < 0))
        throw ConfigError("controller: ADP2 needs W >= 1 and delta_u >= 0");
    if (strategy == Strategy::ADP3 && !constraint_polytope)
        throw ConfigError("controller: ADP3 needs a constraint polytope");
    if (strategy == Strategy::NmpcExhaustive && horizon < 1)
        throw ConfigError("controller: NMPC needs horizon >= 1");
    if (predictor == Predictor::Linear && !model)
        throw ConfigError("controller: linear predictor needs the model");
}

double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  const CostWeights& w) {
    return (x.transpose() * w.Q * x)(0, 0) + (u.transpose() * w.R * u)(0, 0);
}

Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        const ControllerSpec& spec,
                        const NonlinearPlant& plant) {
    if (spec.predictor == Predictor::Linear)
        return spec.model->A * x + spec.model->B * u;
    return step(plant, x, u);
}

ControlDecision adp1_step(const Eigen::VectorXd& x_k, const ControllerSpec& spec,
                          const NonlinearPlant& plant) {
    const auto t0 = Clock::now();
    check_fingerprint(spec, *spec.riccati);
    ControlDecision best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (const auto& v : spec.control_set.levels) {
        const Eigen::VectorXd x_next = predict(x_k, v, spec, plant);
        if (!x_next.allFinite())
            throw PlantBlowupError("adp1_step: non-finite prediction");
        const auto q = spec.riccati->evaluate(augment(x_next));
        const double cost = stage_cost(x_k, v, spec.weights) + q.value;
        if (cost < best_cost) {
            best_cost = cost;
            best.u_applied = v;
            best.argmin_matrix_index = q.argmin;
        }
    }
    best.stage1_value = best_cost;
    best.feasible_count = spec.control_set.size();
    best.latency_seconds = seconds_since(t0);
    return best;
}

ControlDecision adp2_step(const Eigen::VectorXd& x_k, const ControllerSpec& spec,
                          const NonlinearPlant& plant) {
    const auto t0 = Clock::now();
    ControlDecision dec = adp1_step(x_k, spec, plant);
    const Eigen::VectorXd v_star = dec.u_applied;
    const Eigen::MatrixXd& P_star =
        spec.riccati->matrices().at(dec.argmin_matrix_index);

    // w = 0 reproduces the stage-1 candidate; seed with its exact cost so the
    // stage-2 optimum can never exceed stage 1.
    double best_cost = dec.stage1_value;
    Eigen::VectorXd best_u = v_star;
    int best_index = dec.argmin_matrix_index;
    for (int q = -spec.refinement.W; q <= spec.refinement.W; ++q) {
        if (q == 0) continue;
        Eigen::VectorXd u = v_star.array() + q * spec.refinement.delta_u;
        u = spec.control_box.clip(u);
        const Eigen::VectorXd x_next = predict(x_k, u, spec, plant);
        if (!x_next.allFinite())
            throw PlantBlowupError("adp2_step: non-finite prediction");
        const Eigen::VectorXd xbar = augment(x_next);
        double value;
        int index = dec.argmin_matrix_index;
        if (spec.stage2_full_set) {
            const auto r = spec.riccati->evaluate(xbar);
            value = r.value;
            index = r.argmin;
        } else {
            value = (xbar.transpose() * P_star * xbar)(0, 0);
        }
        const double cost = stage_cost(x_k, u, spec.weights) + value;
        if (cost < best_cost) {
            best_cost = cost;
            best_u = u;
            best_index = index;
        }
    }
    dec.u_applied = best_u;
    dec.stage2_value = best_cost;
    dec.argmin_matrix_index = best_index;
    dec.latency_seconds = seconds_since(t0);
    return dec;
}

ControlDecision adp3_step(const Eigen::VectorXd& x_k, const ControllerSpec& spec,
                          const NonlinearPlant& plant) {
    const auto t0 = Clock::now();
    const Polytope& X = *spec.constraint_polytope;

    const RiccatiSet* set = spec.riccati;
    if (spec.regions) {
        const int j = spec.regions->region_of(x_k);
        if (j >= 0) set = &spec.regions->sets[j];
    }
    check_fingerprint(spec, *set);

    ControlDecision best;
    double best_cost = std::numeric_limits<double>::infinity();
    double least_excess = std::numeric_limits<double>::infinity();
    Eigen::VectorXd least_violating;
    int feasible = 0;
    for (const auto& v : spec.control_set.levels) {
        const Eigen::VectorXd x_next = predict(x_k, v, spec, plant);
        if (!x_next.allFinite())
            throw PlantBlowupError("adp3_step: non-finite prediction");
        const double excess = X.violation(x_next);
        if (excess > 1e-9) {
            if (excess < least_excess) {
                least_excess = excess;
                least_violating = v;
            }
            continue;
        }
        ++feasible;
        const auto q = set->evaluate(augment(x_next));
        const double cost = stage_cost(x_k, v, spec.weights) + q.value;
        if (cost < best_cost) {
            best_cost = cost;
            best.u_applied = v;
            best.argmin_matrix_index = q.argmin;
        }
    }
    if (feasible == 0)
        throw InfeasibleError("adp3_step: no feasible quantized level",
                              least_violating, least_excess);
    best.stage1_value = best_cost;
    best.feasible_count = feasible;
    best.latency_seconds = seconds_since(t0);
    return best;
}

namespace {

struct NmpcSearch {
    const ControllerSpec& spec;
    const NonlinearPlant& plant;
    double best_cost = std::numeric_limits<double>::infinity();
    int best_first = -1;

    void dfs(const Eigen::VectorXd& x, int depth, int first, double acc) {
        if (acc >= best_cost) return;  // costs are nonnegative; safe cutoff
        if (depth == spec.horizon) {
            const double total =
                acc + (x.transpose() * spec.weights.Q_N * x)(0, 0);
            if (total < best_cost) {
                best_cost = total;
                best_first = first;
            }
            return;
        }
        for (int j = 0; j < spec.control_set.size(); ++j) {
            const auto& v = spec.control_set.levels[j];
            const Eigen::VectorXd x_next = predict(x, v, spec, plant);
            dfs(x_next, depth + 1, depth == 0 ? j : first,
                acc + stage_cost(x, v, spec.weights));
        }
    }
};

}  // namespace

ControlDecision nmpc_exhaustive_step(const Eigen::VectorXd& x_k,
                                     const ControllerSpec& spec,
                                     const NonlinearPlant& plant) {
    const auto t0 = Clock::now();
    const double leaves =
        std::pow(static_cast<double>(spec.control_set.size()), spec.horizon);
    if (leaves > static_cast<double>(spec.rollout_budget))
        throw SynthesisOverflowError("nmpc_exhaustive_step: M^N exceeds budget");
    NmpcSearch search{spec, plant};
    search.dfs(x_k, 0, -1, 0.0);
    ControlDecision dec;
    dec.u_applied = spec.control_set.levels.at(search.best_first);
    dec.stage1_value = search.best_cost;
    dec.feasible_count = spec.control_set.size();
    dec.latency_seconds = seconds_since(t0);
    return dec;
}

ControlDecision controller_step(const Eigen::VectorXd& x_k,
                                const ControllerSpec& spec,
                                const NonlinearPlant& plant) {
    switch (spec.strategy) {
        case Strategy::ADP1:
            return adp1_step(x_k, spec, plant);
        case Strategy::ADP2:
            return adp2_step(x_k, spec, plant);
        case Strategy::ADP3:
            return adp3_step(x_k, spec, plant);
        case Strategy::NmpcExhaustive:
            return nmpc_exhaustive_step(x_k, spec, plant);
    }
    throw ConfigError("unknown strategy");
}

}  // namespace adpmpc
