#pragma once

#include <optional>

#include <Eigen/Dense>

#include "adpmpc/model.hpp"
#include "adpmpc/plant.hpp"
#include "adpmpc/riccati.hpp"

namespace adpmpc {

enum class Strategy { ADP1, ADP2, ADP3, NmpcExhaustive };

enum class Predictor { Nonlinear, Linear };

struct RefinementSpec {
    int W = 1;            // 2W+1 samples
    double delta_u = 0.0;  // grid spacing around the stage-1 level
};

struct ControllerSpec {
    Strategy strategy = Strategy::ADP1;
    const RiccatiSet* riccati = nullptr;          // ADP1/ADP2, and ADP3 fallback
    const RegionRiccatiMap* regions = nullptr;    // ADP3 regional lookup
    QuantizedControlSet control_set;
    CostWeights weights;
    Box control_box;                              // actuator limits (same frame as levels)
    RefinementSpec refinement;                    // ADP2 only
    std::optional<Polytope> constraint_polytope;  // ADP3 only
    int horizon = 1;                              // NMPC only
    Predictor predictor = Predictor::Nonlinear;
    const SwitchedAffineModel* model = nullptr;   // linear predictor + fingerprint check
    std::size_t rollout_budget = 10'000'000;      // NMPC tree-size cap
    bool stage2_full_set = false;  // ablation: re-minimize over the whole set

    void validate() const;
};

struct ControlDecision {
    Eigen::VectorXd u_applied;
    double stage1_value = 0.0;
    std::optional<double> stage2_value;
    int argmin_matrix_index = -1;
    int feasible_count = 0;
    double latency_seconds = 0.0;
};

/// Stage cost x^T Q x + u^T R u.
double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                  const CostWeights& w);

/// One-step prediction with the configured predictor.
Eigen::VectorXd predict(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                        const ControllerSpec& spec, const NonlinearPlant& plant);

/// Single-stage ADP: scan the quantized levels, score each with the
/// approximate cost-to-go, apply the argmin.
ControlDecision adp1_step(const Eigen::VectorXd& x_k, const ControllerSpec& spec,
                          const NonlinearPlant& plant);

/// Two-stage ADP: refine around the stage-1 level on a 2W+1 grid, reusing the
/// stage-1 argmin matrix for the cost-to-go.
ControlDecision adp2_step(const Eigen::VectorXd& x_k, const ControllerSpec& spec,
                          const NonlinearPlant& plant);

/// State-constrained ADP: levels whose prediction leaves X are discarded; the
/// value is taken from the regional set containing x_k.
ControlDecision adp3_step(const Eigen::VectorXd& x_k, const ControllerSpec& spec,
                          const NonlinearPlant& plant);

/// Exhaustive quantized NMPC over U_v^N by depth-first enumeration; exact on
/// the quantized problem, used as baseline and desk-scale oracle.
ControlDecision nmpc_exhaustive_step(const Eigen::VectorXd& x_k,
                                     const ControllerSpec& spec,
                                     const NonlinearPlant& plant);

/// Dispatch on spec.strategy.
ControlDecision controller_step(const Eigen::VectorXd& x_k,
                                const ControllerSpec& spec,
                                const NonlinearPlant& plant);

}  // namespace adpmpc
