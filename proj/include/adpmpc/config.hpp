#pragma once

#include <optional>
#include <string>

#include "adpmpc/plant.hpp"
#include "adpmpc/riccati.hpp"
#include "adpmpc/sim.hpp"

namespace adpmpc {

/// Everything read from one scenario config file. Controller specs are wired
/// up separately once the offline P-set artifacts are available.
struct ScenarioConfig {
    TankParams tank;
    double sample_time = 0.01;
    double duration = 250.0;
    Eigen::Vector3d setpoint_levels{0.172, 0.104, 0.128};
    Eigen::Vector3d initial_levels{0.20, 0.085, 0.105};
    double noise_sigma = 0.0;
    std::uint64_t seed = 1;
    int substeps = 1;

    int num_levels = 6;
    int horizon = 5;
    double epsilon = 5e-4;
    std::size_t budget = 1'000'000;
    int region_grid = 21;
    int partitions = 8;

    // state constraint box, absolute levels
    Eigen::Vector3d constraint_lo{0.02, 0.02, 0.02};
    Eigen::Vector3d constraint_hi{0.30, 0.30, 0.30};

    RefinementSpec refinement{2, 0.0115};

    Eigen::Matrix3d Q = Eigen::Matrix3d::Identity() * 100.0;
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(1, 1) * 2e-3;
    Eigen::Matrix3d Q_N = Eigen::Matrix3d::Identity() * 100.0;
};

ScenarioConfig load_scenario_config(const std::string& path);
void write_scenario_config(const ScenarioConfig& config,
                           const std::string& path);

/// Assembled problem: plants, setpoint, model, and constraint sets in error
/// coordinates, ready for synthesis and simulation.
struct Problem {
    ScenarioConfig config;
    Scenario scenario;
    SwitchedAffineModel model;            // error coordinates
    QuantizedControlSet levels_absolute;  // volts
    Polytope constraint_error;            // X translated to error coordinates
    CostWeights weights;
};

Problem build_problem(const ScenarioConfig& config);

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

/// Controller spec in error coordinates for the given strategy, wired to the
/// supplied offline artifacts.
ControllerSpec make_controller_spec(const Problem& problem, Strategy strategy,
                                    const RiccatiSet* pset,
                                    const RegionRiccatiMap* regions = nullptr);

}  // namespace adpmpc
