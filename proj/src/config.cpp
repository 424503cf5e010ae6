#include "adpmpc/config.hpp"

#include <fstream>

#include <json.hpp>

#include "adpmpc/errors.hpp"
#include "adpmpc/model.hpp"

namespace adpmpc {

namespace {

using nlohmann::json;

Eigen::VectorXd to_vector(const json& j, int expected) {
    if (!j.is_array() || static_cast<int>(j.size()) != expected)
        throw ConfigError("expected an array of length " +
                          std::to_string(expected));
    Eigen::VectorXd v(expected);
    for (int i = 0; i < expected; ++i) v[i] = j[i].get<double>();
    return v;
}

Eigen::MatrixXd to_matrix(const json& j, int rows, int cols) {
    // row-major flat array or nested rows
    Eigen::MatrixXd M(rows, cols);
    if (j.is_array() && !j.empty() && j[0].is_array()) {
        if (static_cast<int>(j.size()) != rows)
            throw ConfigError("matrix row count mismatch");
        for (int i = 0; i < rows; ++i) {
            if (static_cast<int>(j[i].size()) != cols)
                throw ConfigError("matrix column count mismatch");
            for (int k = 0; k < cols; ++k) M(i, k) = j[i][k].get<double>();
        }
        return M;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
        throw ConfigError("matrix must be row-major with rows*cols entries");
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) M(i, k) = j[i * cols + k].get<double>();
    return M;
}

json matrix_to_json(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (int i = 0; i < M.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < M.cols(); ++k) row.push_back(M(i, k));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

}  // namespace

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw ConfigError("config parse error in " + path + ": " + ex.what());
    }
    ScenarioConfig cfg;
    try {
        if (j.contains("tank")) {
            const json& t = j["tank"];
            auto get = [&](const char* key, double& field) {
                if (t.contains(key)) field = t[key].get<double>();
            };
            get("a", cfg.tank.a);
            get("b", cfg.tank.b);
            get("c", cfg.tank.c);
            get("w_t", cfg.tank.w_t);
            get("R", cfg.tank.R);
            get("h_max", cfg.tank.h_max);
            get("C1", cfg.tank.C1);
            get("C2", cfg.tank.C2);
            get("C3", cfg.tank.C3);
            get("alpha1", cfg.tank.alpha1);
            get("alpha2", cfg.tank.alpha2);
            get("alpha3", cfg.tank.alpha3);
            get("u_min", cfg.tank.u_min);
            get("u_max", cfg.tank.u_max);
            get("q_max", cfg.tank.q_max);
        }
        if (j.contains("sample_time")) cfg.sample_time = j["sample_time"].get<double>();
        if (j.contains("duration")) cfg.duration = j["duration"].get<double>();
        if (j.contains("setpoint")) cfg.setpoint_levels = to_vector(j["setpoint"], 3);
        if (j.contains("initial_state"))
            cfg.initial_levels = to_vector(j["initial_state"], 3);
        if (j.contains("noise_sigma")) cfg.noise_sigma = j["noise_sigma"].get<double>();
        if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("substeps")) cfg.substeps = j["substeps"].get<int>();
        if (j.contains("levels")) cfg.num_levels = j["levels"].get<int>();
        if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
        if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
        if (j.contains("budget")) cfg.budget = j["budget"].get<std::size_t>();
        if (j.contains("region_grid")) cfg.region_grid = j["region_grid"].get<int>();
        if (j.contains("partitions")) cfg.partitions = j["partitions"].get<int>();
        if (j.contains("constraint")) {
            cfg.constraint_lo = to_vector(j["constraint"]["lo"], 3);
            cfg.constraint_hi = to_vector(j["constraint"]["hi"], 3);
        }
        if (j.contains("refinement")) {
            cfg.refinement.W = j["refinement"]["W"].get<int>();
            cfg.refinement.delta_u = j["refinement"]["delta_u"].get<double>();
        }
        if (j.contains("Q")) cfg.Q = to_matrix(j["Q"], 3, 3);
        if (j.contains("R")) cfg.R = to_matrix(j["R"], 1, 1);
        if (j.contains("QN")) cfg.Q_N = to_matrix(j["QN"], 3, 3);
    } catch (const json::exception& ex) {
        throw ConfigError("config field error in " + path + ": " + ex.what());
    }
    if (cfg.sample_time <= 0 || cfg.duration <= 0)
        throw ConfigError("sample_time and duration must be positive");
    return cfg;
}

void write_scenario_config(const ScenarioConfig& cfg, const std::string& path) {
    json j;
    j["tank"] = {{"a", cfg.tank.a},       {"b", cfg.tank.b},
                 {"c", cfg.tank.c},       {"w_t", cfg.tank.w_t},
                 {"R", cfg.tank.R},       {"h_max", cfg.tank.h_max},
                 {"C1", cfg.tank.C1},     {"C2", cfg.tank.C2},
                 {"C3", cfg.tank.C3},     {"alpha1", cfg.tank.alpha1},
                 {"alpha2", cfg.tank.alpha2}, {"alpha3", cfg.tank.alpha3},
                 {"u_min", cfg.tank.u_min},   {"u_max", cfg.tank.u_max},
                 {"q_max", cfg.tank.q_max}};
    j["sample_time"] = cfg.sample_time;
    j["duration"] = cfg.duration;
    j["setpoint"] = vector_to_json(cfg.setpoint_levels);
    j["initial_state"] = vector_to_json(cfg.initial_levels);
    j["noise_sigma"] = cfg.noise_sigma;
    j["seed"] = cfg.seed;
    j["substeps"] = cfg.substeps;
    j["levels"] = cfg.num_levels;
    j["horizon"] = cfg.horizon;
    j["epsilon"] = cfg.epsilon;
    j["budget"] = cfg.budget;
    j["region_grid"] = cfg.region_grid;
    j["partitions"] = cfg.partitions;
    j["constraint"] = {{"lo", vector_to_json(cfg.constraint_lo)},
                       {"hi", vector_to_json(cfg.constraint_hi)}};
    j["refinement"] = {{"W", cfg.refinement.W},
                       {"delta_u", cfg.refinement.delta_u}};
    j["Q"] = matrix_to_json(cfg.Q);
    j["R"] = matrix_to_json(cfg.R);
    j["QN"] = matrix_to_json(cfg.Q_N);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

Problem build_problem(const ScenarioConfig& cfg) {
    Problem p;
    p.config = cfg;
    IntegratorSettings integ;
    integ.substeps = cfg.substeps;
    NonlinearPlant plant = make_tank_plant(cfg.tank, cfg.sample_time, integ);
    plant.state_constraint =
        Polytope::box(cfg.constraint_lo, cfg.constraint_hi);

    const SteadyState ss = solve_steady_input(cfg.setpoint_levels, cfg.tank);
    Setpoint sp{Eigen::VectorXd(ss.H), Eigen::VectorXd::Constant(1, ss.u)};

    p.scenario.plant = plant;
    p.scenario.error_plant = shift_to_error_coordinates(plant, sp);
    p.scenario.setpoint = sp;
    p.scenario.initial_state = cfg.initial_levels;
    p.scenario.duration = cfg.duration;
    p.scenario.noise_sigma = cfg.noise_sigma;
    p.scenario.seed = cfg.seed;

    p.levels_absolute =
        QuantizedControlSet::uniform(cfg.tank.u_min, cfg.tank.u_max,
                                     cfg.num_levels);
    p.weights = CostWeights{cfg.Q, cfg.R, cfg.Q_N};
    p.weights.validate();

    const auto [A, B] = linearize(p.scenario.error_plant,
                                  Eigen::VectorXd::Zero(3),
                                  Eigen::VectorXd::Zero(1), cfg.sample_time);
    p.model = build_switched_model(A, B,
                                   p.levels_absolute.translated(sp.u_r),
                                   p.weights);
    p.constraint_error = p.scenario.error_plant.state_constraint;
    return p;
}

Strategy parse_strategy(const std::string& name) {
    if (name == "adp1") return Strategy::ADP1;
    if (name == "adp2") return Strategy::ADP2;
    if (name == "adp3") return Strategy::ADP3;
    if (name == "nmpc") return Strategy::NmpcExhaustive;
    throw ConfigError("unknown strategy: " + name +
                      " (expected adp1|adp2|adp3|nmpc)");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::ADP1: return "adp1";
        case Strategy::ADP2: return "adp2";
        case Strategy::ADP3: return "adp3";
        case Strategy::NmpcExhaustive: return "nmpc";
    }
    return "?";
}

ControllerSpec make_controller_spec(const Problem& problem, Strategy strategy,
                                    const RiccatiSet* pset,
                                    const RegionRiccatiMap* regions) {
    ControllerSpec spec;
    spec.strategy = strategy;
    spec.riccati = pset;
    spec.regions = regions;
    spec.control_set = problem.model.control_set;  // error coordinates
    spec.weights = problem.weights;
    spec.control_box = problem.scenario.error_plant.control_box;
    spec.refinement = problem.config.refinement;
    spec.horizon = problem.config.horizon;
    spec.model = &problem.model;
    if (strategy == Strategy::ADP3)
        spec.constraint_polytope = problem.constraint_error;
    spec.validate();
    return spec;
}

}  // namespace adpmpc
