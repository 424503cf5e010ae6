// Command-line front end: offline synthesis, closed-loop runs, stability
// audit, strategy benchmark, and trace/report export.
//
// Exit codes: 0 success, 2 config error, 3 runtime failure, 4 run terminated
// by infeasibility.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "adpmpc/config.hpp"
#include "adpmpc/errors.hpp"
#include "adpmpc/stability.hpp"

namespace fs = std::filesystem;
using namespace adpmpc;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitInfeasible = 4;

std::string pset_regions_path(const std::string& pset_path) {
    return pset_path + ".regions";
}

void save_regions(const RegionRiccatiMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "ADPMPC-REGIONS v1\n";
    out << map.regions.size() << "\n";
    char buf[64];
    for (std::size_t j = 0; j < map.regions.size(); ++j) {
        const Box& bb = map.regions[j].bounding_box();
        for (int a = 0; a < bb.dim(); ++a) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g", bb.lo[a], bb.hi[a]);
            out << buf << "\n";
        }
        out << map.sets[j].size();
        for (int i = 0; i < map.sets[j].size(); ++i) out << " " << i;
        out << "\n";
    }
}

int run_offline(const std::string& config_path, const std::string& out_path,
                int horizon_override, double epsilon_override,
                std::size_t budget_override, int region_grid, int partitions) {
    ScenarioConfig cfg = load_scenario_config(config_path);
    if (horizon_override > 0) cfg.horizon = horizon_override;
    if (epsilon_override >= 0) cfg.epsilon = epsilon_override;
    if (budget_override > 0) cfg.budget = budget_override;
    if (region_grid > 0) cfg.region_grid = region_grid;
    if (partitions > 0) cfg.partitions = partitions;

    const Problem problem = build_problem(cfg);
    SynthesisOptions opts;
    opts.epsilon = cfg.epsilon;
    opts.budget = cfg.budget;
    const RiccatiSet pset = build_p1_set(problem.model, cfg.horizon, opts);
    save_pset(pset, out_path);
    std::cout << "P-set: " << pset.size() << " matrices (horizon "
              << cfg.horizon << ", epsilon " << cfg.epsilon << ") -> "
              << out_path << "\n";

    const RiccatiSet pad =
        restrict_to_region(pset, problem.constraint_error, cfg.region_grid);
    save_pset(pad, out_path + ".constrained");
    std::cout << "constrained P-set: " << pad.size() << " matrices -> "
              << out_path << ".constrained\n";

    const RegionRiccatiMap map = partition_regions(
        problem.constraint_error, cfg.partitions, pad, cfg.region_grid);
    save_regions(map, pset_regions_path(out_path));
    std::cout << "regional map: " << map.regions.size() << " regions -> "
              << pset_regions_path(out_path) << "\n";
    return 0;
}

/// Rebuild the regional map deterministically from the persisted constrained
/// set; the synthesis is cheap next to a 25k-step run.
RegionRiccatiMap rebuild_regions(const Problem& problem, const RiccatiSet& pad) {
    return partition_regions(problem.constraint_error,
                             problem.config.partitions, pad,
                             problem.config.region_grid);
}

int run_scenario(const std::string& config_path, const std::string& pset_path,
                 const std::string& strategy_name_str,
                 const std::string& out_path) {
    const ScenarioConfig cfg = load_scenario_config(config_path);
    const Problem problem = build_problem(cfg);
    const Strategy strategy = parse_strategy(strategy_name_str);

    RiccatiSet pset = load_pset(pset_path);
    RiccatiSet pad;
    RegionRiccatiMap regions;
    ControllerSpec spec;
    if (strategy == Strategy::ADP3) {
        pad = load_pset(pset_path + ".constrained");
        regions = rebuild_regions(problem, pad);
        spec = make_controller_spec(problem, strategy, &pad, &regions);
    } else {
        spec = make_controller_spec(problem, strategy, &pset);
    }
    const SimTrace trace = run_closed_loop(problem.scenario, spec);
    write_trace_csv(trace, out_path);
    std::cout << "trace: " << trace.records.size() << " steps, ISE "
              << compute_ise(trace, problem.scenario.setpoint.x_r) << " -> "
              << out_path << "\n";
    if (trace.truncated) {
        std::cerr << "run truncated: " << trace.failure << "\n";
        return kExitInfeasible;
    }
    return 0;
}

int run_stability(const std::string& config_path, const std::string& pset_path,
                  const std::string& controller, int grid_points,
                  double exclusion, const std::string& out_path) {
    const ScenarioConfig cfg = load_scenario_config(config_path);
    const Problem problem = build_problem(cfg);
    const Strategy strategy = parse_strategy(controller);
    RiccatiSet pset = load_pset(pset_path);
    RiccatiSet pad;
    RegionRiccatiMap regions;
    ControllerSpec spec;
    if (strategy == Strategy::ADP3) {
        pad = load_pset(pset_path + ".constrained");
        regions = rebuild_regions(problem, pad);
        spec = make_controller_spec(problem, strategy, &pad, &regions);
    } else {
        spec = make_controller_spec(problem, strategy, &pset);
    }
    AuditConfig audit_cfg;
    audit_cfg.X = problem.constraint_error;
    audit_cfg.points_per_axis = grid_points;
    audit_cfg.exclusion_radius = exclusion;
    audit_cfg.controller = &spec;
    audit_cfg.plant = &problem.scenario.error_plant;
    const AuditReport report = audit(audit_cfg);
    const std::string text = format_report(report);
    std::cout << text;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << text;
    }
    return report.verdict == AuditVerdict::Inconclusive ? kExitRuntime : 0;
}

int run_bench(const std::string& config_path, const std::string& pset_path,
              const std::string& out_dir) {
    const ScenarioConfig cfg = load_scenario_config(config_path);
    const Problem problem = build_problem(cfg);
    RiccatiSet pset = load_pset(pset_path);
    RiccatiSet pad = load_pset(pset_path + ".constrained");
    RegionRiccatiMap regions = rebuild_regions(problem, pad);

    const ControllerSpec nmpc =
        make_controller_spec(problem, Strategy::NmpcExhaustive, &pset);
    const ControllerSpec adp1 =
        make_controller_spec(problem, Strategy::ADP1, &pset);
    const ControllerSpec adp2 =
        make_controller_spec(problem, Strategy::ADP2, &pset);
    const ControllerSpec adp3 =
        make_controller_spec(problem, Strategy::ADP3, &pad, &regions);

    const std::vector<BenchEntry> entries{{"nmpc", &nmpc},
                                          {"adp1", &adp1},
                                          {"adp2", &adp2},
                                          {"adp3", &adp3}};
    std::vector<SimTrace> traces;
    const BenchReport report = benchmark(problem.scenario, entries, &traces);

    fs::create_directories(out_dir);
    write_bench_csv(report, out_dir + "/benchmark.csv");
    for (std::size_t i = 0; i < entries.size(); ++i)
        write_trace_csv(traces[i], out_dir + "/trace_" + entries[i].name + ".csv");
    // echo the configuration next to the results
    write_scenario_config(cfg, out_dir + "/scenario.json");
    std::cout << format_bench_table(report);
    for (const auto& row : report.rows)
        if (row.failed) return kExitRuntime;
    return 0;
}

int run_export(const std::string& trace_path, const std::string& out_path) {
    const SimTrace trace = read_trace_csv(trace_path);
    // plot-friendly subset: time, true states, control, value
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open for writing: " + out_path);
    const int n = trace.records.empty()
                      ? 0
                      : static_cast<int>(trace.records[0].x_true.size());
    out << "t";
    for (int i = 0; i < n; ++i) out << ",x" << i;
    out << ",u,value\n";
    for (const auto& rec : trace.records) {
        out << rec.t;
        for (int i = 0; i < n; ++i) out << ',' << rec.x_true[i];
        out << ',' << rec.u[0] << ',' << rec.value << '\n';
    }
    std::cout << "exported " << trace.records.size() << " rows -> " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ADP-based MPC toolkit for the multi-tank system"};
    app.require_subcommand(1);

    std::string config_path, pset_path, out_path, strategy, trace_path;
    int horizon = -1, region_grid = -1, partitions = -1, grid_points = 21;
    double epsilon = -1.0, exclusion = 1e-4;
    std::size_t budget = 0;

    auto* init = app.add_subcommand("init", "write the default scenario config");
    init->add_option("--out", out_path, "config path")->required();

    auto* offline = app.add_subcommand("offline", "build and prune P-sets");
    offline->add_option("--config", config_path, "scenario config (JSON)")
        ->required();
    offline->add_option("--out", out_path, "P-set output path")->required();
    offline->add_option("--horizon", horizon, "prediction horizon N");
    offline->add_option("--epsilon", epsilon, "pruning tolerance");
    offline->add_option("--budget", budget, "pre-prune set size cap");
    offline->add_option("--region-grid", region_grid, "grid points per axis");
    offline->add_option("--partitions", partitions, "number of regions z");

    auto* run = app.add_subcommand("run", "one scenario/strategy closed loop");
    run->add_option("--config", config_path)->required();
    run->add_option("--pset", pset_path)->required();
    run->add_option("--strategy", strategy, "adp1|adp2|adp3|nmpc")->required();
    run->add_option("--out", out_path, "trace CSV path")->required();

    auto* stab = app.add_subcommand("stability", "posteriori Lyapunov audit");
    stab->add_option("--config", config_path)->required();
    stab->add_option("--pset", pset_path)->required();
    stab->add_option("--controller", strategy, "adp1|adp2|adp3")
        ->default_val("adp1");
    stab->add_option("--grid-step", grid_points, "grid points per axis")
        ->default_val(21);
    stab->add_option("--exclusion", exclusion, "exclusion ball radius")
        ->default_val(1e-4);
    stab->add_option("--out", out_path, "report path (optional)");

    auto* bench = app.add_subcommand("bench", "strategy comparison table");
    bench->add_option("--config", config_path)->required();
    bench->add_option("--pset", pset_path)->required();
    bench->add_option("--out", out_path, "output directory")->required();

    auto* exp = app.add_subcommand("export", "plot-friendly CSV from a trace");
    exp->add_option("--trace", trace_path)->required();
    exp->add_option("--out", out_path)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (init->parsed()) {
            write_scenario_config(ScenarioConfig{}, out_path);
            std::cout << "wrote " << out_path << "\n";
            return 0;
        }
        if (offline->parsed())
            return run_offline(config_path, out_path, horizon, epsilon, budget,
                               region_grid, partitions);
        if (run->parsed())
            return run_scenario(config_path, pset_path, strategy, out_path);
        if (stab->parsed())
            return run_stability(config_path, pset_path, strategy, grid_points,
                                 exclusion, out_path);
        if (bench->parsed()) return run_bench(config_path, pset_path, out_path);
        if (exp->parsed()) return run_export(trace_path, out_path);
    } catch (const ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return kExitConfig;
    } catch (const InfeasibleError& ex) {
        std::cerr << "infeasible: " << ex.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
