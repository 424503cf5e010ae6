#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adpmpc/controller.hpp"
#include "adpmpc/plant.hpp"

namespace adpmpc {

/// One closed-loop experiment: true plant in absolute coordinates, the
/// controller in error coordinates around the setpoint.
struct Scenario {
    NonlinearPlant plant;        // absolute coordinates
    NonlinearPlant error_plant;  // shifted, used by the controller
    Setpoint setpoint;
    Eigen::VectorXd initial_state;  // absolute
    double duration = 0.0;          // seconds
    double noise_sigma = 0.0;       // measurement noise std-dev, per state
    std::uint64_t seed = 0;
};

struct TraceRecord {
    double t = 0.0;
    Eigen::VectorXd x_true;      // absolute, before applying u
    Eigen::VectorXd x_measured;  // absolute
    Eigen::VectorXd u;           // absolute
    double stage_cost = 0.0;     // in error coordinates
    double value = 0.0;          // controller objective J*_N at this step
    double latency_seconds = 0.0;
    bool clamped = false;
    bool infeasible = false;  // fallback control applied
};

struct SimTrace {
    double sample_time = 0.0;
    std::vector<TraceRecord> records;
    bool truncated = false;
    std::string failure;
};

SimTrace run_closed_loop(const Scenario& scenario, const ControllerSpec& spec);

/// Sum of squared setpoint errors over the run, true states.
double compute_ise(const SimTrace& trace, const Eigen::VectorXd& x_r);

/// Total variation of the applied control, sum over components.
double control_total_variation(const SimTrace& trace);

struct StrategyReport {
    std::string name;
    double mean_latency = 0.0;
    double median_latency = 0.0;
    double p99_latency = 0.0;
    double ise = 0.0;
    double final_error_norm = 0.0;
    bool failed = false;
    std::string failure;
};

struct BenchReport {
    std::vector<StrategyReport> rows;
};

struct BenchEntry {
    std::string name;
    const ControllerSpec* spec = nullptr;
};

/// Runs every strategy on identical scenario/seed; timing is taken around the
/// controller step only, with the first warm-up steps excluded from the
/// statistics. Traces are returned in entry order.
BenchReport benchmark(const Scenario& scenario,
                      const std::vector<BenchEntry>& entries,
                      std::vector<SimTrace>* traces = nullptr,
                      int warmup_steps = 10);

void write_trace_csv(const SimTrace& trace, const std::string& path);
SimTrace read_trace_csv(const std::string& path);
void write_bench_csv(const BenchReport& report, const std::string& path);
std::string format_bench_table(const BenchReport& report);

}  // namespace adpmpc
