#include "adpmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "adpmpc/errors.hpp"

namespace adpmpc {

SimTrace run_closed_loop(const Scenario& scenario, const ControllerSpec& spec) {
    const double Ts = scenario.plant.sample_time;
    const long steps = std::lround(scenario.duration / Ts);
    SimTrace trace;
    trace.sample_time = Ts;
    trace.records.reserve(steps);

    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Eigen::VectorXd x_true = scenario.initial_state;
    const Eigen::VectorXd& x_r = scenario.setpoint.x_r;
    const Eigen::VectorXd& u_r = scenario.setpoint.u_r;

    for (long k = 0; k < steps; ++k) {
        TraceRecord rec;
        rec.t = k * Ts;
        rec.x_true = x_true;
        rec.x_measured = x_true;
        if (scenario.noise_sigma > 0.0) {
            for (int i = 0; i < rec.x_measured.size(); ++i)
                rec.x_measured[i] += scenario.noise_sigma * noise(rng);
        }
        const Eigen::VectorXd e = rec.x_measured - x_r;

        Eigen::VectorXd du;
        try {
            const ControlDecision dec =
                controller_step(e, spec, scenario.error_plant);
            du = dec.u_applied;
            rec.value = dec.stage2_value.value_or(dec.stage1_value);
            rec.latency_seconds = dec.latency_seconds;
        } catch (const InfeasibleError& inf) {
            // default policy: apply the least-violating level and keep going
            du = inf.least_violating_control;
            rec.infeasible = true;
            rec.value = std::numeric_limits<double>::quiet_NaN();
        } catch (const PlantBlowupError& ex) {
            trace.truncated = true;
            trace.failure = ex.what();
            break;
        }
        rec.stage_cost = stage_cost(e, du, spec.weights);
        rec.u = scenario.plant.control_box.clip(u_r + du);

        try {
            StepResult next = step_detailed(scenario.plant, x_true, rec.u);
            rec.clamped = next.clamped;
            x_true = std::move(next.x);
        } catch (const PlantBlowupError& ex) {
            trace.truncated = true;
            trace.failure = ex.what();
            trace.records.push_back(std::move(rec));
            break;
        }
        trace.records.push_back(std::move(rec));
    }
    return trace;
}

double compute_ise(const SimTrace& trace, const Eigen::VectorXd& x_r) {
    double ise = 0.0;
    for (const auto& rec : trace.records)
        ise += (rec.x_true - x_r).squaredNorm();
    return ise;
}

double control_total_variation(const SimTrace& trace) {
    double tv = 0.0;
    for (std::size_t k = 1; k < trace.records.size(); ++k)
        tv += (trace.records[k].u - trace.records[k - 1].u)
                  .cwiseAbs()
                  .sum();
    return tv;
}

namespace {

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * (v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

}  // namespace

BenchReport benchmark(const Scenario& scenario,
                      const std::vector<BenchEntry>& entries,
                      std::vector<SimTrace>* traces, int warmup_steps) {
    BenchReport report;
    for (const auto& entry : entries) {
        StrategyReport row;
        row.name = entry.name;
        try {
            SimTrace trace = run_closed_loop(scenario, *entry.spec);
            if (trace.truncated) {
                row.failed = true;
                row.failure = trace.failure;
            }
            std::vector<double> latencies;
            for (std::size_t k = 0; k < trace.records.size(); ++k) {
                if (static_cast<int>(k) < warmup_steps) continue;
                latencies.push_back(trace.records[k].latency_seconds);
            }
            if (!latencies.empty()) {
                double sum = 0.0;
                for (double v : latencies) sum += v;
                row.mean_latency = sum / latencies.size();
                row.median_latency = percentile(latencies, 0.5);
                row.p99_latency = percentile(latencies, 0.99);
            }
            row.ise = compute_ise(trace, scenario.setpoint.x_r);
            if (!trace.records.empty())
                row.final_error_norm =
                    (trace.records.back().x_true - scenario.setpoint.x_r).norm();
            if (traces) traces->push_back(std::move(trace));
        } catch (const std::exception& ex) {
            row.failed = true;
            row.failure = ex.what();
            if (traces) traces->emplace_back();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

void write_double(std::ostream& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

}  // namespace

void write_trace_csv(const SimTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    const int n = trace.records.empty()
                      ? 0
                      : static_cast<int>(trace.records[0].x_true.size());
    const int m = trace.records.empty()
                      ? 0
                      : static_cast<int>(trace.records[0].u.size());
    out << "t";
    for (int i = 0; i < n; ++i) out << ",x_true" << i;
    for (int i = 0; i < n; ++i) out << ",x_meas" << i;
    for (int i = 0; i < m; ++i) out << ",u" << i;
    out << ",stage_cost,value,latency,clamped,infeasible\n";
    for (const auto& rec : trace.records) {
        write_double(out, rec.t);
        for (int i = 0; i < n; ++i) { out << ','; write_double(out, rec.x_true[i]); }
        for (int i = 0; i < n; ++i) { out << ','; write_double(out, rec.x_measured[i]); }
        for (int i = 0; i < m; ++i) { out << ','; write_double(out, rec.u[i]); }
        out << ',';
        write_double(out, rec.stage_cost);
        out << ',';
        write_double(out, rec.value);
        out << ',';
        write_double(out, rec.latency_seconds);
        out << ',' << (rec.clamped ? 1 : 0) << ',' << (rec.infeasible ? 1 : 0)
            << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

SimTrace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("empty trace file: " + path);
    int n = 0, m = 0;
    {
        std::istringstream ss(header);
        std::string col;
        while (std::getline(ss, col, ',')) {
            if (col.rfind("x_true", 0) == 0) ++n;
            if (col.rfind("u", 0) == 0 && col != "u" && std::isdigit(col[1])) ++m;
        }
    }
    SimTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        auto next = [&]() -> double {
            if (!std::getline(ss, field, ','))
                throw ConfigError("malformed trace row in " + path);
            return std::stod(field);
        };
        TraceRecord rec;
        rec.t = next();
        rec.x_true.resize(n);
        for (int i = 0; i < n; ++i) rec.x_true[i] = next();
        rec.x_measured.resize(n);
        for (int i = 0; i < n; ++i) rec.x_measured[i] = next();
        rec.u.resize(m);
        for (int i = 0; i < m; ++i) rec.u[i] = next();
        rec.stage_cost = next();
        rec.value = next();
        rec.latency_seconds = next();
        rec.clamped = next() != 0.0;
        rec.infeasible = next() != 0.0;
        trace.records.push_back(std::move(rec));
    }
    if (trace.records.size() > 1)
        trace.sample_time = trace.records[1].t - trace.records[0].t;
    return trace;
}

void write_bench_csv(const BenchReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    out << "strategy,mean_latency,median_latency,p99_latency,ise,final_error,"
           "failed\n";
    for (const auto& row : report.rows) {
        out << row.name << ',';
        write_double(out, row.mean_latency);
        out << ',';
        write_double(out, row.median_latency);
        out << ',';
        write_double(out, row.p99_latency);
        out << ',';
        write_double(out, row.ise);
        out << ',';
        write_double(out, row.final_error_norm);
        out << ',' << (row.failed ? 1 : 0) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::string format_bench_table(const BenchReport& report) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "strategy" << std::right
        << std::setw(14) << "mean time" << std::setw(14) << "median"
        << std::setw(14) << "p99" << std::setw(14) << "ISE" << std::setw(14)
        << "final err" << "\n";
    for (const auto& row : report.rows) {
        out << std::left << std::setw(10) << row.name << std::right
            << std::scientific << std::setprecision(4) << std::setw(14)
            << row.mean_latency << std::setw(14) << row.median_latency
            << std::setw(14) << row.p99_latency << std::setw(14) << row.ise
            << std::setw(14) << row.final_error_norm;
        if (row.failed) out << "  FAILED: " << row.failure;
        out << "\n";
    }
    return out.str();
}

}  // namespace adpmpc
