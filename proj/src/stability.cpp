#include "adpmpc/stability.hpp"

#include <cmath>
#include <sstream>

#include "adpmpc/errors.hpp"

namespace adpmpc {

double closed_loop_cost(const Eigen::VectorXd& x, const ControllerSpec& spec,
                        const NonlinearPlant& plant) {
    const ControlDecision dec = controller_step(x, spec, plant);
    const Eigen::VectorXd x_next = predict(x, dec.u_applied, spec, plant);
    const Eigen::VectorXd xbar = augment(x_next);
    const RiccatiSet* set = spec.riccati;
    if (spec.strategy == Strategy::ADP3 && spec.regions) {
        const int j = spec.regions->region_of(x);
        if (j >= 0) set = &spec.regions->sets[j];
    }
    const Eigen::MatrixXd& P =
        set->matrices().at(std::max(0, dec.argmin_matrix_index));
    return stage_cost(x, dec.u_applied, spec.weights) +
           (xbar.transpose() * P * xbar)(0, 0);
}

AuditReport audit(const AuditConfig& config) {
    if (!config.controller || !config.plant)
        throw ConfigError("audit: controller and plant required");
    if (config.points_per_axis < 2 || config.exclusion_radius <= 0)
        throw ConfigError("audit: degenerate grid");
    const ControllerSpec& spec = *config.controller;
    const NonlinearPlant& plant = *config.plant;
    const Box& bbox = config.X.bounding_box();
    const int n = bbox.dim();
    const int g = config.points_per_axis;

    AuditReport report;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(spec.weights.Q,
                                                      Eigen::EigenvaluesOnly);
    report.c1 = es.eigenvalues().minCoeff();

    double max_step = 0.0;
    for (int a = 0; a < n; ++a)
        max_step = std::max(max_step, (bbox.hi[a] - bbox.lo[a]) / (g - 1));
    report.grid_step = max_step;
    report.precision_digits = -std::log10(max_step);

    try {
        report.origin_cost =
            closed_loop_cost(Eigen::VectorXd::Zero(n), spec, plant);
    } catch (const std::exception&) {
        report.origin_cost = std::numeric_limits<double>::quiet_NaN();
    }
    report.origin_offset_flagged = std::abs(report.origin_cost) > 1e-12;

    double worst = -std::numeric_limits<double>::infinity();
    std::vector<int> idx(n, 0);
    bool nonfinite = false;
    Eigen::VectorXd offending;
    while (true) {
        Eigen::VectorXd x(n);
        for (int a = 0; a < n; ++a)
            x[a] = bbox.lo[a] + (bbox.hi[a] - bbox.lo[a]) * idx[a] / (g - 1.0);
        if (config.X.contains(x) && x.norm() > config.exclusion_radius) {
            double cx;
            try {
                const ControlDecision dec = controller_step(x, spec, plant);
                const Eigen::VectorXd x_next =
                    predict(x, dec.u_applied, spec, plant);
                cx = (closed_loop_cost(x_next, spec, plant) -
                      closed_loop_cost(x, spec, plant)) /
                     x.squaredNorm();
            } catch (const std::exception&) {
                cx = std::numeric_limits<double>::quiet_NaN();
            }
            ++report.points_tested;
            if (!std::isfinite(cx)) {
                nonfinite = true;
                offending = x;
                break;
            }
            if (cx > worst) {
                worst = cx;
                report.worst_state = x;
            }
        }
        int a = 0;
        while (a < n && ++idx[a] == g) idx[a++] = 0;
        if (a == n) break;
    }

    if (nonfinite || report.points_tested == 0) {
        report.verdict = AuditVerdict::Inconclusive;
        report.c2 = std::numeric_limits<double>::quiet_NaN();
        std::ostringstream note;
        note << "non-finite decrease ratio";
        if (offending.size() > 0)
            note << " at [" << offending.transpose() << "]";
        report.note = nonfinite ? note.str() : "no grid point inside the region";
        return report;
    }
    report.c2 = -worst;
    report.verdict = report.c2 > 0 ? AuditVerdict::CertifiedDecrease
                                   : AuditVerdict::Violated;
    if (report.origin_offset_flagged) {
        report.note =
            "J*_N(0) is nonzero (constant block of the selected matrix); it is "
            "reported and subtracted when checking the lower-bound condition";
    }
    return report;
}

std::string format_report(const AuditReport& report) {
    std::ostringstream out;
    out << "stability audit\n";
    out << "  c1 (lambda_min(Q)): " << report.c1 << "\n";
    out << "  c2: " << report.c2 << "\n";
    out << "  verdict: "
        << (report.verdict == AuditVerdict::CertifiedDecrease
                ? "certified-decrease"
                : report.verdict == AuditVerdict::Violated ? "violated"
                                                           : "inconclusive")
        << "\n";
    out << "  points tested: " << report.points_tested << "\n";
    out << "  grid step: " << report.grid_step
        << " (approx. digits of precision: " << report.precision_digits << ")\n";
    if (report.worst_state.size() > 0)
        out << "  worst state: [" << report.worst_state.transpose() << "]\n";
    out << "  J*_N(0): " << report.origin_cost << "\n";
    if (!report.note.empty()) out << "  note: " << report.note << "\n";
    return out.str();
}

}  // namespace adpmpc
