#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "adpmpc/geometry.hpp"
#include "adpmpc/plant.hpp"

namespace adpmpc {

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& P) {
    return 0.5 * (P + P.transpose());
}

/// State with a trailing constant 1, so the affine switched dynamics and the
/// per-level cost become linear/quadratic.
inline Eigen::VectorXd augment(const Eigen::VectorXd& x) {
    Eigen::VectorXd xbar(x.size() + 1);
    xbar << x, 1.0;
    return xbar;
}

struct CostWeights {
    Eigen::MatrixXd Q;    // n x n, PSD
    Eigen::MatrixXd R;    // m x m, PD
    Eigen::MatrixXd Q_N;  // n x n, PSD

    void validate() const;
};

/// Ordered, de-duplicated quantization of the actuator range.
struct QuantizedControlSet {
    std::vector<Eigen::VectorXd> levels;

    int size() const { return static_cast<int>(levels.size()); }
    int input_dim() const { return levels.empty() ? 0 : static_cast<int>(levels[0].size()); }

    /// Uniform grid over a scalar range, endpoints included.
    static QuantizedControlSet uniform(double lo, double hi, int count);

    QuantizedControlSet translated(const Eigen::VectorXd& offset) const;

    void validate(const Box& control_box) const;
};

struct Setpoint {
    Eigen::VectorXd x_r;
    Eigen::VectorXd u_r;
};

/// Linear dynamics plus one constant offset B*v per quantized level, in
/// augmented form, with the matching augmented cost matrices.
struct SwitchedAffineModel {
    Eigen::MatrixXd A;  // n x n discrete
    Eigen::MatrixXd B;  // n x m discrete
    std::vector<Eigen::MatrixXd> abar;  // (n+1)x(n+1) per level
    std::vector<Eigen::MatrixXd> qbar;  // (n+1)x(n+1) per level
    Eigen::MatrixXd qbar_N;
    QuantizedControlSet control_set;
    CostWeights weights;
    Eigen::VectorXd x_o;  // operating point
    Eigen::VectorXd u_o;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    int num_subsystems() const { return static_cast<int>(abar.size()); }

    /// Hash over the generating data; persisted value-function sets carry it
    /// so online modules can refuse mismatched models.
    std::uint64_t fingerprint() const;
};

enum class Discretization { ZeroOrderHold, ForwardEuler };

/// Discrete-time (A, B) at an operating point. Continuous Jacobians by
/// central finite differences on the ODE right-hand side, then discretized.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(
    const NonlinearPlant& plant, const Eigen::VectorXd& x_o,
    const Eigen::VectorXd& u_o, double dt,
    Discretization method = Discretization::ZeroOrderHold);

/// Continuous-time Jacobians only (finite differences, relative step 1e-6).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> numeric_jacobians(
    const NonlinearPlant& plant, const Eigen::VectorXd& x_o,
    const Eigen::VectorXd& u_o);

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize(
    const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc, double dt,
    Discretization method);

SwitchedAffineModel build_switched_model(const Eigen::MatrixXd& A,
                                         const Eigen::MatrixXd& B,
                                         const QuantizedControlSet& control_set,
                                         const CostWeights& weights);

/// Plant in error coordinates e = x - x_r, du = u - u_r; the origin is an
/// equilibrium under du = 0 and the constraint sets are translated.
NonlinearPlant shift_to_error_coordinates(const NonlinearPlant& plant,
                                          const Setpoint& sp);

}  // namespace adpmpc
