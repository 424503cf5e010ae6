#include "adpmpc/model.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "adpmpc/errors.hpp"

namespace adpmpc {

void CostWeights::validate() const {
    const double sym_tol = 1e-12;
    if (Q.rows() != Q.cols() || Q_N.rows() != Q_N.cols() || R.rows() != R.cols())
        throw DimensionError("cost weights must be square");
    if (Q.rows() != Q_N.rows())
        throw DimensionError("Q and Q_N must have the same size");
    auto check_sym = [&](const Eigen::MatrixXd& M, const char* name) {
        if ((M - M.transpose()).cwiseAbs().maxCoeff() > sym_tol)
            throw ConfigError(std::string("cost weight not symmetric: ") + name);
    };
    check_sym(Q, "Q");
    check_sym(R, "R");
    check_sym(Q_N, "Q_N");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esQ(Q), esR(R), esN(Q_N);
    if (esQ.eigenvalues().minCoeff() < -1e-12)
        throw ConfigError("Q must be positive semidefinite");
    if (esN.eigenvalues().minCoeff() < -1e-12)
        throw ConfigError("Q_N must be positive semidefinite");
    if (esR.eigenvalues().minCoeff() <= 0.0)
        throw ConfigError("R must be positive definite");
}

QuantizedControlSet QuantizedControlSet::uniform(double lo, double hi,
                                                int count) {
    if (count < 2) throw ConfigError("quantized set needs at least 2 levels");
    QuantizedControlSet set;
    set.levels.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        set.levels.push_back(Eigen::VectorXd::Constant(1, lo + t * (hi - lo)));
    }
    return set;
}

QuantizedControlSet QuantizedControlSet::translated(
    const Eigen::VectorXd& offset) const {
    QuantizedControlSet out;
    out.levels.reserve(levels.size());
    for (const auto& v : levels) out.levels.push_back(v - offset);
    return out;
}

void QuantizedControlSet::validate(const Box& control_box) const {
    if (size() < 2) throw ConfigError("quantized set needs at least 2 levels");
    for (const auto& v : levels) {
        if (!control_box.contains(v, 1e-12))
            throw ConfigError("quantized level outside the control box");
    }
    for (int i = 0; i + 1 < size(); ++i) {
        // sorted lexicographically and pairwise distinct
        bool le = true;
        for (int k = 0; k < levels[i].size(); ++k) {
            if (levels[i][k] < levels[i + 1][k]) break;
            if (levels[i][k] > levels[i + 1][k]) { le = false; break; }
            if (k + 1 == levels[i].size()) le = false;  // equal vectors
        }
        if (!le) throw ConfigError("quantized levels must be sorted and distinct");
    }
}

namespace {

void hash_bytes(std::uint64_t& h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;  // FNV-1a
    }
}

void hash_matrix(std::uint64_t& h, const Eigen::MatrixXd& M) {
    for (Eigen::Index j = 0; j < M.cols(); ++j)
        for (Eigen::Index i = 0; i < M.rows(); ++i) {
            const double v = M(i, j);
            hash_bytes(h, &v, sizeof(v));
        }
}

}  // namespace

std::uint64_t SwitchedAffineModel::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    hash_matrix(h, A);
    hash_matrix(h, B);
    hash_matrix(h, weights.Q);
    hash_matrix(h, weights.R);
    hash_matrix(h, weights.Q_N);
    for (const auto& v : control_set.levels) hash_matrix(h, v);
    return h;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> numeric_jacobians(
    const NonlinearPlant& plant, const Eigen::VectorXd& x_o,
    const Eigen::VectorXd& u_o) {
    const int n = plant.n;
    const int m = plant.m;
    Eigen::MatrixXd Ac(n, n);
    Eigen::MatrixXd Bc(n, m);
    const double rel = 1e-6;
    for (int j = 0; j < n; ++j) {
        const double h = rel * std::max(1.0, std::abs(x_o[j]));
        Eigen::VectorXd xp = x_o, xm = x_o;
        xp[j] += h;
        xm[j] -= h;
        Ac.col(j) = (plant.rhs(xp, u_o) - plant.rhs(xm, u_o)) / (2.0 * h);
    }
    for (int j = 0; j < m; ++j) {
        const double h = rel * std::max(1.0, std::abs(u_o[j]));
        Eigen::VectorXd up = u_o, um = u_o;
        up[j] += h;
        um[j] -= h;
        Bc.col(j) = (plant.rhs(x_o, up) - plant.rhs(x_o, um)) / (2.0 * h);
    }
    if (!Ac.allFinite() || !Bc.allFinite())
        throw SingularLinearizationError(
            "finite-difference Jacobian is non-finite at the operating point");
    return {Ac, Bc};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> discretize(
    const Eigen::MatrixXd& Ac, const Eigen::MatrixXd& Bc, double dt,
    Discretization method) {
    const int n = static_cast<int>(Ac.rows());
    const int m = static_cast<int>(Bc.cols());
    if (method == Discretization::ForwardEuler) {
        return {Eigen::MatrixXd::Identity(n, n) + dt * Ac, dt * Bc};
    }
    // ZOH: exp of the block matrix [[Ac, Bc], [0, 0]] * dt
    Eigen::MatrixXd blk = Eigen::MatrixXd::Zero(n + m, n + m);
    blk.topLeftCorner(n, n) = Ac;
    blk.topRightCorner(n, m) = Bc;
    const Eigen::MatrixXd e = (blk * dt).exp();
    return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> linearize(
    const NonlinearPlant& plant, const Eigen::VectorXd& x_o,
    const Eigen::VectorXd& u_o, double dt, Discretization method) {
    if (dt <= 0.0) throw ConfigError("linearize: dt must be positive");
    auto [Ac, Bc] = numeric_jacobians(plant, x_o, u_o);
    return discretize(Ac, Bc, dt, method);
}

SwitchedAffineModel build_switched_model(const Eigen::MatrixXd& A,
                                         const Eigen::MatrixXd& B,
                                         const QuantizedControlSet& control_set,
                                         const CostWeights& weights) {
    weights.validate();
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    if (A.cols() != n || B.rows() != n)
        throw DimensionError("build_switched_model: A/B dimension mismatch");
    if (weights.Q.rows() != n || weights.R.rows() != m)
        throw DimensionError("build_switched_model: weight dimension mismatch");
    if (control_set.input_dim() != m)
        throw DimensionError("build_switched_model: control level dimension mismatch");

    SwitchedAffineModel model;
    model.A = A;
    model.B = B;
    model.control_set = control_set;
    model.weights = weights;
    model.x_o = Eigen::VectorXd::Zero(n);
    model.u_o = Eigen::VectorXd::Zero(m);

    for (const auto& v : control_set.levels) {
        Eigen::MatrixXd abar = Eigen::MatrixXd::Zero(n + 1, n + 1);
        abar.topLeftCorner(n, n) = A;
        abar.topRightCorner(n, 1) = B * v;
        abar(n, n) = 1.0;
        model.abar.push_back(std::move(abar));

        Eigen::MatrixXd qbar = Eigen::MatrixXd::Zero(n + 1, n + 1);
        qbar.topLeftCorner(n, n) = weights.Q;
        qbar(n, n) = (v.transpose() * weights.R * v)(0, 0);
        model.qbar.push_back(symmetrize(qbar));
    }
    Eigen::MatrixXd qbarN = Eigen::MatrixXd::Zero(n + 1, n + 1);
    qbarN.topLeftCorner(n, n) = weights.Q_N;
    model.qbar_N = symmetrize(qbarN);
    return model;
}

NonlinearPlant shift_to_error_coordinates(const NonlinearPlant& plant,
                                          const Setpoint& sp) {
    NonlinearPlant shifted = plant;
    const Eigen::VectorXd x_r = sp.x_r;
    const Eigen::VectorXd u_r = sp.u_r;
    auto base_rhs = plant.rhs;
    shifted.rhs = [base_rhs, x_r, u_r](const Eigen::VectorXd& e,
                                       const Eigen::VectorXd& du) {
        return base_rhs(x_r + e, u_r + du);
    };
    shifted.state_constraint = plant.state_constraint.translated(x_r);
    shifted.control_box = plant.control_box.translated(u_r);
    if (plant.state_clamp)
        shifted.state_clamp = plant.state_clamp->translated(x_r);
    return shifted;
}

}  // namespace adpmpc
