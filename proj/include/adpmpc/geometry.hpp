#pragma once

#include <limits>

#include <Eigen/Dense>

#include "adpmpc/errors.hpp"

namespace adpmpc {

/// Axis-aligned box, used for actuator limits and physical level limits.
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
        return (x.array() >= lo.array() - tol).all() &&
               (x.array() <= hi.array() + tol).all();
    }

    Eigen::VectorXd clip(const Eigen::VectorXd& x) const {
        return x.cwiseMax(lo).cwiseMin(hi);
    }

    Box translated(const Eigen::VectorXd& offset) const {
        return Box{lo - offset, hi - offset};
    }
};

/// Half-space polytope {x : A x <= b} together with a bounding box used for
/// grid sampling. The box factory is exact; for general half-space data the
/// caller supplies the bounding box.
class Polytope {
public:
    Polytope() = default;

    Polytope(Eigen::MatrixXd A, Eigen::VectorXd b, Box bbox)
        : A_(std::move(A)), b_(std::move(b)), bbox_(std::move(bbox)) {
        if (A_.rows() != b_.size() || A_.cols() != bbox_.dim())
            throw DimensionError("polytope: inconsistent half-space data");
    }

    static Polytope box(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        const int n = static_cast<int>(lo.size());
        Eigen::MatrixXd A(2 * n, n);
        Eigen::VectorXd b(2 * n);
        A.topRows(n) = Eigen::MatrixXd::Identity(n, n);
        A.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
        b.head(n) = hi;
        b.tail(n) = -lo;
        return Polytope(std::move(A), std::move(b), Box{lo, hi});
    }

    int dim() const { return static_cast<int>(A_.cols()); }
    const Eigen::MatrixXd& halfspace_normals() const { return A_; }
    const Eigen::VectorXd& halfspace_offsets() const { return b_; }
    const Box& bounding_box() const { return bbox_; }

    /// Largest half-space excess; <= 0 means inside. Hand-rolled to stay
    /// allocation-free: this sits on the controllers' per-level hot path.
    double violation(const Eigen::VectorXd& x) const {
        const auto rows = A_.rows();
        if (rows == 0) return 0.0;
        const auto cols = A_.cols();
        double worst = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < rows; ++i) {
            double acc = -b_[i];
            for (Eigen::Index j = 0; j < cols; ++j) acc += A_(i, j) * x[j];
            if (acc > worst) worst = acc;
        }
        return worst;
    }

    bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const {
        return violation(x) <= tol;
    }

    Polytope translated(const Eigen::VectorXd& offset) const {
        // {x : Ax <= b} in original coordinates becomes
        // {e : Ae <= b - A*offset} in shifted coordinates e = x - offset.
        return Polytope(A_, b_ - A_ * offset, bbox_.translated(offset));
    }

private:
    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    Box bbox_;
};

}  // namespace adpmpc
