#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "adpmpc/geometry.hpp"
#include "adpmpc/model.hpp"

namespace adpmpc {

struct ValueQuery {
    double value = 0.0;
    int argmin = -1;
};

/// Min-of-quadratics value function approximation: an ordered set of
/// augmented Riccati matrices produced by the backward switching-tree
/// recursion. Order is lexicographic by generating switching sequence and
/// stable under pruning.
class RiccatiSet {
public:
    RiccatiSet() = default;
    RiccatiSet(std::vector<Eigen::MatrixXd> matrices, double epsilon,
               int horizon, std::uint64_t fingerprint,
               std::vector<int> pruned_per_level = {});

    int size() const { return static_cast<int>(matrices_.size()); }
    int dim() const;
    const std::vector<Eigen::MatrixXd>& matrices() const { return matrices_; }
    double epsilon() const { return epsilon_; }
    int horizon() const { return horizon_; }
    std::uint64_t model_fingerprint() const { return fingerprint_; }
    const std::vector<int>& pruned_per_level() const { return pruned_per_level_; }

    /// min_i xbar^T P_i xbar and the first attaining index.
    ValueQuery evaluate(const Eigen::VectorXd& xbar) const;

    /// Subset by parent indices, order preserved.
    RiccatiSet subset(const std::vector<int>& indices) const;

private:
    std::vector<Eigen::MatrixXd> matrices_;
    std::vector<double> packed_;  // row-major, contiguous, for the scan kernel
    double epsilon_ = 0.0;
    int horizon_ = 0;
    std::uint64_t fingerprint_ = 0;
    std::vector<int> pruned_per_level_;
};

/// One backward Riccati sweep for subsystem sigma:
/// Qbar_sigma + Abar_sigma^T P_next Abar_sigma, symmetrized.
Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P_next, int sigma,
                             const SwitchedAffineModel& model);

/// Sufficient redundancy test: P_j is eps-redundant if some candidate P_i
/// satisfies (P_j + eps*I) - P_i >= 0. Returns the first dominating index.
std::pair<bool, std::optional<int>> is_eps_redundant(
    const Eigen::MatrixXd& P_j, const std::vector<Eigen::MatrixXd>& candidates,
    double epsilon);

/// Single pass in deterministic order; each candidate is tested against the
/// kept matrices only, so every removal carries a single-eps domination
/// certificate.
std::vector<Eigen::MatrixXd> prune(const std::vector<Eigen::MatrixXd>& set,
                                   double epsilon);

struct SynthesisOptions {
    double epsilon = 0.0;
    std::size_t budget = 1'000'000;  // per-level pre-prune cap
    bool prune_per_level = true;     // prune at every backward level
};

/// Backward recursion over the switching tree from Qbar_N down to level 1.
RiccatiSet build_p1_set(const SwitchedAffineModel& model, int horizon,
                        const SynthesisOptions& opts = {});

RiccatiSet build_p1_set(const SwitchedAffineModel& model, int horizon,
                        double epsilon);

/// Matrices of `parent` that attain the minimum somewhere on a deterministic
/// grid over the region (points_per_axis per dimension, filtered to the
/// polytope). Always a subset of the parent.
RiccatiSet restrict_to_region(const RiccatiSet& parent, const Polytope& region,
                              int points_per_axis);

struct RegionRiccatiMap {
    std::vector<Polytope> regions;
    std::vector<RiccatiSet> sets;
    RiccatiSet parent;

    // grid metadata for O(1) lookup; populated by partition_regions (the
    // regions form an axis-aligned grid over X's bounding box, axis 0 fastest)
    Eigen::VectorXd grid_lo;
    Eigen::VectorXd grid_hi;
    std::vector<int> grid_counts;

    /// Lowest-index region containing x; -1 if none. Uses the grid metadata
    /// when available, otherwise scans the polytopes in order.
    int region_of(const Eigen::VectorXd& x, double tol = 1e-9) const;
};

/// Axis-aligned partition of X's bounding box into z cells (intersected with
/// X), with restrict_to_region applied per cell.
RegionRiccatiMap partition_regions(const Polytope& X, int z,
                                   const RiccatiSet& parent,
                                   int points_per_axis);

// P-set persistence: versioned text format with full double precision.
void save_pset(const RiccatiSet& set, const std::string& path);
RiccatiSet load_pset(const std::string& path);

}  // namespace adpmpc
