#include "adpmpc/riccati.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "adpmpc/errors.hpp"
#include "adpmpc/kernels.hpp"

namespace adpmpc {

namespace {

constexpr double kPsdTol = -1e-9;

std::vector<double> pack(const std::vector<Eigen::MatrixXd>& mats) {
    std::vector<double> packed;
    if (mats.empty()) return packed;
    const int d = static_cast<int>(mats[0].rows());
    packed.reserve(mats.size() * d * d);
    for (const auto& M : mats)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) packed.push_back(M(i, j));
    return packed;
}

}  // namespace

RiccatiSet::RiccatiSet(std::vector<Eigen::MatrixXd> matrices, double epsilon,
                       int horizon, std::uint64_t fingerprint,
                       std::vector<int> pruned_per_level)
    : matrices_(std::move(matrices)),
      epsilon_(epsilon),
      horizon_(horizon),
      fingerprint_(fingerprint),
      pruned_per_level_(std::move(pruned_per_level)) {
    if (matrices_.empty()) throw ConfigError("RiccatiSet must be nonempty");
    packed_ = pack(matrices_);
}

int RiccatiSet::dim() const {
    return matrices_.empty() ? 0 : static_cast<int>(matrices_[0].rows());
}

ValueQuery RiccatiSet::evaluate(const Eigen::VectorXd& xbar) const {
    const int d = dim();
    if (xbar.size() != d)
        throw DimensionError("RiccatiSet::evaluate: dimension mismatch");
    double outer_buf[64];
    std::vector<double> outer_heap;
    double* outer = outer_buf;
    if (d * d > 64) {
        outer_heap.resize(d * d);
        outer = outer_heap.data();
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) outer[i * d + j] = xbar[i] * xbar[j];
    const auto r = kernels::quadform_min(packed_.data(), matrices_.size(),
                                         static_cast<std::size_t>(d) * d, outer);
    return ValueQuery{r.value, r.index};
}

RiccatiSet RiccatiSet::subset(const std::vector<int>& indices) const {
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(indices.size());
    for (int i : indices) mats.push_back(matrices_.at(i));
    return RiccatiSet(std::move(mats), epsilon_, horizon_, fingerprint_,
                      pruned_per_level_);
}

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& P_next, int sigma,
                             const SwitchedAffineModel& model) {
    const auto& abar = model.abar.at(sigma);
    const auto& qbar = model.qbar.at(sigma);
    return symmetrize(qbar + abar.transpose() * P_next * abar);
}

std::pair<bool, std::optional<int>> is_eps_redundant(
    const Eigen::MatrixXd& P_j, const std::vector<Eigen::MatrixXd>& candidates,
    double epsilon) {
    const int d = static_cast<int>(P_j.rows());
    const Eigen::MatrixXd shifted =
        P_j + epsilon * Eigen::MatrixXd::Identity(d, d);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            shifted - candidates[i], Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() >= kPsdTol)
            return {true, static_cast<int>(i)};
    }
    return {false, std::nullopt};
}

std::vector<Eigen::MatrixXd> prune(const std::vector<Eigen::MatrixXd>& set,
                                   double epsilon) {
    if (set.empty()) throw ConfigError("prune: empty set");
    std::vector<Eigen::MatrixXd> kept;
    kept.reserve(set.size());
    for (const auto& P : set) {
        if (!is_eps_redundant(P, kept, epsilon).first) kept.push_back(P);
    }
    return kept;
}

RiccatiSet build_p1_set(const SwitchedAffineModel& model, int horizon,
                        const SynthesisOptions& opts) {
    if (horizon < 1) throw ConfigError("build_p1_set: horizon must be >= 1");
    if (opts.epsilon < 0) throw ConfigError("build_p1_set: epsilon must be >= 0");
    const int M = model.num_subsystems();
    std::vector<Eigen::MatrixXd> current{model.qbar_N};
    std::vector<int> pruned_per_level;
    // levels N-1 down to 1; each surviving matrix spawns M children
    for (int level = horizon - 1; level >= 1; --level) {
        if (current.size() * M > opts.budget)
            throw SynthesisOverflowError(
                "pre-prune set size exceeds budget; increase epsilon or budget");
        std::vector<Eigen::MatrixXd> children;
        children.reserve(current.size() * M);
        for (const auto& P : current)
            for (int sigma = 0; sigma < M; ++sigma)
                children.push_back(riccati_step(P, sigma, model));
        const std::size_t before = children.size();
        if (opts.prune_per_level || level == 1)
            children = prune(children, opts.epsilon);
        pruned_per_level.push_back(static_cast<int>(before - children.size()));
        current = std::move(children);
    }
    return RiccatiSet(std::move(current), opts.epsilon, horizon,
                      model.fingerprint(), std::move(pruned_per_level));
}

RiccatiSet build_p1_set(const SwitchedAffineModel& model, int horizon,
                        double epsilon) {
    SynthesisOptions opts;
    opts.epsilon = epsilon;
    return build_p1_set(model, horizon, opts);
}

namespace {

/// Inclusive linspace grid over the bounding box, lowest axis fastest.
std::vector<Eigen::VectorXd> grid_points(const Box& bbox, int points_per_axis) {
    const int n = bbox.dim();
    std::vector<Eigen::VectorXd> pts;
    std::vector<int> idx(n, 0);
    const int g = std::max(1, points_per_axis);
    auto coord = [&](int axis, int j) {
        if (g == 1) return 0.5 * (bbox.lo[axis] + bbox.hi[axis]);
        return bbox.lo[axis] +
               (bbox.hi[axis] - bbox.lo[axis]) * j / static_cast<double>(g - 1);
    };
    while (true) {
        Eigen::VectorXd x(n);
        for (int a = 0; a < n; ++a) x[a] = coord(a, idx[a]);
        pts.push_back(std::move(x));
        int a = 0;
        while (a < n && ++idx[a] == g) idx[a++] = 0;
        if (a == n) break;
    }
    return pts;
}

}  // namespace

RiccatiSet restrict_to_region(const RiccatiSet& parent, const Polytope& region,
                              int points_per_axis) {
    const auto pts = grid_points(region.bounding_box(), points_per_axis);
    std::vector<bool> hit(parent.size(), false);
    std::size_t inside = 0;
    for (const auto& x : pts) {
        if (!region.contains(x)) continue;
        ++inside;
        hit[parent.evaluate(augment(x)).argmin] = true;
    }
    if (inside == 0)
        throw EmptyRegionError("restrict_to_region: no grid point in region");
    std::vector<int> indices;
    for (int i = 0; i < parent.size(); ++i)
        if (hit[i]) indices.push_back(i);
    return parent.subset(indices);
}

int RegionRiccatiMap::region_of(const Eigen::VectorXd& x, double tol) const {
    if (!grid_counts.empty() &&
        static_cast<int>(grid_counts.size()) == x.size()) {
        // direct cell indexing; on shared faces pick the lower cell so the
        // result matches the lowest-index scan
        int flat = 0, stride = 1;
        for (int a = 0; a < x.size(); ++a) {
            const double w =
                (grid_hi[a] - grid_lo[a]) / grid_counts[a];
            int c = static_cast<int>(std::floor((x[a] - grid_lo[a]) / w));
            if (c >= grid_counts[a]) c = grid_counts[a] - 1;
            if (c < 0) c = 0;
            if (c > 0 && x[a] - (grid_lo[a] + c * w) <= tol) --c;
            flat += stride * c;
            stride *= grid_counts[a];
        }
        return regions[flat].contains(x, tol) ? flat : -1;
    }
    for (std::size_t j = 0; j < regions.size(); ++j)
        if (regions[j].contains(x, tol)) return static_cast<int>(j);
    return -1;
}

namespace {

/// Factor z into per-axis cell counts, as even as possible, product exactly z.
std::vector<int> axis_factors(int z, int n) {
    std::vector<int> f(n, 1);
    int rem = z;
    for (int a = 0; a < n; ++a) {
        const int left = n - a;
        int target = static_cast<int>(
            std::floor(std::pow(static_cast<double>(rem), 1.0 / left) + 1e-9));
        while (target > 1 && rem % target != 0) --target;
        f[a] = std::max(1, target);
        rem /= f[a];
    }
    f[n - 1] *= rem;  // any leftover factor goes to the last axis
    return f;
}

}  // namespace

RegionRiccatiMap partition_regions(const Polytope& X, int z,
                                   const RiccatiSet& parent,
                                   int points_per_axis) {
    if (z < 1) throw ConfigError("partition_regions: z must be >= 1");
    const int n = X.dim();
    const Box& bbox = X.bounding_box();
    const std::vector<int> counts = axis_factors(z, n);

    RegionRiccatiMap map;
    map.parent = parent;
    map.grid_lo = bbox.lo;
    map.grid_hi = bbox.hi;
    map.grid_counts = counts;
    std::vector<int> idx(n, 0);
    while (true) {
        Eigen::VectorXd lo(n), hi(n);
        for (int a = 0; a < n; ++a) {
            const double w = (bbox.hi[a] - bbox.lo[a]) / counts[a];
            lo[a] = bbox.lo[a] + idx[a] * w;
            hi[a] = bbox.lo[a] + (idx[a] + 1) * w;
        }
        // cell intersected with X: stack both sets of half-spaces
        const Polytope cell = Polytope::box(lo, hi);
        Eigen::MatrixXd A(cell.halfspace_normals().rows() +
                              X.halfspace_normals().rows(),
                          n);
        Eigen::VectorXd b(A.rows());
        A << cell.halfspace_normals(), X.halfspace_normals();
        b << cell.halfspace_offsets(), X.halfspace_offsets();
        map.regions.emplace_back(std::move(A), std::move(b), Box{lo, hi});
        map.sets.push_back(
            restrict_to_region(parent, map.regions.back(), points_per_axis));
        int a = 0;
        while (a < n && ++idx[a] == counts[a]) idx[a++] = 0;
        if (a == n) break;
    }
    return map;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

void save_pset(const RiccatiSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    char buf[64];
    out << "ADPMPC-PSET v1\n";
    out << "dim " << set.dim() << "\n";
    out << "count " << set.size() << "\n";
    out << "horizon " << set.horizon() << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", set.epsilon());
    out << "epsilon " << buf << "\n";
    out << "fingerprint " << set.model_fingerprint() << "\n";
    for (const auto& M : set.matrices()) {
        for (int i = 0; i < M.rows(); ++i) {
            for (int j = 0; j < M.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
                out << buf << (j + 1 < M.cols() ? ' ' : '\n');
            }
        }
    }
    if (!out) throw ConfigError("write failed: " + path);
}

RiccatiSet load_pset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "ADPMPC-PSET v1")
        throw ConfigError("bad P-set header in " + path);
    int dim = 0, count = 0, horizon = 0;
    double epsilon = 0.0;
    std::uint64_t fingerprint = 0;
    for (int k = 0; k < 5; ++k) {
        if (!std::getline(in, line)) throw ConfigError("truncated P-set file");
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "dim") ss >> dim;
        else if (key == "count") ss >> count;
        else if (key == "horizon") ss >> horizon;
        else if (key == "epsilon") ss >> epsilon;
        else if (key == "fingerprint") ss >> fingerprint;
        else throw ConfigError("unknown P-set field: " + key);
        if (!ss) throw ConfigError("malformed P-set field: " + key);
    }
    if (dim < 2 || count < 1) throw ConfigError("invalid P-set metadata");
    std::vector<Eigen::MatrixXd> mats;
    mats.reserve(count);
    for (int k = 0; k < count; ++k) {
        Eigen::MatrixXd M(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                if (!(in >> M(i, j))) throw ConfigError("truncated P-set matrices");
        mats.push_back(std::move(M));
    }
    return RiccatiSet(std::move(mats), epsilon, horizon, fingerprint);
}

}  // namespace adpmpc
