#include "splitfactor/selection.hpp"

#include <algorithm>
#include <cmath>

namespace splitfactor {

namespace {

// Seeds are snapped to this dyadic lattice; 2^-10 keeps the snap well inside
// the 2 * scan_resolution tolerance the equivariance contract allows.
constexpr double kSeedLattice = 1.0 / 1024.0;

// Nearest-integer division with half-up ties; covariant under shifts by
// whole multiples of the divisor.
inline long long round_div(long long a, long long m) {
    long long q = a / m;
    long long r = a - q * m;
    if (r < 0) {
        q -= 1;
        r += m;
    }
    return q + (2 * r >= m ? 1 : 0);
}

// Does the union of open intervals (p - rho, p + rho), p in [side_lo,
// side_hi] sorted, cover every center in [a1, a2]?
bool covers_interval(const std::vector<double>& pts, std::size_t first, std::size_t last,
                     double rho, double a1, double a2) {
    double reach = a1;
    bool started = false;
    for (std::size_t k = first; k < last; ++k) {
        double l = pts[k] - rho;
        double r = pts[k] + rho;
        if (!started) {
            if (l < a1 && r > a1) {
                started = true;
                reach = r;
            } else if (l >= a1) {
                return false;  // gap at a1 (or beyond)
            } else {
                continue;  // interval entirely left of a1
            }
        } else {
            if (l >= reach) return false;  // open-interval junction gap
            reach = std::max(reach, r);
        }
        if (reach > a2) return true;
    }
    return started && reach > a2;
}

// One-dimensional pre-seed machinery over sorted coordinates.
struct Scanner1D {
    const std::vector<double>& xs;  // ascending
    const SelectionConfig& cfg;

    std::size_t lower(double v) const {
        return std::lower_bound(xs.begin(), xs.end(), v) - xs.begin();
    }
    std::size_t upper(double v) const {
        return std::upper_bound(xs.begin(), xs.end(), v) - xs.begin();
    }

    bool side_shell_empty(double lo, double hi) const { return lower(lo) == upper(hi); }

    bool side_halo_dense(double lo, double hi) const {
        double a1 = lo + cfg.density_radius;
        double a2 = hi - cfg.density_radius;
        std::size_t first = lower(lo - cfg.density_radius);
        std::size_t last = upper(hi + cfg.density_radius);
        return covers_interval(xs, first, last, cfg.density_radius, a1, a2);
    }

    bool preseed(double t) const {
        if (!side_shell_empty(t + cfg.r_halo_out, t + cfg.r_shell_out)) return false;
        if (!side_shell_empty(t - cfg.r_shell_out, t - cfg.r_halo_out)) return false;
        if (!side_halo_dense(t + cfg.r_halo_in, t + cfg.r_halo_out)) return false;
        if (!side_halo_dense(t - cfg.r_halo_out, t - cfg.r_halo_in)) return false;
        return true;
    }
};

// Amortized-O(1) variant for ascending node sweeps: every interval boundary
// moves monotonically with t, so plain advancing cursors replace the binary
// searches.
class SweepScanner1D {
public:
    SweepScanner1D(const std::vector<double>& xs, const SelectionConfig& cfg)
        : xs_(xs), cfg_(cfg) {}

    // t must be nondecreasing across calls.
    bool preseed(double t) {
        double rho = cfg_.density_radius;
        // Shells empty: count in the closed interval is zero.
        if (ge(ls_lo_, t - cfg_.r_shell_out) != gt(ls_hi_, t - cfg_.r_halo_out)) return false;
        if (ge(rs_lo_, t + cfg_.r_halo_out) != gt(rs_hi_, t + cfg_.r_shell_out)) return false;
        // Halo sides densely filled.
        std::size_t lf = ge(lh_lo_, t - cfg_.r_halo_out - rho);
        std::size_t ll = gt(lh_hi_, t - cfg_.r_halo_in + rho);
        if (!covers_interval(xs_, lf, ll, rho, t - cfg_.r_halo_out + rho, t - cfg_.r_halo_in - rho))
            return false;
        std::size_t rf = ge(rh_lo_, t + cfg_.r_halo_in - rho);
        std::size_t rl = gt(rh_hi_, t + cfg_.r_halo_out + rho);
        if (!covers_interval(xs_, rf, rl, rho, t + cfg_.r_halo_in + rho, t + cfg_.r_halo_out - rho))
            return false;
        return true;
    }

private:
    // First index with xs >= v (cursor advances monotonically).
    std::size_t ge(std::size_t& cur, double v) {
        while (cur < xs_.size() && xs_[cur] < v) ++cur;
        return cur;
    }
    // First index with xs > v.
    std::size_t gt(std::size_t& cur, double v) {
        while (cur < xs_.size() && xs_[cur] <= v) ++cur;
        return cur;
    }

    const std::vector<double>& xs_;
    const SelectionConfig& cfg_;
    std::size_t ls_lo_ = 0, ls_hi_ = 0, rs_lo_ = 0, rs_hi_ = 0;
    std::size_t lh_lo_ = 0, lh_hi_ = 0, rh_lo_ = 0, rh_hi_ = 0;
};

// General-dimension pre-seed test (conservative grid density check).
bool preseed_general(const std::vector<Point>& pts, const Point& x, const SelectionConfig& cfg) {
    // (a) empty outer shell
    for (const auto& p : pts) {
        double d = dist(p, x);
        if (d >= cfg.r_halo_out && d <= cfg.r_shell_out) return false;
    }
    // (b) every density-radius ball inside the halo holds a point; centers on
    // a grid anchored at x.
    const int dim = static_cast<int>(x.size());
    const double rho = cfg.density_radius;
    const double lo_r = cfg.r_halo_in + rho;
    const double hi_r = cfg.r_halo_out - rho;
    const double delta = std::min(cfg.scan_resolution, rho / 2.0);
    const long long half = static_cast<long long>(std::floor(hi_r / delta));

    std::vector<long long> idx(dim, -half);
    while (true) {
        double sq = 0.0;
        Point a(dim);
        for (int c = 0; c < dim; ++c) {
            double off = static_cast<double>(idx[c]) * delta;
            a[c] = x[c] + off;
            sq += off * off;
        }
        double r = std::sqrt(sq);
        if (r >= lo_r && r <= hi_r) {
            bool hit = false;
            for (const auto& p : pts)
                if (dist(p, a) < rho) {
                    hit = true;
                    break;
                }
            if (!hit) return false;
        }
        int axis = 0;
        while (axis < dim) {
            if (++idx[axis] <= half) break;
            idx[axis] = -half;
            ++axis;
        }
        if (axis == dim) break;
    }
    return true;
}

bool margin_ok(const Box& window, const Point& x, double shell_out) {
    for (std::size_t c = 0; c < x.size(); ++c)
        if (x[c] - shell_out < window.lo[c] || x[c] + shell_out > window.hi[c]) return false;
    return true;
}

Point snap_seed(const Point& sum_q, long long n) {
    // sum_q holds exact q-lattice integer sums per coordinate (stored as
    // doubles; magnitudes stay far below 2^53).
    const long long factor = static_cast<long long>(kSeedLattice / kCoordLattice);  // 2^16
    Point seed(sum_q.size());
    for (std::size_t c = 0; c < sum_q.size(); ++c) {
        long long s = static_cast<long long>(sum_q[c]);
        seed[c] = static_cast<double>(round_div(s, n * factor)) * kSeedLattice;
    }
    return seed;
}

}  // namespace

bool is_preseed(const PointSet& mu, const Point& x, const SelectionConfig& cfg) {
    cfg.validate();
    if (!margin_ok(mu.window, x, cfg.r_shell_out))
        throw OutsideMargin("is_preseed: shell ball leaves the window");
    if (mu.dim == 1) {
        std::vector<double> xs;
        xs.reserve(mu.points.size());
        for (const auto& p : mu.points) xs.push_back(p[0]);
        std::sort(xs.begin(), xs.end());
        return Scanner1D{xs, cfg}.preseed(x[0]);
    }
    return preseed_general(mu.points, x, cfg);
}

std::vector<Point> find_seeds(const PointSet& mu, const SelectionConfig& cfg) {
    cfg.validate();
    const int d = mu.dim;
    const double res = cfg.scan_resolution;

    // Lattice ranges (window-anchored) inside the margin interior.
    std::vector<long long> i_lo(d), i_hi(d);
    for (int c = 0; c < d; ++c) {
        i_lo[c] = static_cast<long long>(std::ceil(cfg.r_shell_out / res));
        i_hi[c] = static_cast<long long>(std::floor((mu.window.hi[c] - mu.window.lo[c] - cfg.r_shell_out) / res));
        if (i_hi[c] < i_lo[c]) return {};
    }

    std::vector<Point> nodes;  // pre-seed nodes
    if (d == 1) {
        std::vector<double> xs;
        xs.reserve(mu.points.size());
        for (const auto& p : mu.points) xs.push_back(p[0]);
        std::sort(xs.begin(), xs.end());
        SweepScanner1D sc(xs, cfg);
        const double lo = mu.window.lo[0];
        const std::size_t n = xs.size();
        std::size_t cur_l = 0, cur_r = 0;
        long long i = i_lo[0];
        while (i <= i_hi[0]) {
            double t = lo + static_cast<double>(i) * res;
            // A point p inside a shell excludes every node while it stays
            // there; jump past the excluded stretch.
            while (cur_l < n && xs[cur_l] < t - cfg.r_shell_out) ++cur_l;
            if (cur_l < n && xs[cur_l] <= t - cfg.r_halo_out) {
                double next_t = xs[cur_l] + cfg.r_shell_out;
                long long ni = static_cast<long long>(std::floor((next_t - lo) / res)) + 1;
                i = std::max(i + 1, ni);
                continue;
            }
            while (cur_r < n && xs[cur_r] < t + cfg.r_halo_out) ++cur_r;
            if (cur_r < n && xs[cur_r] <= t + cfg.r_shell_out) {
                double next_t = xs[cur_r] - cfg.r_halo_out;
                long long ni = static_cast<long long>(std::floor((next_t - lo) / res)) + 1;
                i = std::max(i + 1, ni);
                continue;
            }
            if (sc.preseed(t)) nodes.push_back(Point{t});
            ++i;
        }
    } else {
        std::vector<long long> idx = i_lo;
        while (true) {
            Point t(d);
            for (int c = 0; c < d; ++c) t[c] = mu.window.lo[c] + static_cast<double>(idx[c]) * res;
            if (preseed_general(mu.points, t, cfg)) nodes.push_back(t);
            int axis = 0;
            while (axis < d) {
                if (++idx[axis] <= i_hi[axis]) break;
                idx[axis] = i_lo[axis];
                ++axis;
            }
            if (axis == d) break;
        }
    }
    if (nodes.empty()) return {};

    // Cluster nodes by the distance-2 relation.
    std::vector<int> cluster(nodes.size(), -1);
    int nclusters = 0;
    if (d == 1) {
        // Nodes are in ascending order; chains break at gaps > 2.
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            if (k == 0 || nodes[k][0] - nodes[k - 1][0] > 2.0) ++nclusters;
            cluster[k] = nclusters - 1;
        }
    } else {
        // Union-find over all pairs; node counts stay small in d >= 2 tests.
        std::vector<int> parent(nodes.size());
        for (std::size_t k = 0; k < parent.size(); ++k) parent[k] = static_cast<int>(k);
        std::function<int(int)> find = [&](int a) {
            while (parent[a] != a) a = parent[a] = parent[parent[a]];
            return a;
        };
        for (std::size_t a = 0; a < nodes.size(); ++a)
            for (std::size_t b = a + 1; b < nodes.size(); ++b)
                if (dist(nodes[a], nodes[b]) <= 2.0) parent[find(static_cast<int>(b))] = find(static_cast<int>(a));
        std::vector<int> label(nodes.size(), -1);
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            int root = find(static_cast<int>(k));
            if (label[root] < 0) label[root] = nclusters++;
            cluster[k] = label[root];
        }
    }

    // Exact integer centroids on the coordinate lattice, snapped to the seed
    // lattice so they transform exactly under representable isometries.
    std::vector<Point> sums(nclusters, Point(d, 0.0));
    std::vector<long long> counts(nclusters, 0);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        int cl = cluster[k];
        for (int c = 0; c < d; ++c)
            sums[cl][c] += static_cast<double>(std::llround(nodes[k][c] / kCoordLattice));
        counts[cl] += 1;
    }
    std::vector<Point> seeds;
    seeds.reserve(nclusters);
    for (int cl = 0; cl < nclusters; ++cl) seeds.push_back(snap_seed(sums[cl], counts[cl]));

    std::sort(seeds.begin(), seeds.end(), radial_less);
    return seeds;
}

SelectionOutcome select_globes(const PointSet& mu, const SelectionConfig& cfg) {
    SelectionOutcome out;
    out.seeds = find_seeds(mu, cfg);
    out.empty_selection = out.seeds.empty();

    out.globes.reserve(out.seeds.size());
    for (const auto& s : out.seeds) out.globes.push_back(Globe{s, cfg.R, 0, SpecialClass::none, {}});

    // Each point belongs to at most one globe; assign to the nearest covering
    // center so the partition stays well defined even if two globes touch.
    if (mu.dim == 1) {
        std::vector<std::pair<double, std::size_t>> by_coord;
        by_coord.reserve(out.globes.size());
        for (std::size_t g = 0; g < out.globes.size(); ++g)
            by_coord.emplace_back(out.globes[g].center[0], g);
        std::sort(by_coord.begin(), by_coord.end());
        for (std::size_t i = 0; i < mu.points.size(); ++i) {
            double x = mu.points[i][0];
            auto it = std::lower_bound(by_coord.begin(), by_coord.end(),
                                       std::make_pair(x, std::size_t{0}));
            int best = -1;
            double best_d = 0.0;
            for (int step = -1; step <= 0; ++step) {
                auto cand = it + step;
                if (cand < by_coord.begin() || cand >= by_coord.end()) continue;
                double dd = std::abs(x - cand->first);
                if (dd <= cfg.R && (best < 0 || dd < best_d)) {
                    best = static_cast<int>(cand->second);
                    best_d = dd;
                }
            }
            if (best >= 0)
                out.globes[best].point_indices.push_back(i);
            else
                out.ether_indices.push_back(i);
        }
    } else {
        for (std::size_t i = 0; i < mu.points.size(); ++i) {
            int best = -1;
            double best_d = 0.0;
            for (std::size_t g = 0; g < out.globes.size(); ++g) {
                double dd = dist(mu.points[i], out.globes[g].center);
                if (dd <= cfg.R && (best < 0 || dd < best_d)) {
                    best = static_cast<int>(g);
                    best_d = dd;
                }
            }
            if (best >= 0)
                out.globes[best].point_indices.push_back(i);
            else
                out.ether_indices.push_back(i);
        }
    }

    for (auto& g : out.globes) {
        g.count = g.point_indices.size();
        g.special = g.count == 1   ? SpecialClass::one
                    : g.count == 2 ? SpecialClass::two
                                   : SpecialClass::none;
    }
    return out;
}

}  // namespace splitfactor
