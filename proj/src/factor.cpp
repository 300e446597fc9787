#include "splitfactor/factor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace splitfactor {

double ball_volume(double radius, int dim) {
    return std::pow(M_PI, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0) * std::pow(radius, dim);
}

CouplingMatrix FactorConfig::make_globe_coupling() const {
    const double mean = globe_mean();
    try {
        return build_coupling(alpha_blue(), mean, default_truncation(mean));
    } catch (const NegativeMass&) {
        throw RegionTooSmall("globe volume below the operational feasibility threshold");
    }
}

void FactorConfig::validate() const {
    selection.validate();
    if (!(lambda > 0.0 && lambda_prime > 0.0))
        throw std::invalid_argument("FactorConfig: intensities must be positive");
    if (mode == FactorMode::split_factor) {
        if (!(lambda_prime < lambda))
            throw std::invalid_argument("FactorConfig: split mode needs lambda' < lambda");
        (void)make_globe_coupling();  // throws RegionTooSmall when infeasible
    }
}

namespace {

// Centric order of a set of point indices around a center.
std::vector<std::size_t> centric_order_indices(const PointSet& mu,
                                               const std::vector<std::size_t>& idx,
                                               const Point& center, bool& tie) {
    std::vector<std::size_t> order = idx;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double da = dist(mu.points[a], center), db = dist(mu.points[b], center);
        if (da != db) return da < db;
        return lex_less(mu.points[a], mu.points[b]);
    });
    for (std::size_t k = 1; k < order.size(); ++k) {
        double da = dist(mu.points[order[k - 1]], center);
        double db = dist(mu.points[order[k]], center);
        if (std::abs(da - db) <= 1e-12) tie = true;
    }
    return order;
}

// Blue index selection for one region's points: F from stream 1 of u,
// subset from stream 2.  Returns per-index redness; tie -> the zero case
// (red empty).
void gamma_color_indices(const PointSet& mu, const std::vector<std::size_t>& region_idx,
                         const Point& center, UnitValue u, const CouplingMatrix& coupling,
                         std::vector<bool>& red_out, bool& tie_flag) {
    red_out.assign(region_idx.size(), false);
    const std::uint64_t n = region_idx.size();
    if (n == 0) return;

    bool tie = false;
    std::vector<std::size_t> order = centric_order_indices(mu, region_idx, center, tie);
    if (tie) {
        tie_flag = true;
        return;  // zero case: everything blue
    }

    std::uint64_t j = split_count(n, reproduce(u, 1), coupling);
    std::set<std::uint64_t> blue_ranks = unrank_subset(n, j, reproduce(u, 2));

    // order[k] holds centric rank k+1.
    std::vector<bool> red_by_rank(n, true);
    for (std::uint64_t r : blue_ranks) red_by_rank[r - 1] = false;

    // Map back to the region_idx positions.
    for (std::uint64_t k = 0; k < n; ++k) {
        std::size_t pos = std::find(region_idx.begin(), region_idx.end(), order[k]) -
                          region_idx.begin();
        red_out[pos] = red_by_rank[k];
    }
}

template <typename RegionT>
SplitResult gamma_split_impl(const RegionT& region, const Point& center, const PointSet& mu,
                             UnitValue u, const CouplingMatrix& coupling) {
    std::vector<std::size_t> inside;
    for (std::size_t i = 0; i < mu.points.size(); ++i)
        if (region.contains(mu.points[i])) inside.push_back(i);

    SplitResult res;
    res.red.dim = res.blue.dim = mu.dim;
    res.red.window = res.blue.window = mu.window;
    res.provenance.assign(mu.points.size(), Provenance{});

    std::vector<bool> red;
    gamma_color_indices(mu, inside, center, u, coupling, red, res.degenerate_tie);
    for (std::size_t k = 0; k < inside.size(); ++k) {
        Provenance pv;
        pv.in_globe = true;
        pv.globe_index = 0;
        pv.red = red[k];
        res.provenance[inside[k]] = pv;
        (red[k] ? res.red : res.blue).points.push_back(mu.points[inside[k]]);
    }
    return res;
}

}  // namespace

SplitResult gamma_split(const Ball& region, const PointSet& mu, UnitValue u,
                        const CouplingMatrix& coupling) {
    return gamma_split_impl(region, region.center, mu, u, coupling);
}

SplitResult gamma_split(const Box& region, const PointSet& mu, UnitValue u,
                        const CouplingMatrix& coupling) {
    return gamma_split_impl(region, region.midpoint(), mu, u, coupling);
}

SplitResult standard_split(const PointSet& mu, UnitValue u, double lambda, double lambda_prime) {
    if (!(lambda_prime <= lambda))
        throw std::invalid_argument("standard_split: lambda' must not exceed lambda");
    const double ratio = lambda_prime / lambda;

    SplitResult res;
    res.red.dim = res.blue.dim = mu.dim;
    res.red.window = res.blue.window = mu.window;
    res.provenance.assign(mu.points.size(), Provenance{});

    std::vector<std::size_t> order = radial_order(mu.points);
    for (std::size_t k = 0; k < order.size(); ++k)
        res.provenance[order[k]].red = reproduce(u, k + 1) <= ratio;
    for (std::size_t i = 0; i < mu.points.size(); ++i)
        (res.provenance[i].red ? res.red : res.blue).points.push_back(mu.points[i]);
    return res;
}

SplitResult randomized_split(const PointSet& mu, UnitValue u, const FactorConfig& cfg) {
    cfg.validate();
    SelectionOutcome outcome = select_globes(mu, cfg.selection);
    CouplingMatrix coupling = cfg.make_globe_coupling();
    const double ratio = cfg.lambda_prime / cfg.lambda;

    SplitResult res;
    res.red.dim = res.blue.dim = mu.dim;
    res.red.window = res.blue.window = mu.window;
    res.provenance.assign(mu.points.size(), Provenance{});

    // Globes consume streams 1, 2, ... in radial order; the ether stream 0.
    for (std::size_t g = 0; g < outcome.globes.size(); ++g) {
        const Globe& globe = outcome.globes[g];
        std::vector<bool> red;
        gamma_color_indices(mu, globe.point_indices, globe.center, reproduce(u, g + 1), coupling,
                            red, res.degenerate_tie);
        for (std::size_t k = 0; k < globe.point_indices.size(); ++k) {
            Provenance pv;
            pv.in_globe = true;
            pv.globe_index = static_cast<int>(g);
            pv.red = red[k];
            res.provenance[globe.point_indices[k]] = pv;
        }
    }

    UnitValue ether_stream = reproduce(u, 0);
    std::vector<Point> ether_pts;
    ether_pts.reserve(outcome.ether_indices.size());
    for (std::size_t i : outcome.ether_indices) ether_pts.push_back(mu.points[i]);
    std::vector<std::size_t> order = radial_order(ether_pts);
    for (std::size_t k = 0; k < order.size(); ++k) {
        std::size_t idx = outcome.ether_indices[order[k]];
        res.provenance[idx].red = reproduce(ether_stream, k + 1) <= ratio;
    }

    for (std::size_t i = 0; i < mu.points.size(); ++i)
        (res.provenance[i].red ? res.red : res.blue).points.push_back(mu.points[i]);
    return res;
}

SplitResult splitting_factor(const PointSet& mu, const FactorConfig& cfg) {
    cfg.validate();
    SelectionOutcome outcome = select_globes(mu, cfg.selection);
    CouplingMatrix coupling = cfg.make_globe_coupling();
    Assignment assignment(mu, outcome, cfg.selection);
    const double ratio = cfg.lambda_prime / cfg.lambda;

    SplitResult res;
    res.red.dim = res.blue.dim = mu.dim;
    res.red.window = res.blue.window = mu.window;
    res.provenance.assign(mu.points.size(), Provenance{});
    res.no_specials = !assignment.has_specials();
    res.globe_determined.assign(outcome.globes.size(), false);

    for (std::size_t g = 0; g < outcome.globes.size(); ++g) {
        const Globe& globe = outcome.globes[g];
        AssignmentKey key = AssignmentKey::for_globe(g);
        bool det = assignment.determined(key);
        res.globe_determined[g] = det;
        if (!det) res.undetermined_key_count += 1;

        std::vector<bool> red;
        gamma_color_indices(mu, globe.point_indices, globe.center, assignment.value(key), coupling,
                            red, res.degenerate_tie);
        for (std::size_t k = 0; k < globe.point_indices.size(); ++k) {
            Provenance pv;
            pv.in_globe = true;
            pv.globe_index = static_cast<int>(g);
            pv.red = red[k];
            pv.determined = det;
            res.provenance[globe.point_indices[k]] = pv;
        }
    }

    for (std::size_t i : outcome.ether_indices) {
        AssignmentKey key = AssignmentKey::for_point(i);
        bool det = assignment.determined(key);
        if (!det) res.undetermined_key_count += 1;
        Provenance pv;
        pv.red = assignment.value(key) <= ratio;
        pv.determined = det;
        res.provenance[i] = pv;
    }

    for (std::size_t i = 0; i < mu.points.size(); ++i)
        (res.provenance[i].red ? res.red : res.blue).points.push_back(mu.points[i]);
    return res;
}

VoronoiIndex voronoi_cell_index(const Point& x, const std::vector<Point>& centers) {
    if (centers.empty()) throw std::invalid_argument("voronoi_cell_index: no centers");
    int best = 0;
    double bd = dist(x, centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        double d = dist(x, centers[c]);
        if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
        }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (static_cast<int>(c) == best) continue;
        if (std::abs(dist(x, centers[c]) - bd) <= 1e-12) return {best, true};
    }
    return {best, false};
}

namespace {

// Axis-aligned bounding box of the window image under sigma.
Box image_bounding_box(const Isometry& sigma, const Box& window) {
    const int d = window.dim();
    Box out;
    out.lo.assign(d, std::numeric_limits<double>::infinity());
    out.hi.assign(d, -std::numeric_limits<double>::infinity());
    const std::uint64_t corners = 1ull << d;
    for (std::uint64_t mask = 0; mask < corners; ++mask) {
        Point corner(d);
        for (int c = 0; c < d; ++c) corner[c] = (mask >> c) & 1 ? window.hi[c] : window.lo[c];
        Point img = sigma.apply(corner);
        for (int c = 0; c < d; ++c) {
            out.lo[c] = std::min(out.lo[c], img[c]);
            out.hi[c] = std::max(out.hi[c], img[c]);
        }
    }
    return out;
}

}  // namespace

HomomorphismResult homomorphism_factor(const PointSet& mu, const FactorConfig& cfg) {
    cfg.validate();
    SelectionOutcome outcome = select_globes(mu, cfg.selection);
    if (outcome.globes.empty()) throw NoGlobes("homomorphism_factor: no globe in the window");
    Assignment assignment(mu, outcome, cfg.selection);

    const int d = mu.dim;
    const std::vector<Point>& centers = outcome.seeds;

    HomomorphismResult res;
    res.output.dim = d;
    res.output.window = mu.window;
    res.cell_determined.assign(outcome.globes.size(), false);

    // One-dimensional cells have exact interval geometry (midpoints of
    // consecutive centers, clipped to the window); higher dimensions use
    // membership tests only.
    std::vector<Box> cells;
    if (d == 1) {
        std::vector<std::size_t> by_coord(centers.size());
        for (std::size_t i = 0; i < centers.size(); ++i) by_coord[i] = i;
        std::sort(by_coord.begin(), by_coord.end(),
                  [&](std::size_t a, std::size_t b) { return centers[a][0] < centers[b][0]; });
        cells.assign(centers.size(), Box{});
        for (std::size_t k = 0; k < by_coord.size(); ++k) {
            double lo = k == 0 ? mu.window.lo[0]
                               : 0.5 * (centers[by_coord[k - 1]][0] + centers[by_coord[k]][0]);
            double hi = k + 1 == by_coord.size()
                            ? mu.window.hi[0]
                            : 0.5 * (centers[by_coord[k]][0] + centers[by_coord[k + 1]][0]);
            cells[by_coord[k]] = Box{{lo}, {hi}};
        }
        res.cells_1d = cells;
    }

    for (std::size_t g = 0; g < outcome.globes.size(); ++g) {
        AssignmentKey key = AssignmentKey::for_globe(g);
        bool det = assignment.determined(key);

        Isometry sigma;
        if (cfg.mode == FactorMode::homomorphism) {
            const auto& fixing = assignment.globe_tag_record(g).fixing;
            if (!fixing) {
                res.skipped_singular_cells += 1;  // the construction's zero case
                continue;
            }
            sigma = *fixing;
        } else {
            // Translation mode: anchor at the clipped cell's centroid.
            Point cv;
            if (d == 1) {
                cv = cells[g].midpoint();
            } else {
                Ball search{outcome.globes[g].center, 0.75 * (mu.window.hi[0] - mu.window.lo[0]),
                            true};
                cv = grid_centroid(
                    [&](const Point& p) {
                        if (!mu.window.contains(p)) return false;
                        VoronoiIndex vi = voronoi_cell_index(p, centers);
                        return vi.index == static_cast<int>(g) && !vi.unclaimed;
                    },
                    search, cfg.selection.scan_resolution * 8.0);
            }
            sigma = Isometry::translate(scale(cv, -1.0));
        }
        res.cell_determined[g] = det;

        Box sample_box;
        if (d == 1) {
            double a = sigma.apply(Point{cells[g].lo[0]})[0];
            double b = sigma.apply(Point{cells[g].hi[0]})[0];
            sample_box = Box{{std::min(a, b)}, {std::max(a, b)}};
        } else {
            sample_box = image_bounding_box(sigma, mu.window);
        }
        if (!(sample_box.volume() > 0.0)) continue;

        PointSet fresh = poisson_process_from_uniform(sample_box, cfg.lambda_prime,
                                                      assignment.value(key));
        Isometry inv = sigma.inverse();
        for (const auto& z : fresh.points) {
            Point y = inv.apply(z);
            for (int c = 0; c < d; ++c) y[c] = snap_to_lattice(y[c]);
            if (!mu.window.contains(y)) continue;
            if (d == 1) {
                // Interval membership with the same boundary-tie rule as the
                // general cell-index test.
                double lo = cells[g].lo[0], hi = cells[g].hi[0];
                if (y[0] < lo || y[0] > hi) continue;
                bool lo_is_mid = lo > mu.window.lo[0];
                bool hi_is_mid = hi < mu.window.hi[0];
                if ((lo_is_mid && std::abs(y[0] - lo) <= 5e-13) ||
                    (hi_is_mid && std::abs(y[0] - hi) <= 5e-13))
                    continue;  // unclaimed boundary
            } else {
                VoronoiIndex vi = voronoi_cell_index(y, centers);
                if (vi.unclaimed || vi.index != static_cast<int>(g)) continue;
            }
            res.output.points.push_back(std::move(y));
        }
    }
    return res;
}

}  // namespace splitfactor
