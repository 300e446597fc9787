#include "splitfactor/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace splitfactor {

PointSet sample_poisson(const Box& window, double intensity, UnitValue seed) {
    PointSet ps = poisson_process_from_uniform(window, intensity, seed);

    // Resample duplicates from the continuing stream.  The stream cursor of
    // poisson_process_from_uniform consumed indices 1 .. count*d.
    std::set<Point> seen;
    std::uint64_t next = 1 + ps.points.size() * static_cast<std::uint64_t>(ps.dim);
    for (auto& p : ps.points) {
        int guard = 0;
        while (!seen.insert(p).second) {
            for (int c = 0; c < ps.dim; ++c) {
                double v = reproduce(seed, next++);
                double coord = window.lo[c] + v * (window.hi[c] - window.lo[c]);
                coord = snap_to_lattice(coord);
                p[c] = std::min(std::max(coord, window.lo[c]), window.hi[c]);
            }
            if (++guard > 1000)
                throw RejectionCapExceeded("sample_poisson: duplicate resampling stuck");
        }
    }
    return ps;
}

PointSet restrict_to(const PointSet& mu, const Region& region) {
    PointSet out;
    out.dim = mu.dim;
    out.window = mu.window;
    for (const auto& p : mu.points)
        if (region.contains(p)) out.points.push_back(p);
    return out;
}

std::vector<std::size_t> radial_order(const std::vector<Point>& items) {
    std::vector<std::size_t> idx(items.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return radial_less(items[a], items[b]);
    });
    return idx;
}

namespace {

CentricEnumeration centric_impl(const PointSet& mu, const Point& center,
                                const std::function<bool(const Point&)>& inside) {
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < mu.points.size(); ++i)
        if (inside(mu.points[i])) in.push_back(i);
    if (in.empty()) throw EmptyRegion("centric_enumeration: no point in region");

    std::vector<double> d(mu.points.size(), 0.0);
    for (std::size_t i : in) d[i] = dist(mu.points[i], center);

    CentricEnumeration ce;
    ce.order = in;
    std::stable_sort(ce.order.begin(), ce.order.end(), [&](std::size_t a, std::size_t b) {
        if (d[a] != d[b]) return d[a] < d[b];
        return lex_less(mu.points[a], mu.points[b]);
    });
    for (std::size_t k = 1; k < ce.order.size(); ++k)
        if (std::abs(d[ce.order[k]] - d[ce.order[k - 1]]) <= 1e-12) ce.degenerate_tie = true;
    return ce;
}

}  // namespace

CentricEnumeration centric_enumeration(const PointSet& mu, const Ball& region) {
    return centric_impl(mu, region.center, [&](const Point& p) { return region.contains(p); });
}

CentricEnumeration centric_enumeration(const PointSet& mu, const Box& region) {
    return centric_impl(mu, region.midpoint(), [&](const Point& p) { return region.contains(p); });
}

// ---------------------------------------------------------------------------
// File formats

void write_points_csv(std::ostream& os, const PointSet& ps) {
    for (int c = 0; c < ps.dim; ++c) os << (c ? "," : "") << "x" << (c + 1);
    os << "\n";
    char buf[64];
    for (const auto& p : ps.points) {
        for (int c = 0; c < ps.dim; ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", p[c]);
            os << (c ? "," : "") << buf;
        }
        os << "\n";
    }
}

std::string window_json(const PointSet& ps) {
    nlohmann::json j;
    j["dim"] = ps.dim;
    j["window_lo"] = ps.window.lo;
    j["window_hi"] = ps.window.hi;
    return j.dump();
}

PointSet read_points_csv(std::istream& is, const std::string& sidecar_json) {
    auto j = nlohmann::json::parse(sidecar_json);
    PointSet ps;
    ps.dim = j.at("dim").get<int>();
    ps.window.lo = j.at("window_lo").get<std::vector<double>>();
    ps.window.hi = j.at("window_hi").get<std::vector<double>>();

    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_points_csv: missing header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        Point p;
        p.reserve(ps.dim);
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) p.push_back(std::strtod(cell.c_str(), nullptr));
        if (static_cast<int>(p.size()) != ps.dim)
            throw std::runtime_error("read_points_csv: row arity mismatch");
        ps.points.push_back(std::move(p));
    }
    return ps;
}

static std::string sidecar_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

void save_point_set(const PointSet& ps, const std::string& csv_path) {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("save_point_set: cannot open " + csv_path);
    write_points_csv(csv, ps);
    std::ofstream meta(sidecar_path(csv_path));
    meta << window_json(ps) << "\n";
}

PointSet load_point_set(const std::string& csv_path) {
    std::ifstream csv(csv_path);
    if (!csv) throw std::runtime_error("load_point_set: cannot open " + csv_path);
    std::ifstream meta(sidecar_path(csv_path));
    if (!meta) throw std::runtime_error("load_point_set: missing sidecar for " + csv_path);
    std::stringstream ss;
    ss << meta.rdbuf();
    return read_points_csv(csv, ss.str());
}

}  // namespace splitfactor
