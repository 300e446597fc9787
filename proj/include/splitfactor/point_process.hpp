#ifndef SPLITFACTOR_POINT_PROCESS_HPP
#define SPLITFACTOR_POINT_PROCESS_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "splitfactor/point_set.hpp"
#include "splitfactor/unit_random.hpp"

namespace splitfactor {

// Homogeneous Poisson sample on a box window; deterministic in the seed.
// Duplicate points (possible on the coordinate lattice) are resampled from
// the continuing stream so the output is always simple.
PointSet sample_poisson(const Box& window, double intensity, UnitValue seed);

// mu restricted to a region; window metadata preserved.
PointSet restrict_to(const PointSet& mu, const Region& region);

// Permutation sorting items by the radial ordering (norm, then lexicographic).
std::vector<std::size_t> radial_order(const std::vector<Point>& items);

struct CentricEnumeration {
    std::vector<std::size_t> order;  // indices into mu.points, inside the region
    bool degenerate_tie = false;     // two distances within 1e-12
};

// Orders the points of mu inside the region by distance to the region's
// center of mass (ball center / box midpoint).  Ties within 1e-12 set the
// flag and break lexicographically.  Throws EmptyRegion when no point lies
// in the region.
CentricEnumeration centric_enumeration(const PointSet& mu, const Ball& region);
CentricEnumeration centric_enumeration(const PointSet& mu, const Box& region);

// CSV (header x1,..,xd; 17 significant digits) plus sidecar JSON
// {dim, window_lo, window_hi}.  Round-trips bit-exactly.
void write_points_csv(std::ostream& os, const PointSet& ps);
std::string window_json(const PointSet& ps);
PointSet read_points_csv(std::istream& is, const std::string& sidecar_json);

void save_point_set(const PointSet& ps, const std::string& csv_path);
PointSet load_point_set(const std::string& csv_path);

}  // namespace splitfactor

#endif
