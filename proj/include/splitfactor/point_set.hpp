#ifndef SPLITFACTOR_POINT_SET_HPP
#define SPLITFACTOR_POINT_SET_HPP

#include <algorithm>
#include <vector>

#include "splitfactor/geometry.hpp"

namespace splitfactor {

// Finite simple point configuration together with its sampling window.
struct PointSet {
    int dim = 0;
    Box window;
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }

    bool is_simple() const {
        auto sorted = points;
        std::sort(sorted.begin(), sorted.end(), lex_less);
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i - 1] == sorted[i]) return false;
        return true;
    }

    bool inside_window() const {
        for (const auto& p : points)
            if (!window.contains(p)) return false;
        return true;
    }
};

// Exact equality as configurations: same window, same multiset of points.
inline bool same_configuration(const PointSet& a, const PointSet& b) {
    if (a.dim != b.dim || a.points.size() != b.points.size()) return false;
    auto pa = a.points, pb = b.points;
    std::sort(pa.begin(), pa.end(), lex_less);
    std::sort(pb.begin(), pb.end(), lex_less);
    return pa == pb;
}

}  // namespace splitfactor

#endif
