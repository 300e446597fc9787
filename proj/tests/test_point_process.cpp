#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "splitfactor/point_process.hpp"
#include "splitfactor/stats.hpp"

using namespace splitfactor;

TEST_CASE("sample_poisson determinism and simplicity") {
    Box window{{0.0, 0.0}, {10.0, 10.0}};
    PointSet a = sample_poisson(window, 1.0, 0.6931471805599453);
    PointSet b = sample_poisson(window, 1.0, 0.6931471805599453);
    CHECK(a.points == b.points);
    CHECK(a.is_simple());
    CHECK(a.inside_window());
}

TEST_CASE("sample_poisson mean count") {
    Box window{{0.0, 0.0}, {10.0, 10.0}};
    const std::uint64_t n = 10000;
    double total = 0.0;
    for (std::uint64_t k = 0; k < n; ++k)
        total += static_cast<double>(sample_poisson(window, 1.0, reproduce(0.30103, k)).size());
    double mean = total / static_cast<double>(n);
    double sigma = std::sqrt(100.0 / static_cast<double>(n));
    CHECK(std::abs(mean - 100.0) <= 3.0 * sigma);
}

TEST_CASE("counts over disjoint sub-boxes are uncorrelated") {
    Box window{{0.0}, {2.0}};
    const std::uint64_t n = 100000;
    std::vector<double> left, right;
    left.reserve(n);
    right.reserve(n);
    for (std::uint64_t k = 0; k < n; ++k) {
        PointSet ps = sample_poisson(window, 2.0, reproduce(0.4771212547, k));
        double l = 0.0, r = 0.0;
        for (const auto& p : ps.points) (p[0] < 1.0 ? l : r) += 1.0;
        left.push_back(l);
        right.push_back(r);
    }
    CHECK(std::abs(pearson_correlation(left, right)) < 0.02);
}

TEST_CASE("restrict_to basics and complement partition") {
    Box window{{-5.0, -5.0}, {5.0, 5.0}};
    PointSet mu;
    mu.dim = 2;
    mu.window = window;
    mu.points = {{0.0, 0.0}, {5.0, 5.0}, {1.0, -1.0}};

    Region full = region_of(window);
    CHECK(same_configuration(restrict_to(mu, full), mu));

    Region ball = region_of(Ball{{0.0, 0.0}, 1.0, true});
    PointSet inside = restrict_to(mu, ball);
    CHECK(inside.points == std::vector<Point>{{0.0, 0.0}});

    Region ball_c = region_of(Ball{{0.0, 0.0}, 1.0, true}, true);
    PointSet outside = restrict_to(mu, ball_c);
    CHECK(inside.size() + outside.size() == mu.size());

    PointSet sample = sample_poisson(window, 0.5, 0.111);
    for (Region r : {region_of(Shell{{0.5, 0.5}, 1.0, 3.0}), region_of(Box{{-1.0, -1.0}, {2.0, 2.0}}),
                     region_of(Ball{{2.0, 2.0}, 2.5, true})}) {
        Region rc = r;
        rc.complement = true;
        PointSet in = restrict_to(sample, r), out = restrict_to(sample, rc);
        PointSet merged = in;
        merged.points.insert(merged.points.end(), out.points.begin(), out.points.end());
        CHECK(same_configuration(merged, sample));
    }
}

TEST_CASE("radial_order") {
    std::vector<Point> pts = {{3.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    auto ord = radial_order(pts);
    CHECK(pts[ord[0]] == Point{1.0, 0.0});
    CHECK(pts[ord[1]] == Point{2.0, 0.0});
    CHECK(pts[ord[2]] == Point{3.0, 0.0});

    std::vector<Point> tie = {{1.0, 0.0}, {0.0, 1.0}};
    auto ord2 = radial_order(tie);
    CHECK(tie[ord2[0]] == Point{0.0, 1.0});  // equal norms, lexicographic tiebreak

    std::vector<Point> single = {{4.0, 4.0}};
    CHECK(radial_order(single) == std::vector<std::size_t>{0});
}

TEST_CASE("centric_enumeration") {
    PointSet mu;
    mu.dim = 2;
    mu.window = Box{{0.0, 0.0}, {1.0, 1.0}};
    mu.points = {{0.9, 0.5}, {0.5, 0.6}};
    CentricEnumeration ce = centric_enumeration(mu, mu.window);
    CHECK(mu.points[ce.order[0]] == Point{0.5, 0.6});
    CHECK(!ce.degenerate_tie);

    PointSet single;
    single.dim = 2;
    single.window = mu.window;
    single.points = {{0.25, 0.25}};
    CHECK(centric_enumeration(single, single.window).order == std::vector<std::size_t>{0});

    PointSet empty;
    empty.dim = 2;
    empty.window = mu.window;
    CHECK_THROWS_AS(centric_enumeration(empty, empty.window), EmptyRegion);
}

TEST_CASE("centric_enumeration is isometry-invariant") {
    Box window{{-8.0, -8.0}, {8.0, 8.0}};
    PointSet mu = sample_poisson(window, 0.2, 0.55);
    Ball region{{1.0, 0.5}, 3.0, true};
    CentricEnumeration base = centric_enumeration(mu, region);

    // Axis swap plus integer translation: exact arithmetic, same order.
    Isometry iso;
    iso.rotation = Mat(2);
    iso.rotation(0, 1) = 1.0;
    iso.rotation(1, 0) = 1.0;
    iso.translation = {3.0, -2.0};

    PointSet moved;
    moved.dim = 2;
    moved.window = Box{{-8.0 + 3.0, -8.0 - 2.0}, {8.0 + 3.0, 8.0 - 2.0}};
    for (const auto& p : mu.points) moved.points.push_back(iso.apply(p));
    CentricEnumeration after = centric_enumeration(moved, apply_isometry(iso, region));
    CHECK(after.order == base.order);
}

TEST_CASE("csv round trip is bit-exact") {
    Box window{{-1.0, -1.0}, {1.0, 1.0}};
    PointSet mu = sample_poisson(window, 10.0, 0.987654321);
    mu.points.push_back({1.0 / 3.0, -0.12345678901234567});

    std::stringstream csv;
    write_points_csv(csv, mu);
    PointSet back = read_points_csv(csv, window_json(mu));
    CHECK(back.dim == mu.dim);
    CHECK(back.window.lo == mu.window.lo);
    CHECK(back.window.hi == mu.window.hi);
    CHECK(back.points == mu.points);
}
