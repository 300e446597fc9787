#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "splitfactor/assignment.hpp"
#include "splitfactor/stats.hpp"
#include "splitfactor/verify.hpp"

using namespace splitfactor;

namespace {

PointSet make_1d(std::vector<double> xs, double lo = -50.0, double hi = 50.0) {
    PointSet mu;
    mu.dim = 1;
    mu.window = Box{{lo}, {hi}};
    for (double x : xs) mu.points.push_back({x});
    return mu;
}

Globe make_globe(Point center, double radius, std::vector<std::size_t> idx) {
    Globe g;
    g.center = std::move(center);
    g.radius = radius;
    g.point_indices = std::move(idx);
    g.count = g.point_indices.size();
    g.special = g.count == 1 ? SpecialClass::one : g.count == 2 ? SpecialClass::two : SpecialClass::none;
    return g;
}

// Brute-force tag oracle: mutually closest pair, then the member nearer to
// the rest of the halo.
Point tag_oracle(const std::vector<Point>& halo) {
    double best = 1e300;
    std::size_t ba = 0, bb = 1;
    for (std::size_t a = 0; a < halo.size(); ++a)
        for (std::size_t b = a + 1; b < halo.size(); ++b)
            if (dist(halo[a], halo[b]) < best) {
                best = dist(halo[a], halo[b]);
                ba = a;
                bb = b;
            }
    auto outside = [&](std::size_t m) {
        double nd = 1e300;
        for (std::size_t k = 0; k < halo.size(); ++k)
            if (k != ba && k != bb) nd = std::min(nd, dist(halo[m], halo[k]));
        return nd;
    };
    return outside(ba) < outside(bb) ? halo[ba] : halo[bb];
}

}  // namespace

TEST_CASE("compute_tag against the brute-force oracle") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    PointSet mu = make_1d({-3.05, -3.25, -3.49, 3.3});
    Globe g = make_globe({0.0}, cfg.R, {});

    Point tag = compute_tag(mu, g, cfg);
    CHECK(tag == Point{-3.25});
    CHECK(tag == tag_oracle({{-3.05}, {-3.25}, {-3.49}, {3.3}}));

    for (int trial = 0; trial < 100; ++trial) {
        UnitValue seed = reproduce(0.404040, trial + 1);
        std::vector<Point> halo;
        PointSet rnd = make_1d({});
        for (int k = 0; k < 5; ++k) {
            double sign = reproduce(seed, 2 * k) < 0.5 ? -1.0 : 1.0;
            double r = cfg.r_halo_in + 0.5 * reproduce(seed, 2 * k + 1);
            rnd.points.push_back({sign * r});
            halo.push_back({sign * r});
        }
        CHECK(compute_tag(rnd, g, cfg) == tag_oracle(halo));
    }
}

TEST_CASE("compute_tag fallbacks") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    Globe g = make_globe({0.0}, cfg.R, {});

    PointSet symmetric = make_1d({-3.4, -3.2, 3.2, 3.4});
    CHECK(compute_tag(symmetric, g, cfg) == g.center);  // exact distance tie

    PointSet thin = make_1d({3.2, 3.4});
    CHECK_THROWS_AS(compute_tag(thin, g, cfg), TooFewHaloPoints);
}

TEST_CASE("tag equivariance under exact isometries") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    PointSet mu = make_1d({-3.05, -3.25, -3.49, 3.3});
    Globe g = make_globe({0.0}, cfg.R, {});
    Point base = compute_tag(mu, g, cfg);

    Isometry iso = Isometry::identity(1);
    iso.rotation(0, 0) = -1.0;
    iso.translation = {9.0};
    PointSet moved = transform_point_set(mu, iso);
    Globe gm = make_globe(iso.apply(g.center), cfg.R, {});
    CHECK(compute_tag(moved, gm, cfg) == iso.apply(base));
}

TEST_CASE("compute_dtag") {
    SelectionConfig cfg1 = SelectionConfig::desk_selection(1);
    PointSet mu = make_1d({-3.05, -3.25, -3.49, 3.3});
    Globe g1 = make_globe({0.0}, cfg1.R, {});
    Mat d1 = compute_dtag(mu, g1, cfg1);
    CHECK(d1.d == 1);
    CHECK(d1(0, 0) == -3.25);

    // Two-dimensional example: halo {(2,0), (2.1,0), (0,2)}.
    SelectionConfig cfg2;
    cfg2.dim = 2;
    cfg2.R = 1.0;
    cfg2.r_halo_in = 2.0;
    cfg2.r_halo_out = 3.0;
    cfg2.r_shell_out = 3.5;
    cfg2.density_radius = 0.5;
    PointSet mu2;
    mu2.dim = 2;
    mu2.window = Box{{-50.0, -50.0}, {50.0, 50.0}};
    mu2.points = {{2.0, 0.0}, {2.1, 0.0}, {0.0, 2.0}};
    Globe g2 = make_globe({0.0, 0.0}, cfg2.R, {});
    Mat d2 = compute_dtag(mu2, g2, cfg2);
    CHECK(d2.col(0) == Point{2.0, 0.0});
    CHECK(d2.col(1) == Point{2.1, 0.0});
}

TEST_CASE("encode cases") {
    PointSet mu = make_1d({0.0, 0.1, -0.3, 5.0});
    Globe none = make_globe({0.0}, 0.5, {});
    CHECK(encode(mu, none) == 0.0);

    Globe one = make_globe({0.0}, 0.5, {0});  // the point sits at the center
    CHECK(encode(mu, one) == 0.0);

    Globe two = make_globe({0.0}, 0.5, {1, 2});
    UnitValue expect = add_mod1(ball_position_to_uniform(two.ball(), mu.points[1]),
                                ball_position_to_uniform(two.ball(), mu.points[2]));
    CHECK(encode(mu, two) == expect);
}

TEST_CASE("partners and ranks on a constructed outcome") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    // Points: index 0 in G0 (one-special), 1..2 in G1 (two-special),
    // 3..5 ether.  G2 is a non-special globe between G0 and G1.
    PointSet mu = make_1d({0.05, 20.0, 20.1, 2.0, 4.0, -30.0});
    SelectionOutcome outcome;
    outcome.globes.push_back(make_globe({0.0}, cfg.R, {0}));
    outcome.globes.push_back(make_globe({20.0}, cfg.R, {1, 2}));
    outcome.globes.push_back(make_globe({5.0}, cfg.R, {}));
    for (const auto& g : outcome.globes) outcome.seeds.push_back(g.center);
    outcome.ether_indices = {3, 4, 5};

    Assignment assignment(mu, outcome, cfg);
    CHECK(assignment.has_specials());

    // The unique non-special globe: one-partner is the one-special globe and
    // no other globe competes for rank, so its one-rank is 0.
    PartnerRank g2 = assignment.partner_rank(AssignmentKey::for_globe(2));
    CHECK(g2.one_partner == 0);
    CHECK(g2.two_partner == 1);
    CHECK(g2.one_rank == 0);

    // Ether point nearest to the one-special globe gets one-rank 1.
    PartnerRank e3 = assignment.partner_rank(AssignmentKey::for_point(3));
    CHECK(e3.one_partner == 0);
    CHECK(e3.one_rank == 1);
    PartnerRank e4 = assignment.partner_rank(AssignmentKey::for_point(4));
    CHECK(e4.one_rank == 3);

    // The lone two-special globe has no two-partner candidate besides itself,
    // so its own key falls back to the degenerate defaults.
    PartnerRank g1 = assignment.partner_rank(AssignmentKey::for_globe(1));
    CHECK(g1.degenerate);
    CHECK(g1.one_rank == 0);
    PartnerRank e5 = assignment.partner_rank(AssignmentKey::for_point(5));
    CHECK(e5.one_rank == 5);
}

TEST_CASE("no specials means the degenerate defaults") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    PointSet mu = make_1d({2.0, 4.0});
    SelectionOutcome outcome;
    outcome.globes.push_back(make_globe({0.0}, cfg.R, {}));
    outcome.seeds.push_back(outcome.globes[0].center);
    outcome.ether_indices = {0, 1};

    Assignment assignment(mu, outcome, cfg);
    CHECK(!assignment.has_specials());
    PartnerRank pr = assignment.partner_rank(AssignmentKey::for_point(0));
    CHECK(pr.degenerate);
    CHECK(pr.one_rank == 0);
    CHECK(assignment.value(AssignmentKey::for_point(0)) == 0.0);
    CHECK(assignment.value(AssignmentKey::for_globe(0)) == 0.0);  // zero expansion
    CHECK(!assignment.determined(AssignmentKey::for_point(0)));
}

TEST_CASE("assignment invariance under exact isometries") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    Box window{{-150.0}, {150.0}};
    PointSet mu;
    bool found = false;
    for (int k = 0; k < 200 && !found; ++k) {
        mu = sample_poisson(window, 6.0, reproduce(0.7771111, k));
        SelectionOutcome outcome = select_globes(mu, cfg);
        Assignment a(mu, outcome, cfg);
        if (!a.has_specials()) continue;
        found = true;

        Isometry iso = Isometry::identity(1);
        iso.rotation(0, 0) = -1.0;
        iso.translation = {21.0};
        PointSet moved = transform_point_set(mu, iso);
        SelectionOutcome moved_outcome = select_globes(moved, cfg);
        Assignment b(moved, moved_outcome, cfg);
        REQUIRE(moved_outcome.globes.size() == outcome.globes.size());

        // Match globes through the isometry.
        for (std::size_t g = 0; g < outcome.globes.size(); ++g) {
            Point image = iso.apply(outcome.globes[g].center);
            int match = -1;
            for (std::size_t h = 0; h < moved_outcome.globes.size(); ++h)
                if (moved_outcome.globes[h].center == image) match = static_cast<int>(h);
            REQUIRE(match >= 0);
            CHECK(b.value(AssignmentKey::for_globe(match)) ==
                  a.value(AssignmentKey::for_globe(g)));
        }
        for (std::size_t i : outcome.ether_indices) {
            Point image = iso.apply(mu.points[i]);
            int match = -1;
            for (std::size_t j = 0; j < moved.points.size(); ++j)
                if (moved.points[j] == image) match = static_cast<int>(j);
            REQUIRE(match >= 0);
            CHECK(b.value(AssignmentKey::for_point(match)) ==
                  a.value(AssignmentKey::for_point(i)));
        }
    }
    CHECK(found);
}

TEST_CASE("assignment values look uniform") {
    SelectionConfig cfg = SelectionConfig::desk_factor(1);
    Box window{{-300.0}, {300.0}};
    std::vector<std::vector<double>> slots(3);
    for (int k = 0; k < 3000; ++k) {
        PointSet mu = sample_poisson(window, 6.0, reproduce(0.5055151, k));
        SelectionOutcome outcome = select_globes(mu, cfg);
        Assignment a(mu, outcome, cfg);
        if (!a.has_specials()) continue;

        // First three keys in radial order over globes and ether points.
        struct K {
            double r;
            AssignmentKey key;
        };
        std::vector<K> keys;
        for (std::size_t g = 0; g < outcome.globes.size(); ++g)
            keys.push_back({norm(outcome.globes[g].center), AssignmentKey::for_globe(g)});
        for (std::size_t i : outcome.ether_indices)
            keys.push_back({norm(mu.points[i]), AssignmentKey::for_point(i)});
        std::sort(keys.begin(), keys.end(), [](const K& x, const K& y) { return x.r < y.r; });
        if (keys.size() < 3) continue;
        bool all_det = true;
        for (int s = 0; s < 3; ++s) all_det = all_det && a.determined(keys[s].key);
        if (!all_det) continue;
        for (int s = 0; s < 3; ++s) slots[s].push_back(a.value(keys[s].key));
    }
    REQUIRE(slots[0].size() > 400);
    for (int s = 0; s < 3; ++s) CHECK(ks_uniform_test(slots[s], 0.01).pass);
    CHECK(std::abs(pearson_correlation(slots[0], slots[1])) < 0.05);
}

TEST_CASE("fixing isometry") {
    SelectionConfig cfg2;
    cfg2.dim = 2;
    cfg2.R = 1.0;
    cfg2.r_halo_in = 2.0;
    cfg2.r_halo_out = 3.0;
    cfg2.r_shell_out = 3.5;
    cfg2.density_radius = 0.5;

    PointSet mu2;
    mu2.dim = 2;
    mu2.window = Box{{-50.0, -50.0}, {50.0, 50.0}};
    mu2.points = {{0.0, 2.0}, {0.1, 2.1}, {2.5, 0.0}};
    Globe g = make_globe({0.0, 0.0}, cfg2.R, {});

    auto sigma = fixing_isometry(mu2, g, cfg2);
    REQUIRE(sigma.has_value());
    CHECK(norm(sigma->apply(g.center)) < 1e-12);

    Mat dtag = compute_dtag(mu2, g, cfg2);
    // The image of the d-tag columns is upper triangular with positive diagonal.
    Point c0 = sigma->apply(dtag.col(0));
    Point c1 = sigma->apply(dtag.col(1));
    CHECK(c0[0] > 0.0);
    CHECK(std::abs(c0[1]) < 1e-9);
    CHECK(c1[1] > 0.0);

    // Degenerate d-tag (repeated columns) has no fixing isometry.
    PointSet collinear;
    collinear.dim = 2;
    collinear.window = mu2.window;
    collinear.points = {{2.0, 0.0}, {2.5, 0.0}, {2.9, 0.0}};
    CHECK(!fixing_isometry(collinear, g, cfg2).has_value());
}

TEST_CASE("tags, partners and ranks ignore globe interiors") {
    SelectionConfig cfg = SelectionConfig::desk_selection(1);
    Box window{{-150.0}, {150.0}};
    for (int k = 0; k < 200; ++k) {
        PointSet mu = sample_poisson(window, 6.0, reproduce(0.919191, k));
        SelectionOutcome outcome = select_globes(mu, cfg);
        Assignment a(mu, outcome, cfg);
        if (outcome.globes.size() < 2 || !a.has_specials()) continue;

        // Swap-resample every globe interior (points move inside the globe).
        PointSet hybrid;
        hybrid.dim = 1;
        hybrid.window = window;
        for (std::size_t i : outcome.ether_indices) hybrid.points.push_back(mu.points[i]);
        UnitValue s = reproduce(0.727272, k);
        std::uint64_t cursor = 0;
        for (const auto& g : outcome.globes) {
            std::uint64_t n = poisson_inverse_cdf(6.0 * 2.0 * cfg.R, reproduce(s, cursor++));
            for (std::uint64_t j = 0; j < n; ++j) {
                double off = (2.0 * reproduce(s, cursor++) - 1.0) * cfg.R;
                hybrid.points.push_back({snap_to_lattice(g.center[0] + off)});
            }
        }
        SelectionOutcome after_sel = select_globes(hybrid, cfg);
        if (after_sel.seeds != outcome.seeds) continue;  // rare desk-scale halo interference
        Assignment b(hybrid, after_sel, cfg);
        // Tags, d-tags and fixing isometries read the halo only.
        for (std::size_t g = 0; g < outcome.globes.size(); ++g)
            CHECK(b.globe_tag_record(g).tag == a.globe_tag_record(g).tag);
        // Partners and ranks additionally read the special pattern; compare
        // when the resampling preserved it.
        bool classes_same = true;
        for (std::size_t g = 0; g < outcome.globes.size(); ++g)
            classes_same = classes_same && after_sel.globes[g].special == outcome.globes[g].special;
        if (classes_same && b.has_specials()) {
            for (std::size_t g = 0; g < outcome.globes.size(); ++g) {
                PartnerRank pa = a.partner_rank(AssignmentKey::for_globe(g));
                PartnerRank pb = b.partner_rank(AssignmentKey::for_globe(g));
                CHECK(pa.one_partner == pb.one_partner);
                CHECK(pa.two_partner == pb.two_partner);
                CHECK(pa.one_rank == pb.one_rank);
                CHECK(pa.two_rank == pb.two_rank);
            }
        }
        return;  // one full check is enough
    }
}
