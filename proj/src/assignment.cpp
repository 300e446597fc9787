#include "splitfactor/assignment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace splitfactor {

namespace {
constexpr double kTieTol = 1e-12;
}

std::vector<std::size_t> halo_point_indices(const PointSet& mu, const Globe& globe,
                                            const SelectionConfig& cfg) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mu.points.size(); ++i) {
        double d = dist(mu.points[i], globe.center);
        if (d >= cfg.r_halo_in && d <= cfg.r_halo_out) idx.push_back(i);
    }
    return idx;
}

namespace {

struct TagSearch {
    Point tag;
    TagFallback fallback = TagFallback::none;
};

TagSearch tag_search(const PointSet& mu, const Globe& globe, const std::vector<std::size_t>& halo) {
    if (halo.size() < 3) return {globe.center, TagFallback::too_few_points};

    // Mutually closest pair: find the minimum first, then check uniqueness,
    // so the result cannot depend on iteration order.
    const std::size_t m = halo.size();
    std::vector<double> pd(m * m, 0.0);
    std::size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) {
            double d = dist(mu.points[halo[a]], mu.points[halo[b]]);
            pd[a * m + b] = d;
            if (d < best) {
                best = d;
                best_a = a;
                best_b = b;
            }
        }
    int at_min = 0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            if (std::abs(pd[a * m + b] - best) <= kTieTol) ++at_min;
    if (at_min != 1) return {globe.center, TagFallback::tie};

    // Member of the pair closest to the nearest halo point outside the pair.
    auto nearest_outside = [&](std::size_t member) {
        double nd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < halo.size(); ++k) {
            if (k == best_a || k == best_b) continue;
            nd = std::min(nd, dist(mu.points[halo[member]], mu.points[halo[k]]));
        }
        return nd;
    };
    double da = nearest_outside(best_a);
    double db = nearest_outside(best_b);
    if (std::abs(da - db) <= kTieTol) return {globe.center, TagFallback::tie};
    return {mu.points[halo[da < db ? best_a : best_b]], TagFallback::none};
}

Mat center_matrix(const Point& c) {
    const int d = static_cast<int>(c.size());
    Mat m(d);
    for (int j = 0; j < d; ++j) m.set_col(j, c);
    return m;
}

Mat dtag_search(const PointSet& mu, const Globe& globe, const std::vector<std::size_t>& halo,
                const TagSearch& ts) {
    const int d = static_cast<int>(globe.center.size());
    if (ts.fallback != TagFallback::none) return center_matrix(globe.center);
    if (halo.size() < static_cast<std::size_t>(d)) return center_matrix(globe.center);

    Mat m(d);
    std::vector<bool> used(halo.size(), false);
    Point prev = ts.tag;
    for (std::size_t k = 0; k < halo.size(); ++k)
        if (mu.points[halo[k]] == ts.tag) used[k] = true;
    m.set_col(0, ts.tag);

    for (int col = 1; col < d; ++col) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < halo.size(); ++k) {
            if (used[k]) continue;
            double dd = dist(mu.points[halo[k]], prev);
            if (dd < bd) {
                bd = dd;
                best = static_cast<int>(k);
            }
        }
        int at_min = 0;
        for (std::size_t k = 0; k < halo.size(); ++k)
            if (!used[k] && std::abs(dist(mu.points[halo[k]], prev) - bd) <= kTieTol) ++at_min;
        if (best < 0 || at_min != 1) return center_matrix(globe.center);
        used[best] = true;
        prev = mu.points[halo[best]];
        m.set_col(col, prev);
    }
    return m;
}

}  // namespace

Point compute_tag(const PointSet& mu, const Globe& globe, const SelectionConfig& cfg) {
    auto halo = halo_point_indices(mu, globe, cfg);
    if (halo.size() < 3) throw TooFewHaloPoints("compute_tag: halo has fewer than 3 points");
    return tag_search(mu, globe, halo).tag;
}

Mat compute_dtag(const PointSet& mu, const Globe& globe, const SelectionConfig& cfg) {
    auto halo = halo_point_indices(mu, globe, cfg);
    if (halo.size() < 3) throw TooFewHaloPoints("compute_dtag: halo has fewer than 3 points");
    return dtag_search(mu, globe, halo, tag_search(mu, globe, halo));
}

namespace {

TagRecord tag_record_from_halo(const PointSet& mu, const Globe& globe,
                               const std::vector<std::size_t>& halo);

}  // namespace

TagRecord tag_record(const PointSet& mu, const Globe& globe, const SelectionConfig& cfg) {
    return tag_record_from_halo(mu, globe, halo_point_indices(mu, globe, cfg));
}

namespace {

TagRecord tag_record_from_halo(const PointSet& mu, const Globe& globe,
                               const std::vector<std::size_t>& halo) {
    TagSearch ts = tag_search(mu, globe, halo);
    TagRecord rec;
    rec.tag = ts.tag;
    rec.fallback = ts.fallback;
    rec.dtag = dtag_search(mu, globe, halo, ts);

    const int d = static_cast<int>(globe.center.size());
    Mat a(d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) a(i, j) = rec.dtag(i, j) - globe.center[i];
    try {
        auto [q, delta] = qr_positive_diagonal(a, 1e-10);
        Isometry sigma;
        sigma.rotation = q.transpose();
        sigma.translation = scale(sigma.rotation.apply(globe.center), -1.0);
        rec.fixing = sigma;
        (void)delta;
    } catch (const SingularMatrix&) {
        rec.fixing = std::nullopt;
    }
    return rec;
}

}  // namespace

UnitValue encode(const PointSet& mu, const Globe& globe) {
    Ball b = globe.ball();
    if (globe.special == SpecialClass::one) {
        return ball_position_to_uniform(b, mu.points[globe.point_indices[0]]);
    }
    if (globe.special == SpecialClass::two) {
        const Point& p0 = mu.points[globe.point_indices[0]];
        const Point& p1 = mu.points[globe.point_indices[1]];
        const Point& first = radial_less(p0, p1) ? p0 : p1;
        const Point& second = radial_less(p0, p1) ? p1 : p0;
        return add_mod1(ball_position_to_uniform(b, first), ball_position_to_uniform(b, second));
    }
    return 0.0;
}

std::optional<Isometry> fixing_isometry(const PointSet& mu, const Globe& globe,
                                        const SelectionConfig& cfg) {
    return tag_record(mu, globe, cfg).fixing;
}

// ---------------------------------------------------------------------------
// Assignment

Assignment::Assignment(const PointSet& mu, const SelectionOutcome& outcome,
                       const SelectionConfig& cfg)
    : mu_(mu), outcome_(outcome), cfg_(cfg) {
    slack_ = cfg.r_shell_out + cfg.r_halo_out;

    // Halo lookups by sorted coordinate in one dimension.
    std::vector<std::pair<double, std::size_t>> by_coord;
    if (mu.dim == 1) {
        by_coord.reserve(mu.points.size());
        for (std::size_t i = 0; i < mu.points.size(); ++i) by_coord.emplace_back(mu.points[i][0], i);
        std::sort(by_coord.begin(), by_coord.end());
    }
    auto halo_fast = [&](const Globe& g) {
        if (mu.dim != 1) return halo_point_indices(mu, g, cfg);
        std::vector<std::size_t> idx;
        double c = g.center[0];
        for (int side = 0; side < 2; ++side) {
            double a = side ? c + cfg.r_halo_in : c - cfg.r_halo_out;
            double b = side ? c + cfg.r_halo_out : c - cfg.r_halo_in;
            auto first = std::lower_bound(by_coord.begin(), by_coord.end(),
                                          std::make_pair(a, std::size_t{0}));
            for (auto it = first; it != by_coord.end() && it->first <= b; ++it)
                idx.push_back(it->second);
        }
        return idx;
    };

    const std::size_t ng = outcome.globes.size();
    tags_.reserve(ng);
    encodings_.reserve(ng);
    for (std::size_t g = 0; g < ng; ++g) {
        tags_.push_back(tag_record_from_halo(mu, outcome.globes[g], halo_fast(outcome.globes[g])));
        encodings_.push_back(encode(mu, outcome.globes[g]));
        if (outcome.globes[g].special == SpecialClass::one) one_specials_.push_back(g);
        if (outcome.globes[g].special == SpecialClass::two) two_specials_.push_back(g);
    }

    is_ether_.assign(mu.points.size(), false);
    for (std::size_t i : outcome.ether_indices) is_ether_[i] = true;

    globe_keys_.resize(ng);
    point_keys_.resize(mu.points.size());
    for (std::size_t g = 0; g < ng; ++g) globe_keys_[g].tag = tags_[g].tag;
    for (std::size_t i = 0; i < mu.points.size(); ++i) point_keys_[i].tag = mu.points[i];

    const bool degenerate = one_specials_.empty() || two_specials_.empty();
    if (degenerate) {
        for (auto& kd : globe_keys_) kd.pr.degenerate = true;
        for (auto& kd : point_keys_) kd.pr.degenerate = true;
        return;
    }

    // Neighbouring globes can share a tag point (their halos overlap), so
    // tag distances tie exactly.  All distance comparisons therefore run
    // through an isometry-invariant cascade: partner tag, partner center,
    // then the key's own anchor (globe center / the point itself) against
    // both.  A tie surviving the cascade is flagged and falls back to the
    // radial order.
    auto cascade = [&](const Point& tag, const Point& anchor, std::size_t g) {
        return std::array<double, 4>{dist(tag, tags_[g].tag),
                                     dist(tag, outcome_.globes[g].center),
                                     dist(anchor, tags_[g].tag),
                                     dist(anchor, outcome_.globes[g].center)};
    };

    // A globe is never its own partner; with that exclusion the key nearest
    // to a special globe holds rank 0 (globes) or 1 (ether points).
    auto nearest_special = [&](const Point& tag, const Point& anchor,
                               const std::vector<std::size_t>& specials, int self, bool& tie) {
        int best = -1;
        std::array<double, 4> bd{};
        for (std::size_t g : specials) {
            if (static_cast<int>(g) == self) continue;
            std::array<double, 4> dd = cascade(tag, anchor, g);
            if (best < 0 || dd < bd) {
                bd = dd;
                best = static_cast<int>(g);
            } else if (dd == bd) {
                tie = true;  // radial order of the sorted globe list breaks it
            }
        }
        return best;
    };

    auto fill_partners = [&](KeyData& kd, const Point& anchor, int self) {
        bool tie = false;
        kd.pr.one_partner = nearest_special(kd.tag, anchor, one_specials_, self, tie);
        kd.pr.two_partner = nearest_special(kd.tag, anchor, two_specials_, self, tie);
        kd.pr.tie_flag = tie;
        if (kd.pr.one_partner < 0 || kd.pr.two_partner < 0) {
            kd.pr = PartnerRank{};
            kd.pr.degenerate = true;  // partner = self, ranks (0,0)
        }
    };
    for (std::size_t g = 0; g < globe_keys_.size(); ++g)
        fill_partners(globe_keys_[g], outcome_.globes[g].center, static_cast<int>(g));
    for (std::size_t i = 0; i < mu.points.size(); ++i)
        if (is_ether_[i]) fill_partners(point_keys_[i], mu.points[i], -1);

    // Ranks: within each partner, globes take the even numbers in order of
    // tag distance, ether points the odd numbers.  The same invariant
    // cascade orders exact ties; a full cascade tie flags the keys and uses
    // the radial order.
    struct Entry {
        std::array<double, 4> d;
        bool is_globe;
        std::size_t idx;
    };
    auto assign_ranks = [&](bool one_side) {
        std::vector<std::vector<Entry>> buckets(outcome_.globes.size());
        for (std::size_t g = 0; g < globe_keys_.size(); ++g) {
            int p = one_side ? globe_keys_[g].pr.one_partner : globe_keys_[g].pr.two_partner;
            if (p < 0) continue;
            buckets[p].push_back(
                {cascade(globe_keys_[g].tag, outcome_.globes[g].center, p), true, g});
        }
        for (std::size_t i = 0; i < point_keys_.size(); ++i) {
            if (!is_ether_[i]) continue;
            int p = one_side ? point_keys_[i].pr.one_partner : point_keys_[i].pr.two_partner;
            if (p < 0) continue;
            buckets[p].push_back({cascade(point_keys_[i].tag, mu_.points[i], p), false, i});
        }
        for (auto& bucket : buckets) {
            std::stable_sort(bucket.begin(), bucket.end(), [&](const Entry& a, const Entry& b) {
                if (a.d != b.d) return a.d < b.d;
                const Point& ta = a.is_globe ? globe_keys_[a.idx].tag : point_keys_[a.idx].tag;
                const Point& tb = b.is_globe ? globe_keys_[b.idx].tag : point_keys_[b.idx].tag;
                return radial_less(ta, tb);
            });
            for (std::size_t k = 1; k < bucket.size(); ++k)
                if (bucket[k].d == bucket[k - 1].d &&
                    bucket[k].is_globe == bucket[k - 1].is_globe) {
                    auto& pr = bucket[k].is_globe ? globe_keys_[bucket[k].idx].pr
                                                  : point_keys_[bucket[k].idx].pr;
                    pr.tie_flag = true;
                }
            std::uint64_t next_globe = 0, next_point = 0;
            for (const auto& e : bucket) {
                std::uint64_t r = e.is_globe ? 2 * next_globe++ : 2 * next_point++ + 1;
                auto& pr = e.is_globe ? globe_keys_[e.idx].pr : point_keys_[e.idx].pr;
                (one_side ? pr.one_rank : pr.two_rank) = r;
            }
        }
    };
    assign_ranks(true);
    assign_ranks(false);
}

const Assignment::KeyData& Assignment::data(const AssignmentKey& key) const {
    if (key.kind == AssignmentKey::Kind::globe) return globe_keys_.at(key.index);
    return point_keys_.at(key.index);
}

PartnerRank Assignment::partner_rank(const AssignmentKey& key) const { return data(key).pr; }

const Point& Assignment::key_tag(const AssignmentKey& key) const { return data(key).tag; }

UnitValue Assignment::value(const AssignmentKey& key) const {
    const PartnerRank pr = data(key).pr;
    if (pr.degenerate) {
        // Partner is the key itself with ranks (0,0); a non-globe key encodes
        // to zero, a globe to its own stream.
        UnitValue h0 = 0.0;
        if (key.kind == AssignmentKey::Kind::globe)
            h0 = reproduce(encodings_[key.index], 0);
        return add_mod1(h0, h0);
    }
    UnitValue a = reproduce(encodings_[pr.one_partner], pr.one_rank);
    UnitValue b = reproduce(encodings_[pr.two_partner], pr.two_rank);
    return add_mod1(a, b);
}

double Assignment::boundary_clearance(const Point& p) const {
    double c = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
        c = std::min(c, p[i] - mu_.window.lo[i]);
        c = std::min(c, mu_.window.hi[i] - p[i]);
    }
    return c;
}

bool Assignment::determined(const AssignmentKey& key) const {
    const KeyData& kd = data(key);
    if (kd.pr.degenerate) return false;
    for (int side = 0; side < 2; ++side) {
        int p = side == 0 ? kd.pr.one_partner : kd.pr.two_partner;
        double d = dist(kd.tag, tags_[p].tag);
        // A closer special globe could hide beyond the boundary, and unseen
        // keys closer to the partner could change the rank.
        if (d + slack_ >= boundary_clearance(kd.tag)) return false;
        if (d + slack_ >= boundary_clearance(tags_[p].tag)) return false;
    }
    return true;
}

}  // namespace splitfactor
