#include "splitfactor/unit_random.hpp"

#include <algorithm>
#include <cmath>

namespace splitfactor {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t unit_bits(UnitValue u) {
    if (!(u > 0.0)) return 0;
    if (u >= 1.0) return ~0ull;
    // Fixed-point view of the first 64 fractional bits.  The product is exact
    // (scaling by a power of two); the cast truncates sub-integer bits.
    double p = u * 18446744073709551616.0;  // 2^64
    if (p >= 18446744073709551615.0) return ~0ull;
    return static_cast<std::uint64_t>(p);
}

int expansion_bit(std::uint64_t bits, std::uint64_t position) {
    if (bits == 0) return 0;       // the expansion of 0 is all zeros
    if (bits == ~0ull) return 1;   // the expansion of 1^- is all ones
    // A double carries 52 significant fractional bits here; deeper positions
    // come from a keystream on the fixed-point word so that every stream
    // index yields a full-precision value.
    if (position < 52) return static_cast<int>((bits >> (63 - position)) & 1ull);
    std::uint64_t off = position - 52;
    std::uint64_t word = mix64(bits ^ ((off >> 6) + 1) * kGolden);
    return static_cast<int>((word >> (63 - (off & 63))) & 1ull);
}

UnitValue reproduce(UnitValue u, std::uint64_t i) {
    std::uint64_t bits = unit_bits(u);
    if (bits == 0) return 0.0;
    std::uint64_t out = 0;
    for (std::uint64_t k = 0; k < 52; ++k) {
        out = (out << 1) | static_cast<std::uint64_t>(expansion_bit(bits, pairing(i, k)));
    }
    return static_cast<double>(out) * 0x1p-52;
}

std::vector<double> poisson_pmf(double mean, std::uint64_t n) {
    std::vector<double> p(n + 1, 0.0);
    std::uint64_t mode = static_cast<std::uint64_t>(std::floor(mean));
    if (mode > n) mode = n;
    double log_pm = static_cast<double>(mode) * std::log(mean) - mean -
                    std::lgamma(static_cast<double>(mode) + 1.0);
    p[mode] = std::exp(log_pm);
    for (std::uint64_t k = mode; k > 0; --k) p[k - 1] = p[k] * static_cast<double>(k) / mean;
    for (std::uint64_t k = mode; k < n; ++k) p[k + 1] = p[k] * mean / static_cast<double>(k + 1);
    return p;
}

PoissonTable::PoissonTable(double mean) : mean_(mean) {
    if (!(mean > 0.0)) throw std::invalid_argument("PoissonTable: mean must be positive");
    std::uint64_t n = poisson_truncation(mean);
    std::vector<double> pmf = poisson_pmf(mean, n);
    cdf_.resize(pmf.size());
    double run = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        run += pmf[k];
        cdf_[k] = run;
    }
}

std::uint64_t PoissonTable::sample(UnitValue u) const {
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) return cdf_.size() - 1;  // truncation bound
    return static_cast<std::uint64_t>(it - cdf_.begin());
}

std::uint64_t poisson_inverse_cdf(double mean, UnitValue u) {
    return PoissonTable(mean).sample(u);
}

UnitValue ball_position_to_uniform(const Ball& ball, const Point& x) {
    const double d = dist(x, ball.center);
    if (d > ball.radius + 1e-12)
        throw OutsideBall("ball_position_to_uniform: point outside the closed ball");
    double ratio = std::min(1.0, d / ball.radius);
    double v = 1.0;
    for (std::size_t k = 0; k < ball.center.size(); ++k) v *= ratio;
    return v;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    constexpr std::uint64_t cap = 1ull << 62;
    unsigned __int128 res = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        res = res * (n - k + i) / i;
        if (res > cap) return cap;
    }
    return static_cast<std::uint64_t>(res);
}

std::set<std::uint64_t> unrank_subset(std::uint64_t i, std::uint64_t j, UnitValue u) {
    if (j > i) throw BadSize("unrank_subset: subset size exceeds ground set");
    std::set<std::uint64_t> out;
    if (j == 0) return out;

    std::uint64_t total = binomial(i, j);
    std::uint64_t rank = static_cast<std::uint64_t>(u * static_cast<double>(total));
    if (rank >= total) rank = total - 1;

    // Lexicographic unranking over subsets of {1,..,i}.
    std::uint64_t e = 1;
    std::uint64_t remaining = j;
    while (remaining > 0) {
        std::uint64_t with_e = binomial(i - e, remaining - 1);
        if (rank < with_e) {
            out.insert(e);
            --remaining;
        } else {
            rank -= with_e;
        }
        ++e;
    }
    return out;
}

namespace {

struct StreamCursor {
    UnitValue source;
    std::uint64_t next = 1;
    UnitValue draw() { return reproduce(source, next++); }
};

Point draw_box_point(StreamCursor& cur, const Box& box) {
    const int d = box.dim();
    Point x(d);
    for (int c = 0; c < d; ++c) {
        double v = cur.draw();
        double coord = box.lo[c] + v * (box.hi[c] - box.lo[c]);
        coord = snap_to_lattice(coord);
        x[c] = std::min(std::max(coord, box.lo[c]), box.hi[c]);
    }
    return x;
}

}  // namespace

PointSet poisson_process_from_uniform(const Box& region, double intensity, UnitValue u) {
    const double vol = region.volume();
    if (!(vol > 0.0) || !(intensity > 0.0))
        throw std::invalid_argument("poisson_process_from_uniform: need positive intensity*volume");

    PoissonTable table(intensity * vol);
    std::uint64_t count = table.sample(reproduce(u, 0));

    StreamCursor cur{u};
    PointSet ps;
    ps.dim = region.dim();
    ps.window = region;
    ps.points.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) ps.points.push_back(draw_box_point(cur, region));
    return ps;
}

PointSet poisson_process_from_uniform(const Ball& region, double intensity, UnitValue u) {
    const int d = static_cast<int>(region.center.size());
    Box bbox;
    bbox.lo.resize(d);
    bbox.hi.resize(d);
    for (int c = 0; c < d; ++c) {
        bbox.lo[c] = region.center[c] - region.radius;
        bbox.hi[c] = region.center[c] + region.radius;
    }

    // Volume of the d-ball for the count; locations by rejection from the box.
    // Unit-ball volume is pi^(d/2) / Gamma(d/2 + 1).
    const double unit = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    const double ball_vol = unit * std::pow(region.radius, d);

    PoissonTable table(intensity * ball_vol);
    std::uint64_t count = table.sample(reproduce(u, 0));

    StreamCursor cur{u};
    PointSet ps;
    ps.dim = d;
    ps.window = bbox;
    ps.points.reserve(count);

    std::uint64_t rejections = 0;
    while (ps.points.size() < count) {
        Point x = draw_box_point(cur, bbox);
        if (region.contains(x)) {
            ps.points.push_back(std::move(x));
        } else if (++rejections > 1000000)
            throw RejectionCapExceeded("poisson_process_from_uniform: rejection cap exceeded");
    }
    return ps;
}

}  // namespace splitfactor
