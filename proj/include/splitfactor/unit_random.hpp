#ifndef SPLITFACTOR_UNIT_RANDOM_HPP
#define SPLITFACTOR_UNIT_RANDOM_HPP

#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "splitfactor/geometry.hpp"
#include "splitfactor/point_set.hpp"

namespace splitfactor {

// A value in [0,1].  All derived randomness in the library flows through
// deterministic functions of these.
using UnitValue = double;

struct OutsideBall : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadSize : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sampled coordinates are snapped to this dyadic lattice so that applying an
// exactly representable isometry to a point is itself exact.  2^-26 is far
// below every statistical resolution used by the test suites.
inline constexpr double kCoordLattice = 1.0 / 67108864.0;  // 2^-26

inline double snap_to_lattice(double x) {
    return static_cast<double>(std::llround(x / kCoordLattice)) * kCoordLattice;
}

// ---------------------------------------------------------------------------
// Bit expansion of a UnitValue.
//
// The first 64 fractional bits come from the machine representation
// (fixed-point view of the double).  Positions >= 64 are defined by a
// splitmix64 keystream keyed on those 64 bits, so that every stream index
// below yields a full-precision output.  The expansion of 0 is all zeros.

std::uint64_t unit_bits(UnitValue u);
int expansion_bit(std::uint64_t bits, std::uint64_t position);

// Diagonal pairing function (i,k) -> (i+k)(i+k+1)/2 + i.  Injective, so
// distinct streams read disjoint bit positions.
inline std::uint64_t pairing(std::uint64_t i, std::uint64_t k) {
    std::uint64_t s = i + k;
    return s * (s + 1) / 2 + i;
}

// Reproduction function g_i: assembles a UnitValue from the bits of u at
// positions pairing(i, 0), pairing(i, 1), ...
UnitValue reproduce(UnitValue u, std::uint64_t i);

// Addition modulo one: the unique z in [0,1) with u1 + u2 - z an integer.
inline UnitValue add_mod1(UnitValue u1, UnitValue u2) {
    double z = u1 + u2;
    while (z >= 1.0) z -= 1.0;
    if (z < 0.0) z = 0.0;
    return z;
}

// ---------------------------------------------------------------------------
// Poisson counts.

inline std::uint64_t poisson_truncation(double mean) {
    return static_cast<std::uint64_t>(std::ceil(mean + 12.0 * std::sqrt(mean) + 30.0));
}

// Poisson pmf on 0..n, built by a mode-anchored recurrence so large means do
// not underflow near the bulk.
std::vector<double> poisson_pmf(double mean, std::uint64_t n);

// Cached inverse transform for repeated draws at a fixed mean.
class PoissonTable {
public:
    explicit PoissonTable(double mean);
    std::uint64_t sample(UnitValue u) const;
    double mean() const { return mean_; }
    const std::vector<double>& cdf() const { return cdf_; }

private:
    double mean_ = 0.0;
    std::vector<double> cdf_;
};

// Smallest n with CDF_Poisson(mean)(n) >= u; u beyond the truncated CDF
// returns the truncation bound.
std::uint64_t poisson_inverse_cdf(double mean, UnitValue u);

// ---------------------------------------------------------------------------
// Position-to-uniform map on closed balls: f(x) = (|x - c| / R)^d.
UnitValue ball_position_to_uniform(const Ball& ball, const Point& x);

// Binomial coefficient, saturating at 2^62 (beyond UnitValue resolution).
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

// The subset of {1,..,i} of size j whose lexicographic rank is
// floor(u * C(i,j)), clamped to C(i,j)-1.
std::set<std::uint64_t> unrank_subset(std::uint64_t i, std::uint64_t j, UnitValue u);

// ---------------------------------------------------------------------------
// Uniform-to-Poisson-process coupling on balls and boxes.
//
// The count is drawn from stream 0 of u; locations consume streams 1,2,...
// in fixed order (d entries per accepted box point, d per ball proposal).
// Output is deterministic in (region, intensity, u).

struct RejectionCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PointSet poisson_process_from_uniform(const Box& region, double intensity, UnitValue u);
PointSet poisson_process_from_uniform(const Ball& region, double intensity, UnitValue u);

}  // namespace splitfactor

#endif
