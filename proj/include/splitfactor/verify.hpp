#ifndef SPLITFACTOR_VERIFY_HPP
#define SPLITFACTOR_VERIFY_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "splitfactor/factor.hpp"
#include "splitfactor/stats.hpp"

namespace splitfactor {

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    double p_value = std::nan("");  // NaN = absent
    bool pass = false;
    std::uint64_t samples = 0;
    UnitValue seed = 0.0;
    std::string detail;

    std::string to_line() const;
    std::string to_json() const;
};

std::string reports_to_json(const std::vector<TestReport>& reports);

// Chi-square of counts against Poisson(mean), bins merged to expected >= 5.
TestReport gof_poisson_counts(const std::vector<std::uint64_t>& counts, double mean, double level);

// One-sample KS against U[0,1] with the asymptotic threshold.
TestReport ks_uniform(const std::vector<UnitValue>& values, double level);

// Transforms points and window; the rotation must be a signed permutation so
// the window stays a box.
PointSet transform_point_set(const PointSet& mu, const Isometry& iso);

// Runs `map` on mu and on each transformed copy; statistic is the largest
// matched-point distance of map(theta mu) against theta(map(mu)), infinity on
// a cardinality mismatch.
TestReport equivariance_report(const std::function<PointSet(const PointSet&)>& map,
                               const PointSet& mu, const std::vector<Isometry>& isometries,
                               double tol);

struct FinitaryEstimate {
    std::vector<double> radii;         // finite per-sample determination radii
    double mean = 0.0;                 // over finite radii
    std::uint64_t flagged_infinite = 0;  // window-exhausted samples
    std::vector<double> bounds;        // constructive cube-counter bounds (inf allowed)
};

// Smallest integer radius n <= n_max such that 20 independent resamplings of
// mu outside B(0,n) leave the splitting output inside B(0,1) unchanged,
// together with the constructive cube-counter upper bound.  The window must
// be centered at the origin.
FinitaryEstimate finitary_radius(const PointSet& mu, const FactorConfig& cfg,
                                 UnitValue resample_seed, double n_max);

// Constructive bound alone (infinity when the special-cube counters do not
// complete inside the window).
double finitary_constructive_bound(const PointSet& mu, const FactorConfig& cfg);

}  // namespace splitfactor

#endif
