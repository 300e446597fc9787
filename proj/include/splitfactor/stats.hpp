#ifndef SPLITFACTOR_STATS_HPP
#define SPLITFACTOR_STATS_HPP

#include <cstdint>
#include <vector>

namespace splitfactor {

// Upper regularized incomplete gamma Q(a, x); Q(df/2, x/2) is the chi-square
// survival function.
double gamma_q(double a, double x);

inline double chi_square_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

struct GofResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int df = 0;
    bool pass = true;
};

// Pearson chi-square of integer counts against Poisson(mean); adjacent bins
// merged until every expected count is at least 5.
GofResult chi2_poisson_gof(const std::vector<std::uint64_t>& counts, double mean, double level);

// Chi-square of observed cell counts against equal expected occupancy.
GofResult chi2_uniform_cells(const std::vector<std::uint64_t>& cell_counts, double level);

// One-sample Kolmogorov-Smirnov against U[0,1], asymptotic threshold and
// p-value.
struct KsResult {
    double statistic = 0.0;
    double threshold = 0.0;
    double p_value = 1.0;
    bool pass = true;
};
KsResult ks_uniform_test(std::vector<double> values, double level);

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace splitfactor

#endif
