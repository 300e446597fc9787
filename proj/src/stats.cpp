#include "splitfactor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "splitfactor/unit_random.hpp"

namespace splitfactor {

namespace {

// Series expansion of the lower regularized incomplete gamma (x < a + 1).
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for the upper regularized incomplete gamma (x >= a + 1).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

GofResult chi2_poisson_gof(const std::vector<std::uint64_t>& counts, double mean, double level) {
    if (counts.empty()) throw std::invalid_argument("chi2_poisson_gof: no counts");
    const double n = static_cast<double>(counts.size());

    std::uint64_t kmax = 0;
    for (auto c : counts) kmax = std::max(kmax, c);
    std::uint64_t top = std::max<std::uint64_t>(kmax, poisson_truncation(mean));
    std::vector<double> pmf = poisson_pmf(mean, top);

    std::vector<double> observed(top + 2, 0.0);
    for (auto c : counts) observed[std::min<std::uint64_t>(c, top + 1)] += 1.0;

    std::vector<double> expected(top + 2, 0.0);
    double cum = 0.0;
    for (std::uint64_t k = 0; k <= top; ++k) {
        expected[k] = n * pmf[k];
        cum += pmf[k];
    }
    expected[top + 1] = n * std::max(0.0, 1.0 - cum);

    // Merge adjacent cells until each merged bin expects at least 5.
    std::vector<double> obs_bins, exp_bins;
    double o = 0.0, e = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        o += observed[k];
        e += expected[k];
        if (e >= 5.0) {
            obs_bins.push_back(o);
            exp_bins.push_back(e);
            o = e = 0.0;
        }
    }
    if (e > 0.0 || o > 0.0) {
        if (exp_bins.empty()) {
            obs_bins.push_back(o);
            exp_bins.push_back(e);
        } else {
            obs_bins.back() += o;
            exp_bins.back() += e;
        }
    }

    GofResult res;
    res.df = static_cast<int>(obs_bins.size()) - 1;
    for (std::size_t b = 0; b < obs_bins.size(); ++b) {
        double diff = obs_bins[b] - exp_bins[b];
        res.statistic += diff * diff / exp_bins[b];
    }
    if (res.df < 1) {
        res.p_value = 1.0;
        res.pass = true;
        return res;
    }
    res.p_value = chi_square_sf(res.statistic, res.df);
    res.pass = res.p_value >= level;
    return res;
}

GofResult chi2_uniform_cells(const std::vector<std::uint64_t>& cell_counts, double level) {
    if (cell_counts.size() < 2) throw std::invalid_argument("chi2_uniform_cells: need >= 2 cells");
    double total = 0.0;
    for (auto c : cell_counts) total += static_cast<double>(c);
    double expected = total / static_cast<double>(cell_counts.size());

    GofResult res;
    res.df = static_cast<int>(cell_counts.size()) - 1;
    for (auto c : cell_counts) {
        double diff = static_cast<double>(c) - expected;
        res.statistic += diff * diff / expected;
    }
    res.p_value = chi_square_sf(res.statistic, res.df);
    res.pass = res.p_value >= level;
    return res;
}

KsResult ks_uniform_test(std::vector<double> values, double level) {
    if (values.empty()) throw std::invalid_argument("ks_uniform_test: no values");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());

    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        double fi = static_cast<double>(i);
        d = std::max(d, (fi + 1.0) / n - values[i]);
        d = std::max(d, values[i] - fi / n);
    }

    KsResult res;
    res.statistic = d;
    res.threshold = std::sqrt(-0.5 * std::log(level / 2.0)) / std::sqrt(n);
    double t = d * std::sqrt(n);
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * t * t);
        p += term;
        if (std::abs(term) < 1e-12) break;
    }
    res.p_value = std::min(1.0, std::max(0.0, p));
    res.pass = res.statistic <= res.threshold;
    return res;
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("pearson_correlation: bad input");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx, dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace splitfactor
