#ifndef SPLITFACTOR_COUPLING_HPP
#define SPLITFACTOR_COUPLING_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "splitfactor/unit_random.hpp"

namespace splitfactor {

struct NegativeMass : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 3x3 perturbation stencil with support [s,s+2] x [t,t+2]:
//
//        t   t+1  t+2
//   s    0   -1    1
//   s+1  1    0   -1
//   s+2 -1    1    0
//
// Every row, column and anti-diagonal sums to zero, so adding multiples of a
// stencil preserves all three marginal families.
struct Perturbation {
    std::uint64_t s = 0;
    std::uint64_t t = 0;

    // Entry of E^{s,t} at (i,j); zero outside the support.
    static int entry(std::uint64_t s, std::uint64_t t, std::uint64_t i, std::uint64_t j) {
        if (i < s || i > s + 2 || j < t || j > t + 2) return 0;
        static constexpr int cell[3][3] = {{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}};
        return cell[i - s][j - t];
    }

    int at(std::uint64_t i, std::uint64_t j) const { return entry(s, t, i, j); }
};

// Truncated joint mass function of the two split Poisson counts.  Rows carry
// the mean alpha*lambda marginal, columns the (1-alpha)*lambda marginal, and
// anti-diagonals the Poisson(lambda) law of the sum.
//
// The stencil corrections live in [0,3]^2, so the matrix is stored as the
// two marginal pmf vectors, per-row renormalization factors, and the
// corrected 4x4 block; everything else is the independent product.  Memory
// stays O(truncation) even for window-scale means.
class CouplingMatrix {
public:
    double alpha = 0.0;
    double lambda = 0.0;  // the mean of the sum
    std::uint64_t truncation = 0;

    double at(std::uint64_t i, std::uint64_t j) const {
        if (i <= 3 && j <= 3) return block_[i][j];
        double v = row_pmf_[i] * col_pmf_[j];
        if (i <= 3) v *= row_factor_[i];
        return v;
    }

    // Max deviation of row / column / anti-diagonal sums from the target
    // Poisson masses; used by the invariant checks.
    double marginal_defect() const;

    friend CouplingMatrix build_coupling(double, double, std::uint64_t);

private:
    std::vector<double> row_pmf_;
    std::vector<double> col_pmf_;
    double block_[4][4] = {};
    double row_factor_[4] = {1.0, 1.0, 1.0, 1.0};
};

// Builds Q = P + P01*E00 - (-P01+P20)*E10 - (-P01+P20+P11)*E01 where
// P_{ij} is the independent product of the two Poisson marginals.
// Entries that are negative beyond rounding scale raise NegativeMass
// (the signal that lambda is below k(alpha)).
CouplingMatrix build_coupling(double alpha, double lambda, std::uint64_t truncation);

inline std::uint64_t default_truncation(double lambda) { return poisson_truncation(lambda); }

// True when the six assembly entries that can go negative are all
// non-negative at (alpha, lambda) within rounding scale.
bool coupling_feasible(double alpha, double lambda);

// Smallest lambda on the grid {0.1, 0.2, ..., 200} such that build_coupling
// succeeds for every grid value above it.  Throws NotFound when no grid
// value qualifies.
double min_lambda_nonneg(double alpha);

// F(n, u): inverse transform on the conditional law Q_{m, n-m} / pi^lambda_n.
std::uint64_t split_count(std::uint64_t n, UnitValue u, const CouplingMatrix& coupling);

// CSV with a header row/column of indices.
void write_coupling_csv(std::ostream& os, const CouplingMatrix& q);

}  // namespace splitfactor

#endif
