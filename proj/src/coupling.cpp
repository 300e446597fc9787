#include "splitfactor/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace splitfactor {

namespace {

// Rounding-scale tolerance for an entry at (i,j): relative to the local mass
// so that the test stays meaningful when the whole matrix lives at e^-lambda
// scale.
inline double entry_tolerance(double pij, double psum) {
    return 1e-12 * (pij + psum) + 1e-300;
}

struct SmallPmf {
    // pi^gamma_i for i = 0..3, closed form.
    double p[4];
    explicit SmallPmf(double gamma) {
        p[0] = std::exp(-gamma);
        p[1] = p[0] * gamma;
        p[2] = p[1] * gamma / 2.0;
        p[3] = p[2] * gamma / 3.0;
    }
};

}  // namespace

bool coupling_feasible(double alpha, double lambda) {
    const double x = alpha * lambda;
    const double y = (1.0 - alpha) * lambda;
    SmallPmf px(x), py(y);
    auto P = [&](int i, int j) { return px.p[i] * py.p[j]; };

    const double b = P(0, 1) - P(2, 0);
    const double c = P(0, 1) - P(2, 0) - P(1, 1);

    // The stencils touch [0,3]^2 only; every entry there other than these six
    // is a sum of products of non-negative masses.
    const double candidates[6] = {
        P(0, 3) + c,        // (0,3)
        P(1, 2) - P(2, 0),  // (1,2)
        P(1, 3) - c,        // (1,3)
        P(2, 2) - P(1, 1),  // (2,2)
        P(3, 0) - b,        // (3,0)
        P(3, 1) + b,        // (3,1)
    };
    const double scale = P(0, 0) + P(1, 1) + P(2, 2) + P(3, 3);
    for (double v : candidates)
        if (v < -entry_tolerance(scale, scale)) return false;
    return true;
}

CouplingMatrix build_coupling(double alpha, double lambda, std::uint64_t truncation) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (truncation < poisson_truncation(lambda))
        throw std::invalid_argument("truncation below lambda + 12*sqrt(lambda) + 30");
    if (truncation < 3) throw std::invalid_argument("truncation below the stencil support");

    const std::uint64_t n = truncation;
    CouplingMatrix q;
    q.alpha = alpha;
    q.lambda = lambda;
    q.truncation = n;
    q.row_pmf_ = poisson_pmf(alpha * lambda, n);
    q.col_pmf_ = poisson_pmf((1.0 - alpha) * lambda, n);
    std::vector<double> sum_pmf = poisson_pmf(lambda, 7);

    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j) q.block_[i][j] = q.row_pmf_[i] * q.col_pmf_[j];

    const double p01 = q.row_pmf_[0] * q.col_pmf_[1];
    const double p20 = q.row_pmf_[2] * q.col_pmf_[0];
    const double p11 = q.row_pmf_[1] * q.col_pmf_[1];
    const double coef_e00 = p01;
    const double coef_e10 = -(-p01 + p20);
    const double coef_e01 = -(-p01 + p20 + p11);

    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j) {
            q.block_[i][j] += coef_e00 * Perturbation::entry(0, 0, i, j);
            q.block_[i][j] += coef_e10 * Perturbation::entry(1, 0, i, j);
            q.block_[i][j] += coef_e01 * Perturbation::entry(0, 1, i, j);
        }

    // The three zeros of the construction cancel algebraically; snap the
    // rounding residue to an exact zero.
    const int zero_cells[3][2] = {{0, 1}, {1, 1}, {2, 0}};
    for (auto& cell : zero_cells) {
        double& v = q.block_[cell[0]][cell[1]];
        double tol = entry_tolerance(q.row_pmf_[cell[0]] * q.col_pmf_[cell[1]],
                                     sum_pmf[cell[0] + cell[1]]);
        if (std::abs(v) > tol)
            throw NegativeMass("build_coupling: zero cell did not cancel; lambda below k(alpha)");
        v = 0.0;
    }

    // Clamp rounding-scale negatives; abort on anything larger.
    bool row_touched[4] = {};
    for (int i = 0; i <= 3; ++i)
        for (int j = 0; j <= 3; ++j) {
            double& v = q.block_[i][j];
            if (v >= 0.0) continue;
            double tol = entry_tolerance(q.row_pmf_[i] * q.col_pmf_[j], sum_pmf[i + j]);
            if (v < -tol)
                throw NegativeMass("build_coupling: negative mass; lambda below k(alpha)");
            v = 0.0;
            row_touched[i] = true;
        }

    // Restore clamped rows to their Poisson marginal (relative correction is
    // at rounding scale by construction).
    double col_tail = 0.0;  // sum of the column pmf beyond the block
    for (std::uint64_t j = n + 1; j-- > 4;) col_tail += q.col_pmf_[j];
    for (int i = 0; i <= 3; ++i) {
        if (!row_touched[i]) continue;
        double s = q.block_[i][0] + q.block_[i][1] + q.block_[i][2] + q.block_[i][3] +
                   q.row_pmf_[i] * col_tail;
        if (s > 0.0 && q.row_pmf_[i] > 0.0) {
            double f = q.row_pmf_[i] / s;
            if (std::abs(f - 1.0) > 1e-9)
                throw NegativeMass("build_coupling: clamp correction beyond rounding scale");
            for (int j = 0; j <= 3; ++j) q.block_[i][j] *= f;
            q.row_factor_[i] = f;
        }
    }

    return q;
}

double CouplingMatrix::marginal_defect() const {
    const std::uint64_t n = truncation;
    std::vector<double> sum_pmf = poisson_pmf(lambda, n);

    double worst = 0.0;
    for (std::uint64_t i = 0; i <= n; ++i) {
        double s = 0.0;
        for (std::uint64_t j = n + 1; j-- > 0;) s += at(i, j);
        worst = std::max(worst, std::abs(s - row_pmf_[i]));
    }
    for (std::uint64_t j = 0; j <= n; ++j) {
        double s = 0.0;
        for (std::uint64_t i = n + 1; i-- > 0;) s += at(i, j);
        worst = std::max(worst, std::abs(s - col_pmf_[j]));
    }
    for (std::uint64_t k = 0; k <= n; ++k) {
        double s = 0.0;
        for (std::uint64_t i = 0; i <= k; ++i) s += at(i, k - i);
        worst = std::max(worst, std::abs(s - sum_pmf[k]));
    }
    return worst;
}

double min_lambda_nonneg(double alpha) {
    // Scan downward so the returned value is feasible jointly with every
    // larger grid value, exactly as the contract states.
    int first_ok = -1;
    for (int k = 2000; k >= 1; --k) {
        double lambda = static_cast<double>(k) / 10.0;
        if (coupling_feasible(alpha, lambda))
            first_ok = k;
        else
            break;
    }
    if (first_ok < 0) throw NotFound("min_lambda_nonneg: no feasible lambda on the grid");
    return static_cast<double>(first_ok) / 10.0;
}

std::uint64_t split_count(std::uint64_t n, UnitValue u, const CouplingMatrix& coupling) {
    if (n > coupling.truncation)
        throw std::out_of_range("split_count: count exceeds coupling truncation");
    if (n == 0) return 0;

    double total = 0.0;
    for (std::uint64_t m = 0; m <= n; ++m) total += coupling.at(m, n - m);
    if (!(total > 0.0)) return 0;

    const double target = u * total;
    double cum = 0.0;
    std::uint64_t last_positive = 0;
    for (std::uint64_t m = 0; m <= n; ++m) {
        double mass = coupling.at(m, n - m);
        if (mass <= 0.0) continue;
        cum += mass;
        last_positive = m;
        if (cum >= target) return m;
    }
    return last_positive;
}

void write_coupling_csv(std::ostream& os, const CouplingMatrix& q) {
    const std::uint64_t n = q.truncation;
    os << "i\\j";
    for (std::uint64_t j = 0; j <= n; ++j) os << "," << j;
    os << "\n";
    os.precision(17);
    for (std::uint64_t i = 0; i <= n; ++i) {
        os << i;
        for (std::uint64_t j = 0; j <= n; ++j) os << "," << q.at(i, j);
        os << "\n";
    }
}

}  // namespace splitfactor
