#include "splitfactor/geometry.hpp"

#include <cmath>

namespace splitfactor {

std::pair<Mat, UpperTriangular> qr_positive_diagonal(const Mat& A, double singular_tol) {
    const int d = A.d;
    Mat Q(d);
    Mat R(d);

    // Modified Gram-Schmidt on columns.
    std::vector<Point> v(d);
    for (int j = 0; j < d; ++j) v[j] = A.col(j);

    double abs_det = 1.0;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < j; ++i) {
            Point qi = Q.col(i);
            double r = dot(qi, v[j]);
            R(i, j) = r;
            for (int k = 0; k < d; ++k) v[j][k] -= r * qi[k];
        }
        double nrm = norm(v[j]);
        abs_det *= nrm;
        if (nrm == 0.0) {
            // Defer the singularity decision to the determinant check below.
            R(j, j) = 0.0;
            Point e(d, 0.0);
            e[j] = 1.0;
            Q.set_col(j, e);
            continue;
        }
        R(j, j) = nrm;
        Q.set_col(j, scale(v[j], 1.0 / nrm));
    }

    if (abs_det < singular_tol)
        throw SingularMatrix("qr_positive_diagonal: matrix is singular within tolerance");

    // The norms are positive already; sign fixing matters only when a column
    // ended up flipped by cancellation.  With MGS the diagonal is always >= 0,
    // so flip exact zeros defensively and leave the rest untouched.
    for (int j = 0; j < d; ++j) {
        if (R(j, j) < 0.0) {
            R(j, j) = -R(j, j);
            for (int k = j + 1; k < d; ++k) R(j, k) = -R(j, k);
            Point qj = Q.col(j);
            Q.set_col(j, scale(qj, -1.0));
        }
    }

    return {Q, UpperTriangular{R}};
}

Point grid_centroid(const std::function<bool(const Point&)>& indicator, const Ball& search,
                    double resolution) {
    const int d = static_cast<int>(search.center.size());
    const double r = search.radius;
    const long long half = static_cast<long long>(std::floor(r / resolution));

    Point sum(d, 0.0);
    long long count = 0;

    // Walk the integer lattice offsets inside the search ball.
    std::vector<long long> idx(d, -half);
    while (true) {
        Point node(d);
        double sq = 0.0;
        for (int i = 0; i < d; ++i) {
            double off = static_cast<double>(idx[i]) * resolution;
            node[i] = search.center[i] + off;
            sq += off * off;
        }
        if (sq <= r * r && indicator(node)) {
            for (int i = 0; i < d; ++i) sum[i] += node[i];
            ++count;
        }
        int axis = 0;
        while (axis < d) {
            if (++idx[axis] <= half) break;
            idx[axis] = -half;
            ++axis;
        }
        if (axis == d) break;
    }

    if (count == 0) throw EmptyRegion("grid_centroid: indicator empty on search grid");
    return scale(sum, 1.0 / static_cast<double>(count));
}

}  // namespace splitfactor
