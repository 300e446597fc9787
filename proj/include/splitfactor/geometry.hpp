#ifndef SPLITFACTOR_GEOMETRY_HPP
#define SPLITFACTOR_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace splitfactor {

// Points are plain coordinate vectors; dimension is carried by context.
using Point = std::vector<double>;

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyRegion : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Vector helpers

inline double dot(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline Point sub(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Point add(const Point& a, const Point& b) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Point scale(const Point& a, double s) {
    Point r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
    return r;
}

inline double dist(const Point& a, const Point& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Lexicographic comparison of coordinates.
inline bool lex_less(const Point& a, const Point& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

// Radial ordering: by norm, ties broken lexicographically.
inline bool radial_less(const Point& a, const Point& b) {
    double na = norm(a), nb = norm(b);
    if (na < nb) return true;
    if (na > nb) return false;
    return lex_less(a, b);
}

inline bool finite(const Point& p) {
    for (double c : p)
        if (!std::isfinite(c)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Regions

struct Ball {
    Point center;
    double radius = 0.0;
    bool closed = true;

    bool contains(const Point& p) const {
        double d = dist(p, center);
        return closed ? d <= radius : d < radius;
    }
};

// Closed shell {y : inner <= |y - center| <= outer}.
struct Shell {
    Point center;
    double inner = 0.0;
    double outer = 0.0;

    bool contains(const Point& p) const {
        double d = dist(p, center);
        return d >= inner && d <= outer;
    }
};

// Closed axis-aligned box [lo, hi].
struct Box {
    Point lo;
    Point hi;

    int dim() const { return static_cast<int>(lo.size()); }

    bool contains(const Point& p) const {
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (p[i] < lo[i] || p[i] > hi[i]) return false;
        return true;
    }

    double volume() const {
        double v = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
        return v;
    }

    Point midpoint() const {
        Point m(lo.size());
        for (std::size_t i = 0; i < lo.size(); ++i) m[i] = 0.5 * (lo[i] + hi[i]);
        return m;
    }
};

// A region usable for restriction: ball, shell or box, optionally complemented.
struct Region {
    std::variant<Ball, Shell, Box> shape;
    bool complement = false;

    bool contains(const Point& p) const {
        bool in = std::visit([&](const auto& s) { return s.contains(p); }, shape);
        return complement ? !in : in;
    }
};

inline Region region_of(Ball b, bool complement = false) { return Region{std::move(b), complement}; }
inline Region region_of(Shell s, bool complement = false) { return Region{std::move(s), complement}; }
inline Region region_of(Box b, bool complement = false) { return Region{std::move(b), complement}; }

// ---------------------------------------------------------------------------
// Dense square matrices (row-major, d x d).  Dimensions stay tiny.

struct Mat {
    int d = 0;
    std::vector<double> a;  // row-major

    Mat() = default;
    explicit Mat(int dim) : d(dim), a(static_cast<std::size_t>(dim) * dim, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * d + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * d + j]; }

    static Mat identity(int dim) {
        Mat m(dim);
        for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    Point col(int j) const {
        Point c(d);
        for (int i = 0; i < d; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_col(int j, const Point& c) {
        for (int i = 0; i < d; ++i) (*this)(i, j) = c[i];
    }

    Point apply(const Point& x) const {
        Point y(d, 0.0);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    Mat transpose() const {
        Mat t(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Mat mul(const Mat& o) const {
        Mat r(d);
        for (int i = 0; i < d; ++i)
            for (int k = 0; k < d; ++k) {
                double v = (*this)(i, k);
                if (v == 0.0) continue;
                for (int j = 0; j < d; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }
};

// Upper triangular factor with positive diagonal (when nonsingular).
struct UpperTriangular {
    Mat entries;
};

// ---------------------------------------------------------------------------
// Isometries: x -> rotation * x + translation, rotation orthogonal.

struct Isometry {
    Mat rotation;
    Point translation;

    static Isometry identity(int d) { return Isometry{Mat::identity(d), Point(d, 0.0)}; }

    static Isometry translate(const Point& t) {
        return Isometry{Mat::identity(static_cast<int>(t.size())), t};
    }

    Point apply(const Point& p) const {
        Point y = rotation.apply(p);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += translation[i];
        return y;
    }

    // this ∘ other: x -> this(other(x)).
    Isometry compose(const Isometry& other) const {
        Isometry r;
        r.rotation = rotation.mul(other.rotation);
        r.translation = apply(other.translation);
        return r;
    }

    Isometry inverse() const {
        Isometry r;
        r.rotation = rotation.transpose();
        Point t = r.rotation.apply(translation);
        r.translation = scale(t, -1.0);
        return r;
    }

    // max |R R^T - I| entry, for the orthogonality invariant.
    double orthogonality_defect() const {
        Mat p = rotation.mul(rotation.transpose());
        double worst = 0.0;
        for (int i = 0; i < rotation.d; ++i)
            for (int j = 0; j < rotation.d; ++j) {
                double target = (i == j) ? 1.0 : 0.0;
                worst = std::max(worst, std::abs(p(i, j) - target));
            }
        return worst;
    }
};

inline Point apply_isometry(const Isometry& iso, const Point& p) { return iso.apply(p); }

inline Ball apply_isometry(const Isometry& iso, const Ball& b) {
    return Ball{iso.apply(b.center), b.radius, b.closed};
}

// ---------------------------------------------------------------------------
// QR factorization with positive diagonal (modified Gram-Schmidt, columns
// sign-fixed so the triangular factor has a strictly positive diagonal).
// Throws SingularMatrix when |det A| falls below the tolerance.
std::pair<Mat, UpperTriangular> qr_positive_diagonal(const Mat& A, double singular_tol = 1e-10);

// Center of mass of {grid nodes inside `search` where `indicator` holds},
// nodes spaced `resolution` on a lattice anchored at the search center.
// Throws EmptyRegion when no node qualifies.
Point grid_centroid(const std::function<bool(const Point&)>& indicator, const Ball& search,
                    double resolution);

}  // namespace splitfactor

#endif
