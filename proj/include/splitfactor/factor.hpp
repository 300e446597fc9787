#ifndef SPLITFACTOR_FACTOR_HPP
#define SPLITFACTOR_FACTOR_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "splitfactor/assignment.hpp"
#include "splitfactor/coupling.hpp"
#include "splitfactor/selection.hpp"

namespace splitfactor {

struct RegionTooSmall : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoGlobes : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class FactorMode { split_factor, homomorphism, translation_homomorphism };

double ball_volume(double radius, int dim);

struct FactorConfig {
    double lambda = 6.0;
    double lambda_prime = 3.75;
    SelectionConfig selection;
    FactorMode mode = FactorMode::split_factor;
    double margin = 200.0;  // evaluation margin used by the harnesses

    // The coupling is built with alpha equal to the blue (deleted) fraction,
    // so that F counts the blue points of a region: F(1,u) = 1 keeps a lone
    // point blue and F(2,u) = 0 sends both points red, matching the
    // deterministic one-/two-point cases of the finite-volume splitting.
    double alpha_blue() const { return 1.0 - lambda_prime / lambda; }

    double globe_mean() const { return lambda * ball_volume(selection.R, selection.dim); }

    // Coupling for splitting a globe; RegionTooSmall when the globe volume
    // is below the operational feasibility threshold.
    CouplingMatrix make_globe_coupling() const;

    void validate() const;

    static FactorConfig desk_split(int d) {
        FactorConfig c;
        c.lambda = 6.0;
        c.lambda_prime = 3.75;
        c.selection = SelectionConfig::desk_factor(d);
        c.mode = FactorMode::split_factor;
        c.margin = 200.0;
        return c;
    }

    static FactorConfig desk_thicken(int d) {
        FactorConfig c;
        c.lambda = 6.0;
        c.lambda_prime = 9.0;
        c.selection = SelectionConfig::desk_factor(d);
        c.mode = FactorMode::homomorphism;
        c.margin = 200.0;
        return c;
    }
};

// Which mechanism split each point.
struct Provenance {
    bool in_globe = false;
    int globe_index = -1;
    bool red = false;
    bool determined = true;
};

struct SplitResult {
    PointSet red;
    PointSet blue;
    std::vector<Provenance> provenance;  // per input point index
    bool no_specials = false;
    bool degenerate_tie = false;
    std::size_t undetermined_key_count = 0;
    std::vector<bool> globe_determined;  // per globe (splitting_factor only)
};

// Finite-volume splitting: the coupling's F drawn from stream 1 of u gives
// the blue count, the subset unranked from stream 2 selects the blue points
// in centric order, red is the complement.
SplitResult gamma_split(const Ball& region, const PointSet& mu, UnitValue u,
                        const CouplingMatrix& coupling);
SplitResult gamma_split(const Box& region, const PointSet& mu, UnitValue u,
                        const CouplingMatrix& coupling);

// Independent coin per point in radial order: point i red iff
// reproduce(u, i) <= lambda'/lambda (streams 1,2,...).
SplitResult standard_split(const PointSet& mu, UnitValue u, double lambda, double lambda_prime);

// Cor.-4.7-style randomized splitting: gamma on globe i with stream i,
// standard split on the ether with stream 0.
SplitResult randomized_split(const PointSet& mu, UnitValue u, const FactorConfig& cfg);

// The deterministic splitting factor: gamma on each globe with the globe's
// assignment value, a coin with the point's assignment value on the ether.
SplitResult splitting_factor(const PointSet& mu, const FactorConfig& cfg);

struct VoronoiIndex {
    int index = -1;
    bool unclaimed = false;
};

// Index of the strictly nearest center; ties within 1e-12 are unclaimed.
VoronoiIndex voronoi_cell_index(const Point& x, const std::vector<Point>& centers);

struct HomomorphismResult {
    PointSet output;
    std::vector<bool> cell_determined;      // per globe
    std::vector<Box> cells_1d;              // clipped cell intervals when dim == 1
    std::size_t skipped_singular_cells = 0;  // iso mode, absent fixing isometry
};

// Theorem-2 style homomorphism: a fresh Poisson(lambda') configuration per
// Voronoi cell of the globe centers, generated from the cell globe's
// assignment value in the fixing-isometry frame (iso mode) or the
// cell-centroid frame (translation mode).
HomomorphismResult homomorphism_factor(const PointSet& mu, const FactorConfig& cfg);

}  // namespace splitfactor

#endif
