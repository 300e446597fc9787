#ifndef SPLITFACTOR_ASSIGNMENT_HPP
#define SPLITFACTOR_ASSIGNMENT_HPP

#include <optional>
#include <stdexcept>
#include <vector>

#include "splitfactor/selection.hpp"

namespace splitfactor {

struct TooFewHaloPoints : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class TagFallback { none, too_few_points, tie };

struct TagRecord {
    Point tag;                 // halo point, or globe center on fallback
    Mat dtag;                  // columns are halo points (center columns on fallback)
    TagFallback fallback = TagFallback::none;
    std::optional<Isometry> fixing;  // present iff dtag - center*1^T is nonsingular
};

// Indices into mu.points of the points in the globe's halo shell
// [halo_in, halo_out] around its center.
std::vector<std::size_t> halo_point_indices(const PointSet& mu, const Globe& globe,
                                            const SelectionConfig& cfg);

// Tag of a globe: of the two mutually closest halo points, the one nearer to
// the rest of the halo.  Throws TooFewHaloPoints below 3 halo points; exact
// distance ties fall back to the globe center.
Point compute_tag(const PointSet& mu, const Globe& globe, const SelectionConfig& cfg);

// d-tag: column 1 is the tag, column i the halo point nearest to column i-1
// among points not used yet.  Degenerate cases give center columns.
Mat compute_dtag(const PointSet& mu, const Globe& globe, const SelectionConfig& cfg);

// Non-throwing combination used by the factor maps: fallbacks flagged.
TagRecord tag_record(const PointSet& mu, const Globe& globe, const SelectionConfig& cfg);

// Simplified encoding of a globe: f_b of the unique point (one-special),
// mod-1 sum of the two f_b values (two-special), 0 otherwise.
UnitValue encode(const PointSet& mu, const Globe& globe);

// Stream entry i of the globe's encoded randomness.
inline UnitValue encode_stream(const PointSet& mu, const Globe& globe, std::uint64_t i) {
    return reproduce(encode(mu, globe), i);
}

// Fixing isometry: sends the globe center to the origin and the d-tag to
// upper triangular form with positive diagonal; absent when singular.
std::optional<Isometry> fixing_isometry(const PointSet& mu, const Globe& globe,
                                        const SelectionConfig& cfg);

struct AssignmentKey {
    enum class Kind { globe, ether_point } kind;
    std::size_t index;  // globe index in the outcome / point index in mu

    static AssignmentKey for_globe(std::size_t g) { return {Kind::globe, g}; }
    static AssignmentKey for_point(std::size_t p) { return {Kind::ether_point, p}; }
};

struct PartnerRank {
    int one_partner = -1;  // globe index; -1 when degenerate (partner = self)
    int two_partner = -1;
    std::uint64_t one_rank = 0;
    std::uint64_t two_rank = 0;
    bool degenerate = false;  // no one-special or no two-special globe
    bool tie_flag = false;
};

// Precomputed assignment state for one configuration: tags, special globe
// lists, per-key partners/ranks, and the assignment values U(mu, key).
class Assignment {
public:
    Assignment(const PointSet& mu, const SelectionOutcome& outcome, const SelectionConfig& cfg);

    PartnerRank partner_rank(const AssignmentKey& key) const;
    UnitValue value(const AssignmentKey& key) const;

    // Key is determined inside the window: both partners exist and all data
    // that decides partners and ranks has clearance from the boundary.
    bool determined(const AssignmentKey& key) const;

    const Point& key_tag(const AssignmentKey& key) const;
    const TagRecord& globe_tag_record(std::size_t g) const { return tags_[g]; }
    bool has_specials() const { return !one_specials_.empty() && !two_specials_.empty(); }
    const std::vector<std::size_t>& one_specials() const { return one_specials_; }
    const std::vector<std::size_t>& two_specials() const { return two_specials_; }

private:
    const PointSet& mu_;
    const SelectionOutcome& outcome_;
    const SelectionConfig& cfg_;
    std::vector<TagRecord> tags_;
    std::vector<UnitValue> encodings_;  // ĥ per globe
    std::vector<std::size_t> one_specials_;
    std::vector<std::size_t> two_specials_;

    struct KeyData {
        PartnerRank pr;
        Point tag;
    };
    std::vector<KeyData> globe_keys_;
    std::vector<KeyData> point_keys_;  // indexed by point index; valid for ether points
    std::vector<bool> is_ether_;

    double slack_ = 0.0;

    const KeyData& data(const AssignmentKey& key) const;
    double boundary_clearance(const Point& p) const;
};

}  // namespace splitfactor

#endif
