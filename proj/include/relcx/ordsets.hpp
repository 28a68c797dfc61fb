#pragma once

#include <string>
#include <vector>

#include "relcx/ints.hpp"

namespace relcx::ord {

/// A finite totally ordered set.  Labels are opaque tokens; order is the
/// stored order, never inferred from label content (index sets such as
/// {1,2,1',2',3} occur when interval families are merged).
class FiniteOrderedSet {
public:
    FiniteOrderedSet() = default;
    explicit FiniteOrderedSet(std::vector<std::string> labels);
    static FiniteOrderedSet range(int lo, int hi);  // integer labels lo..hi

    int size() const { return static_cast<int>(labels_.size()); }
    const std::string& label(int i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }
    int index_of(const std::string& l) const;  // -1 if absent

    friend bool operator==(const FiniteOrderedSet&, const FiniteOrderedSet&) = default;

private:
    std::vector<std::string> labels_;
};

/// Contiguous slice [lo, hi] of a FiniteOrderedSet, by element positions.
struct Interval {
    FiniteOrderedSet parent;
    int lo = 0;
    int hi = 0;

    Interval() = default;
    Interval(FiniteOrderedSet p, int lo_, int hi_);
    static Interval whole(const FiniteOrderedSet& p) { return Interval(p, 0, p.size() - 1); }

    int size() const { return hi - lo + 1; }
    int init() const { return lo; }
    int term() const { return hi; }
    /// positions lo+1 .. hi-1
    std::vector<int> interior() const;
    bool contains_pos(int p) const { return lo <= p && p <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Overlapping decomposition: blocks share their cut endpoints.
struct Segmentation {
    Interval parent;
    std::vector<int> sigma;  // interior cut positions, strictly increasing
    std::vector<Interval> blocks;
};

/// Disjoint decomposition into consecutive sub-intervals.
struct Partition {
    Interval parent;
    std::vector<int> cuts;  // start positions of blocks 2..a, strictly increasing
    std::vector<Interval> blocks;
};

/// Order-preserving surjection between finite ordered sets, as a table of
/// target positions per source position.
struct OrderedSurjection {
    FiniteOrderedSet source;
    FiniteOrderedSet target;
    std::vector<int> assignment;  // per source position, target position

    OrderedSurjection() = default;
    OrderedSurjection(FiniteOrderedSet src, FiniteOrderedSet dst, std::vector<int> a);
    static OrderedSurjection identity(const FiniteOrderedSet& s);

    int operator()(int i) const { return assignment.at(i); }
    std::vector<int> fiber(int t) const;

    friend bool operator==(const OrderedSurjection&, const OrderedSurjection&) = default;
};

/// g after f (apply f first).
OrderedSurjection compose(const OrderedSurjection& g, const OrderedSurjection& f);

/// Family of sub-intervals of a common parent, each of size >= 2, with
/// pairwise intersections of at most one element.
struct AlmostDisjointFamily {
    FiniteOrderedSet parent;
    std::vector<Interval> intervals;

    AlmostDisjointFamily() = default;
    AlmostDisjointFamily(FiniteOrderedSet p, std::vector<Interval> iv);

    /// term(I_j) <= init(I_{j+1}) for consecutive members.
    bool is_ordered() const;
};

Segmentation segment(const Interval& I, const std::vector<int>& sigma);

/// Blocks are the maximal sub-intervals contained in P, interleaved with
/// singletons outside P.  Positions in `p_subset` are 0-based within [0,n).
Partition partition_from_subset(int n, const std::vector<int>& p_subset);

/// Partition of the member index set [0,r) into maximal runs of members
/// chained by shared endpoints.
Partition associated_partition(const AlmostDisjointFamily& fam);

struct MergedOrder {
    FiniteOrderedSet merged;          // labels "1".."r" and "1'".."t'"
    std::vector<int> from_first;      // position in merged of member j of fam_I
    std::vector<int> from_second;     // position in merged of member k of fam_J
    std::vector<Interval> intervals;  // the union family in merged order
    Partition partition;              // associated partition of the merged index set
};

MergedOrder merged_order(const AlmostDisjointFamily& fam_I, const AlmostDisjointFamily& fam_J);

bool is_pseudo_segmentation(const AlmostDisjointFamily& fam);

/// All subsets of the given positions, as sorted vectors, enumerated in a
/// fixed order (bitmask ascending over the position list).
std::vector<std::vector<int>> subsets_of(const std::vector<int>& positions);

}  // namespace relcx::ord
