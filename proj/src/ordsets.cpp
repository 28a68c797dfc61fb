#include "relcx/ordsets.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace relcx::ord {

FiniteOrderedSet::FiniteOrderedSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("FiniteOrderedSet: empty");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size())
        throw std::invalid_argument("FiniteOrderedSet: duplicate label");
}

FiniteOrderedSet FiniteOrderedSet::range(int lo, int hi) {
    if (lo > hi) throw std::invalid_argument("FiniteOrderedSet::range: empty");
    std::vector<std::string> l;
    for (int i = lo; i <= hi; ++i) l.push_back(std::to_string(i));
    return FiniteOrderedSet(std::move(l));
}

int FiniteOrderedSet::index_of(const std::string& l) const {
    for (int i = 0; i < size(); ++i)
        if (labels_[i] == l) return i;
    return -1;
}

Interval::Interval(FiniteOrderedSet p, int lo_, int hi_) : parent(std::move(p)), lo(lo_), hi(hi_) {
    if (lo < 0 || hi >= parent.size() || lo > hi)
        throw std::invalid_argument("Interval: bad bounds");
}

std::vector<int> Interval::interior() const {
    std::vector<int> out;
    for (int p = lo + 1; p < hi; ++p) out.push_back(p);
    return out;
}

OrderedSurjection::OrderedSurjection(FiniteOrderedSet src, FiniteOrderedSet dst,
                                     std::vector<int> a)
    : source(std::move(src)), target(std::move(dst)), assignment(std::move(a)) {
    if (static_cast<int>(assignment.size()) != source.size())
        throw std::invalid_argument("OrderedSurjection: table size mismatch");
    std::vector<bool> hit(target.size(), false);
    int prev = -1;
    for (int v : assignment) {
        if (v < 0 || v >= target.size()) throw std::invalid_argument("OrderedSurjection: out of range");
        if (v < prev) throw std::invalid_argument("OrderedSurjection: not order-preserving");
        prev = v;
        hit[v] = true;
    }
    for (bool h : hit)
        if (!h) throw std::invalid_argument("OrderedSurjection: not surjective");
}

OrderedSurjection OrderedSurjection::identity(const FiniteOrderedSet& s) {
    std::vector<int> a(s.size());
    for (int i = 0; i < s.size(); ++i) a[i] = i;
    return OrderedSurjection(s, s, std::move(a));
}

std::vector<int> OrderedSurjection::fiber(int t) const {
    std::vector<int> out;
    for (int i = 0; i < source.size(); ++i)
        if (assignment[i] == t) out.push_back(i);
    return out;
}

OrderedSurjection compose(const OrderedSurjection& g, const OrderedSurjection& f) {
    if (!(f.target == g.source)) throw std::invalid_argument("compose: middle sets differ");
    std::vector<int> a(f.source.size());
    for (int i = 0; i < f.source.size(); ++i) a[i] = g.assignment[f.assignment[i]];
    return OrderedSurjection(f.source, g.target, std::move(a));
}

AlmostDisjointFamily::AlmostDisjointFamily(FiniteOrderedSet p, std::vector<Interval> iv)
    : parent(std::move(p)), intervals(std::move(iv)) {
    for (const auto& I : intervals) {
        if (!(I.parent == parent))
            throw std::invalid_argument("AlmostDisjointFamily: member on different parent");
        if (I.size() < 2)
            throw std::invalid_argument("AlmostDisjointFamily: member of cardinality < 2");
    }
    for (size_t a = 0; a < intervals.size(); ++a)
        for (size_t b = a + 1; b < intervals.size(); ++b) {
            int lo = std::max(intervals[a].lo, intervals[b].lo);
            int hi = std::min(intervals[a].hi, intervals[b].hi);
            if (hi - lo + 1 > 1)
                throw std::invalid_argument("AlmostDisjointFamily: overlap larger than a point");
        }
}

bool AlmostDisjointFamily::is_ordered() const {
    for (size_t j = 0; j + 1 < intervals.size(); ++j)
        if (intervals[j].term() > intervals[j + 1].init()) return false;
    return true;
}

Segmentation segment(const Interval& I, const std::vector<int>& sigma) {
    if (I.size() < 2) throw std::invalid_argument("segment: interval has fewer than 2 elements");
    std::vector<int> s = sigma;
    std::sort(s.begin(), s.end());
    for (size_t i = 0; i + 1 < s.size(); ++i)
        if (s[i] == s[i + 1]) throw std::invalid_argument("segment: repeated cut");
    for (int p : s)
        if (p <= I.lo || p >= I.hi)
            throw std::invalid_argument("segment: cut outside interior");
    Segmentation out;
    out.parent = I;
    out.sigma = s;
    int start = I.lo;
    for (int p : s) {
        out.blocks.emplace_back(I.parent, start, p);
        start = p;
    }
    out.blocks.emplace_back(I.parent, start, I.hi);
    return out;
}

Partition partition_from_subset(int n, const std::vector<int>& p_subset) {
    if (n <= 0) throw std::invalid_argument("partition_from_subset: empty range");
    std::vector<bool> in(n, false);
    for (int p : p_subset) {
        if (p < 0 || p >= n) throw std::invalid_argument("partition_from_subset: position out of range");
        in[p] = true;
    }
    auto parent_set = FiniteOrderedSet::range(1, n);
    Partition out;
    out.parent = Interval::whole(parent_set);
    int i = 0;
    while (i < n) {
        int j = i;
        if (in[i])
            while (j + 1 < n && in[j + 1]) ++j;
        if (i > 0) out.cuts.push_back(i);
        out.blocks.emplace_back(parent_set, i, j);
        i = j + 1;
    }
    return out;
}

Partition associated_partition(const AlmostDisjointFamily& fam) {
    if (!fam.is_ordered()) throw std::invalid_argument("associated_partition: family not ordered");
    const int r = static_cast<int>(fam.intervals.size());
    if (r == 0) throw std::invalid_argument("associated_partition: empty family");
    auto idx = FiniteOrderedSet::range(1, r);
    Partition out;
    out.parent = Interval::whole(idx);
    int start = 0;
    for (int j = 0; j + 1 < r; ++j)
        if (fam.intervals[j].term() != fam.intervals[j + 1].init()) {
            out.blocks.emplace_back(idx, start, j);
            out.cuts.push_back(j + 1);
            start = j + 1;
        }
    out.blocks.emplace_back(idx, start, r - 1);
    return out;
}

MergedOrder merged_order(const AlmostDisjointFamily& fam_I, const AlmostDisjointFamily& fam_J) {
    if (!(fam_I.parent == fam_J.parent))
        throw std::invalid_argument("merged_order: different parents");
    const int r = static_cast<int>(fam_I.intervals.size());
    const int t = static_cast<int>(fam_J.intervals.size());
    struct Item {
        Interval iv;
        std::string label;
        bool second;
        int orig;
    };
    std::vector<Item> items;
    for (int j = 0; j < r; ++j)
        items.push_back({fam_I.intervals[j], std::to_string(j + 1), false, j});
    for (int k = 0; k < t; ++k)
        items.push_back({fam_J.intervals[k], std::to_string(k + 1) + "'", true, k});
    std::vector<Interval> all;
    for (const auto& it : items) all.push_back(it.iv);
    AlmostDisjointFamily check(fam_I.parent, all);  // throws if the union is not almost disjoint
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.iv.init() < b.iv.init(); });

    MergedOrder out;
    std::vector<std::string> labels;
    out.from_first.resize(r);
    out.from_second.resize(t);
    for (int p = 0; p < static_cast<int>(items.size()); ++p) {
        labels.push_back(items[p].label);
        out.intervals.push_back(items[p].iv);
        (items[p].second ? out.from_second : out.from_first)[items[p].orig] = p;
    }
    out.merged = FiniteOrderedSet(std::move(labels));
    AlmostDisjointFamily merged_fam(fam_I.parent, out.intervals);
    // the merged family is ordered by construction; reuse the block logic
    Partition part;
    part.parent = Interval::whole(out.merged);
    int start = 0;
    const int m = static_cast<int>(out.intervals.size());
    for (int j = 0; j + 1 < m; ++j)
        if (out.intervals[j].term() != out.intervals[j + 1].init()) {
            part.blocks.emplace_back(out.merged, start, j);
            part.cuts.push_back(j + 1);
            start = j + 1;
        }
    part.blocks.emplace_back(out.merged, start, m - 1);
    out.partition = std::move(part);
    return out;
}

bool is_pseudo_segmentation(const AlmostDisjointFamily& fam) {
    if (!fam.is_ordered()) throw std::invalid_argument("is_pseudo_segmentation: family not ordered");
    if (fam.intervals.empty()) return false;
    const auto& iv = fam.intervals;
    if (iv.front().init() != 0) return false;
    if (iv.back().term() != fam.parent.size() - 1) return false;
    for (size_t j = 0; j + 1 < iv.size(); ++j) {
        int gap = iv[j + 1].init() - iv[j].term();
        if (gap != 0 && gap != 1) return false;
    }
    return true;
}

std::vector<std::vector<int>> subsets_of(const std::vector<int>& positions) {
    const int n = static_cast<int>(positions.size());
    std::vector<std::vector<int>> out;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> s;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) s.push_back(positions[i]);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace relcx::ord
