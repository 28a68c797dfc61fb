#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "relcx/snf.hpp"
#include "relcx/sparse.hpp"

namespace relcx::homalg {

/// Structured generator identifier.  Stored as a canonical printable token;
/// provenance (covering chains, tensor factors) is carried by the layout
/// tables of the producing constructions, not parsed back out of the id.
class GenId {
public:
    GenId() = default;
    static GenId atom(std::string s) { return GenId(std::move(s)); }
    static GenId tagged(const std::string& tag, const GenId& inner) {
        return GenId(tag + "(" + inner.s_ + ")");
    }
    static GenId chain(const std::vector<int>& c, const GenId& inner);
    static GenId tensor(const std::vector<GenId>& parts);

    const std::string& str() const { return s_; }
    friend bool operator==(const GenId&, const GenId&) = default;
    friend auto operator<=>(const GenId&, const GenId&) = default;

private:
    explicit GenId(std::string s) : s_(std::move(s)) {}
    std::string s_;
};

class FreeComplex;
using CxPtr = std::shared_ptr<const FreeComplex>;

/// Bounded complex of free Z-modules with named generators and a degree +1
/// differential; dd = 0 is validated at construction.
class FreeComplex {
public:
    class Builder {
    public:
        int add_gen(int deg, GenId id);
        /// entry of d: coefficient of target generator in d(source generator)
        void add_d(int src_deg, int src_idx, int dst_idx, Int coeff);
        CxPtr build();

    private:
        friend class FreeComplex;
        std::map<int, std::vector<GenId>> gens_;
        std::map<int, std::vector<Triplet>> d_;
    };

    static CxPtr zero() { Builder b; return b.build(); }

    int lo() const { return lo_; }
    int hi() const { return hi_; }
    int dim(int p) const {
        return (p < lo_ || p > hi_) ? 0 : static_cast<int>(basis_[p - lo_].size());
    }
    int total_dim() const;
    const std::vector<GenId>& basis(int p) const;
    const GenId& gen(int p, int i) const { return basis(p).at(i); }
    /// differential deg p -> p+1 (zero matrix of the right shape outside range)
    SparseMat d(int p) const;
    std::optional<int> index_of(int p, const GenId& id) const;

    HomologyRecord homology(int p) const { return homology_at(d(p - 1), d(p), p); }
    std::vector<HomologyRecord> homology_all() const;
    bool is_acyclic() const;

private:
    FreeComplex() = default;
    int lo_ = 0;
    int hi_ = -1;  // empty
    std::vector<std::vector<GenId>> basis_;
    std::vector<SparseMat> d_;  // d_[p-lo_]: p -> p+1, for p in [lo_, hi_-1]
    mutable std::vector<std::unordered_map<std::string, int>> index_;  // lazy
};

/// Map of complexes f: src -> dst[shift], commuting with the differentials
/// on the nose (validated).  Stored per source degree.
class ChainMap {
public:
    ChainMap() = default;
    ChainMap(CxPtr src, CxPtr dst, int shift, std::map<int, SparseMat> mats,
             bool validate = true);

    static ChainMap zero(CxPtr src, CxPtr dst, int shift = 0);
    static ChainMap identity(CxPtr cx);

    const CxPtr& src() const { return src_; }
    const CxPtr& dst() const { return dst_; }
    int shift() const { return shift_; }
    SparseMat at(int p) const;  // matrix deg p -> p+shift (zero-shaped outside)

    ChainMap scaled(Int s) const;
    friend ChainMap compose(const ChainMap& g, const ChainMap& f);  // g after f
    friend ChainMap operator+(const ChainMap& a, const ChainMap& b);
    friend ChainMap operator-(const ChainMap& a, const ChainMap& b);
    friend bool operator==(const ChainMap& a, const ChainMap& b);
    bool is_zero() const;

    void check_commutes() const;  // throws InvariantError

private:
    CxPtr src_, dst_;
    int shift_ = 0;
    std::map<int, SparseMat> mats_;
};

/// (C[k])^p = C^{p+k} with differential (-1)^k d.
CxPtr shift(const CxPtr& c, int k);
/// The degree-preserving iso C -> C[k] "same generator" as a ChainMap of
/// shift -k (generator in degree p lands in degree p-k), with signs making
/// it a map of complexes.
ChainMap shift_iso(const CxPtr& c, const CxPtr& shifted, int k);

struct SumComplex {
    CxPtr total;
    std::vector<ChainMap> inject;
    std::vector<ChainMap> project;
};
SumComplex direct_sum(const std::vector<CxPtr>& parts, const std::string& tag_prefix = "s");

struct ConeComplex {
    CxPtr total;             // Cone(f)^p = src^{p+1} (+) dst^p
    ChainMap to_src_shift;   // projection onto src part (shift +1)
    ChainMap from_dst;       // inclusion of dst
};
ConeComplex cone(const ChainMap& f);

bool is_quasi_iso(const ChainMap& f);

/// One leg of a zig-zag; backward legs must be quasi-isomorphisms and are
/// inverted on homology.
struct ZigzagLeg {
    ChainMap map;
    bool backward = false;
};

struct HomologyCompareResult {
    bool equal = false;
    bool used_rational_fallback = false;
    std::string witness;  // degree/generator info on failure
};

/// Compare two zig-zags from a common source complex to a common target on
/// homology in every degree.  Integral (torsion-aware) where possible.
HomologyCompareResult equal_on_homology(const std::vector<ZigzagLeg>& route_a,
                                        const std::vector<ZigzagLeg>& route_b);

}  // namespace relcx::homalg
