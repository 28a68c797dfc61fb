#pragma once

#include <span>

#include "relcx/homalg.hpp"

namespace relcx::geo {

using homalg::ChainMap;
using homalg::CxPtr;
using homalg::GenId;

struct SpaceId {
    int v = -1;
    bool ok() const { return v >= 0; }
    auto operator<=>(const SpaceId&) const = default;
};
struct OpenId {
    int v = -1;
    bool ok() const { return v >= 0; }
    auto operator<=>(const OpenId&) const = default;
};
struct MapId {
    int v = -1;
    bool ok() const { return v >= 0; }
    auto operator<=>(const MapId&) const = default;
};

struct MapInfo {
    SpaceId src, dst;
    bool smooth = false;
    bool projective = false;
    int rel_dim = 0;
};

/// An ordered open covering of `covered` inside `space`; the index set is
/// 0..opens.size()-1 in this order.
struct Covering {
    SpaceId space;
    OpenId covered;
    std::vector<OpenId> opens;
};

/// Spaces M_0..M_{n-1} with targets Y_i between adjacent members.  A
/// missing target (invalid ids at position i) is a partition break: no
/// fibering constraint between positions i and i+1.  Coverings are
/// optional; when present they enter the restricted tensor product.
struct FiberingSequence {
    std::vector<SpaceId> spaces;
    std::vector<SpaceId> targets;        // size n-1, possibly invalid entries
    std::vector<MapId> left_to_target;   // M_i -> Y_i
    std::vector<MapId> right_to_target;  // M_{i+1} -> Y_i
    std::vector<Covering> covs;          // empty, or one covering per space

    int size() const { return static_cast<int>(spaces.size()); }
};

/// A generator of Z(M, U) for one tensor slot: the covering chain and the
/// generator id inside the cycle complex of the chain intersection.  For a
/// grouped (merged) slot the chain lives in the concatenated covering.
struct LocatedRef {
    int group = 0;
    std::vector<int> chain;
    GenId id;
};

using NamedElem = std::vector<std::pair<GenId, Int>>;

class GeometryModel {
public:
    virtual ~GeometryModel() = default;

    virtual int dim(SpaceId) const = 0;
    virtual std::string space_name(SpaceId) const = 0;
    virtual CxPtr cycles(SpaceId) = 0;
    virtual CxPtr cycles_open(OpenId) = 0;
    virtual SpaceId space_of(OpenId) const = 0;

    virtual OpenId intersect(OpenId, OpenId) = 0;
    virtual OpenId union_of(const std::vector<OpenId>&) = 0;
    virtual bool contains(OpenId big, OpenId small) = 0;
    virtual bool union_is(const std::vector<OpenId>&, OpenId) = 0;
    virtual ChainMap restrict_space_to_open(SpaceId, OpenId) = 0;
    virtual ChainMap restrict_open_to_open(OpenId sup, OpenId sub) = 0;
    /// closed complement A = M - U with the inclusion Z(A) -> Z(M)
    virtual std::pair<CxPtr, ChainMap> complement(SpaceId, OpenId) = 0;

    virtual MapInfo map_info(MapId) const = 0;
    virtual OpenId preimage(MapId, OpenId) = 0;
    virtual ChainMap push_spaces(MapId) = 0;               // Z(M) -> Z(N)
    virtual ChainMap push_on_open(MapId, OpenId dst) = 0;  // Z(p^{-1}V) -> Z(V)
    virtual ChainMap pull_spaces(MapId) = 0;               // Z(N) -> Z(M)
    virtual ChainMap pull_on_open(MapId, OpenId dst) = 0;  // Z(V) -> Z(p^{-1}V)

    /// Fiber product M_[lo,hi] of a contiguous run; singletons return the
    /// member space itself.
    virtual SpaceId fiber_space(const FiberingSequence&, int lo, int hi) = 0;
    /// Projection M_[lo,hi] -> M_[lo2,hi2] for a contained run.
    virtual MapId fiber_projection(const FiberingSequence&, int lo, int hi, int lo2, int hi2) = 0;

    /// Properness oracle.  `groups` partitions 0..n-1 into contiguous runs;
    /// each located generator refers to the cycle complex of (a chain
    /// intersection open of) the merged space of its group.
    virtual bool proper(const FiberingSequence&, const std::vector<std::pair<int, int>>& groups,
                        std::span<const LocatedRef> gens) = 0;

    /// Product of a generator of Z(M_[lo,mid], ..) with one of
    /// Z(M_[mid+1,hi], ..), as an element of the cycle complex of the
    /// concatenated-chain open of M_[lo,hi].  Preconditions: the pair is
    /// properly intersecting.
    virtual NamedElem product_pair(const FiberingSequence&, int lo, int mid, int hi,
                                   const std::vector<int>& chain_a, const GenId& a,
                                   const std::vector<int>& chain_b, const GenId& b) = 0;
};

/// Finite point-set model: every space is a finite set of labelled points,
/// every subset is open, cycle complexes are Z[points] in degree 0, all
/// maps are smooth and projective, every tuple intersects properly.
class PointModel final : public GeometryModel {
public:
    SpaceId add_space(std::string name, std::vector<std::string> labels, int dim = 0);
    MapId add_map(std::string name, SpaceId src, SpaceId dst, std::vector<int> images);
    OpenId open_of(SpaceId, std::vector<int> pts);
    OpenId full_open(SpaceId);

    int point_count(SpaceId s) const { return static_cast<int>(spaces_.at(s.v).labels.size()); }
    const std::string& point_label(SpaceId s, int i) const { return spaces_.at(s.v).labels.at(i); }
    int point_index(SpaceId s, const std::string& label) const;
    const std::vector<int>& open_points(OpenId o) const { return opens_.at(o.v).pts; }
    int map_apply(MapId m, int pt) const { return maps_.at(m.v).f.at(pt); }

    int dim(SpaceId) const override;
    std::string space_name(SpaceId) const override;
    CxPtr cycles(SpaceId) override;
    CxPtr cycles_open(OpenId) override;
    SpaceId space_of(OpenId) const override;
    OpenId intersect(OpenId, OpenId) override;
    OpenId union_of(const std::vector<OpenId>&) override;
    bool contains(OpenId, OpenId) override;
    bool union_is(const std::vector<OpenId>&, OpenId) override;
    ChainMap restrict_space_to_open(SpaceId, OpenId) override;
    ChainMap restrict_open_to_open(OpenId, OpenId) override;
    std::pair<CxPtr, ChainMap> complement(SpaceId, OpenId) override;
    MapInfo map_info(MapId) const override;
    OpenId preimage(MapId, OpenId) override;
    ChainMap push_spaces(MapId) override;
    ChainMap push_on_open(MapId, OpenId) override;
    ChainMap pull_spaces(MapId) override;
    ChainMap pull_on_open(MapId, OpenId) override;
    SpaceId fiber_space(const FiberingSequence&, int lo, int hi) override;
    MapId fiber_projection(const FiberingSequence&, int lo, int hi, int lo2, int hi2) override;
    bool proper(const FiberingSequence&, const std::vector<std::pair<int, int>>&,
                std::span<const LocatedRef>) override;
    NamedElem product_pair(const FiberingSequence&, int lo, int mid, int hi,
                           const std::vector<int>&, const GenId&, const std::vector<int>&,
                           const GenId&) override;

private:
    struct SpaceData {
        std::string name;
        std::vector<std::string> labels;
        int dim = 0;
        std::vector<int> atoms;                 // atomic space ids (self for plain spaces)
        std::vector<std::vector<int>> tuples;   // atomic coordinates, for fiber spaces
        std::map<std::vector<int>, int> tuple_index;
        std::string key;                        // canonical construction key
    };
    struct OpenData {
        SpaceId sp;
        std::vector<int> pts;  // sorted
    };
    struct MapData {
        std::string name;
        MapInfo info;
        std::vector<int> f;
    };

    ChainMap point_map_matrix(SpaceId src_sp, const std::vector<int>& src_pts, CxPtr src,
                              SpaceId dst_sp, CxPtr dst, const std::vector<int>& f,
                              bool forward);
    std::string seq_key(const FiberingSequence&, int lo, int hi) const;

    std::vector<SpaceData> spaces_;
    std::vector<OpenData> opens_;
    std::vector<MapData> maps_;
    std::map<std::pair<int, std::vector<int>>, OpenId> open_memo_;
    std::map<std::string, SpaceId> fiber_memo_;
    std::map<std::string, MapId> proj_memo_;
    std::map<int, CxPtr> space_cx_;
    std::map<int, CxPtr> open_cx_;
};

/// Declared-data model: complexes, restrictions, push/pull matrices,
/// fiber spaces and the properness/product tables all come from a scenario
/// file; the validator checks every interface law at load time.
class TableModel final : public GeometryModel {
public:
    SpaceId add_space(std::string name, int dim, CxPtr cx);
    OpenId add_open(SpaceId, std::string name, CxPtr cx, ChainMap from_space);
    void set_intersection(OpenId, OpenId, OpenId);
    void set_open_restriction(OpenId sup, OpenId sub, ChainMap);
    void set_complement(SpaceId, OpenId, CxPtr, ChainMap incl);
    MapId add_map(std::string name, MapInfo, std::optional<ChainMap> push,
                  std::optional<ChainMap> pull);
    void set_preimage(MapId, OpenId dst, OpenId src);
    void set_push_on_open(MapId, OpenId dst, ChainMap);
    void set_pull_on_open(MapId, OpenId dst, ChainMap);
    void register_fiber_space(const std::string& seq_name, int lo, int hi, SpaceId);
    void register_fiber_projection(const std::string& seq_name, int lo, int hi, int lo2, int hi2,
                                   MapId);
    void set_sequence_name(const FiberingSequence&, std::string name);
    std::string sequence_name(const FiberingSequence&) const;

    /// proper tuples as sorted (complex-holder name, gen id) pairs, where a
    /// holder is a space or the open cut out by a covering chain; sub-tuples
    /// of a proper tuple are proper, tuples of size <= 1 always proper.
    void add_proper(std::vector<std::pair<std::string, std::string>> tuple);
    void declare_union(std::vector<OpenId> parts, OpenId whole);
    void add_product(const std::string& seq_name, int lo, int mid, int hi,
                     std::vector<int> chain_a, std::string a, std::vector<int> chain_b,
                     std::string b, NamedElem value);

    /// Checks the properness table is closed under the cycle-complex
    /// boundary and under restriction to deeper covering opens, and that
    /// declared push/pull/restriction maps compose functorially.
    void validate();

    SpaceId space_by_name(const std::string&) const;
    OpenId open_by_name(const std::string&) const;

    int dim(SpaceId) const override;
    std::string space_name(SpaceId) const override;
    CxPtr cycles(SpaceId) override;
    CxPtr cycles_open(OpenId) override;
    SpaceId space_of(OpenId) const override;
    OpenId intersect(OpenId, OpenId) override;
    OpenId union_of(const std::vector<OpenId>&) override;
    bool contains(OpenId, OpenId) override;
    bool union_is(const std::vector<OpenId>&, OpenId) override;
    ChainMap restrict_space_to_open(SpaceId, OpenId) override;
    ChainMap restrict_open_to_open(OpenId, OpenId) override;
    std::pair<CxPtr, ChainMap> complement(SpaceId, OpenId) override;
    MapInfo map_info(MapId) const override;
    OpenId preimage(MapId, OpenId) override;
    ChainMap push_spaces(MapId) override;
    ChainMap push_on_open(MapId, OpenId) override;
    ChainMap pull_spaces(MapId) override;
    ChainMap pull_on_open(MapId, OpenId) override;
    SpaceId fiber_space(const FiberingSequence&, int lo, int hi) override;
    MapId fiber_projection(const FiberingSequence&, int lo, int hi, int lo2, int hi2) override;
    bool proper(const FiberingSequence&, const std::vector<std::pair<int, int>>&,
                std::span<const LocatedRef>) override;
    NamedElem product_pair(const FiberingSequence&, int lo, int mid, int hi,
                           const std::vector<int>&, const GenId&, const std::vector<int>&,
                           const GenId&) override;

private:
    using PKey = std::vector<std::pair<std::string, std::string>>;

    struct SpaceData {
        std::string name;
        int dim = 0;
        CxPtr cx;
        std::map<int, std::pair<CxPtr, ChainMap>> complements;  // by open id
    };
    struct OpenData {
        std::string name;
        SpaceId sp;
        CxPtr cx;
        ChainMap from_space;
        std::map<int, ChainMap> to_sub;  // restriction to contained opens
    };
    struct MapData {
        std::string name;
        MapInfo info;
        std::optional<ChainMap> push, pull;
        std::map<int, OpenId> preim;
        std::map<int, ChainMap> push_open, pull_open;
    };

    bool proper_key(const PKey&) const;

    std::vector<SpaceData> spaces_;
    std::vector<OpenData> opens_;
    std::vector<MapData> maps_;
    std::map<std::pair<int, int>, OpenId> inters_;
    std::map<std::string, std::map<std::tuple<int, int, int, int>, MapId>> fiber_proj_;
    std::map<std::string, std::map<std::pair<int, int>, SpaceId>> fiber_sp_;
    std::map<std::string, std::string> seq_names_;  // fingerprint -> name
    std::vector<PKey> proper_;
    std::map<std::string, NamedElem> products_;
    std::vector<std::pair<std::vector<OpenId>, OpenId>> unions_;
    std::string seq_fingerprint(const FiberingSequence&) const;
};

/// Open cut out by a covering chain of the concatenated covering of the
/// merged space of [lo,hi]; invalid id for the empty chain (whole space).
OpenId chain_open_of(GeometryModel&, const FiberingSequence&, int lo, int hi,
                     const std::vector<int>& chain);

}  // namespace relcx::geo
