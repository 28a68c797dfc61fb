#pragma once

#include "relcx/geomodel.hpp"

namespace relcx::cech {

using geo::Covering;
using geo::FiberingSequence;
using geo::GeometryModel;
using geo::LocatedRef;
using homalg::ChainMap;
using homalg::CxPtr;
using homalg::GenId;

/// Generator of the total complex: covering chain (empty = the ambient
/// space layer), inner degree q and index in the cycle complex of the
/// chain intersection.  Total degree = |chain| + q.
struct CechGen {
    std::vector<int> chain;
    int q = 0;
    int idx = 0;
    friend bool operator==(const CechGen&, const CechGen&) = default;
    friend auto operator<=>(const CechGen&, const CechGen&) = default;
};

struct CechComplex {
    CxPtr total;
    geo::SpaceId space;
    Covering cov;
    std::vector<std::vector<CechGen>> layout;           // [deg - lo][i]
    std::map<std::vector<int>, geo::OpenId> chain_open;  // empty chain -> invalid id
    std::map<std::vector<int>, CxPtr> chain_cx;
    std::map<CechGen, int> index;  // -> index within the total degree

    std::optional<int> find(int deg, const CechGen& g) const;
    const CechGen& gen(int deg, int i) const { return layout.at(deg - total->lo()).at(i); }
};

/// Total complex of [ Z(M) -> (+) Z(U_{i0}) -> (+) Z(U_{i0 i1}) -> .. ]
/// with differential delta + (-1)^{col} d.
CechComplex cech_complex(GeometryModel&, geo::SpaceId, const Covering&);

/// Z(A) for A = M - U together with the inclusion into the ambient layer.
std::pair<CxPtr, ChainMap> cech_iota(GeometryModel&, const CechComplex&);

/// Map of coverings (I,U) -> (J,V): order-preserving lambda: J -> I with
/// U_{lambda(j)} containing V_j.
struct CovMap {
    std::vector<int> lambda;
};

ChainMap cech_restrict(GeometryModel&, const CechComplex& src, const CechComplex& dst,
                       const CovMap&);
/// src lives on M with covering p^{-1}(dst.cov); p projective.
ChainMap cech_push(GeometryModel&, geo::MapId, const CechComplex& src, const CechComplex& dst);
/// src on N with covering V, dst on M with covering p^{-1}V; p smooth.
ChainMap cech_pull(GeometryModel&, geo::MapId, const CechComplex& src, const CechComplex& dst);

/// The covering of the merged space M_[lo,hi] by preimages of the factor
/// coverings, indexed by the concatenation of the factor index sets.
Covering merged_covering(GeometryModel&, const FiberingSequence&, int lo, int hi);
CechComplex merged_cech(GeometryModel&, const FiberingSequence&, int lo, int hi);

/// Sub-multicomplex of a tensor product of Cech complexes cut out by a
/// predicate on generator tuples, totalized; closure under the tensor
/// differential is verified.
struct HatTensor {
    std::vector<CechComplex> factors;
    FiberingSequence seq;  // set by restricted_tensor; empty otherwise
    CxPtr sub;
    homalg::TensorComplex full;
    ChainMap inclusion;  // sub -> full.total
    std::vector<std::vector<std::vector<std::pair<int, int>>>> layout;  // per deg, idx: factor (deg,idx)
    std::map<std::vector<std::pair<int, int>>, std::pair<int, int>> index;

    std::optional<int> find(int deg, const std::vector<std::pair<int, int>>& parts) const;
};

using TupleFilter = std::function<bool(std::span<const std::pair<int, int>>)>;

HatTensor filtered_tensor(std::vector<CechComplex> factors, const TupleFilter&);

/// Restricted tensor product: tuples whose located generators pass the
/// properness oracle.
HatTensor restricted_tensor(GeometryModel&, const FiberingSequence&,
                            std::vector<CechComplex> factors);

/// Product map onto the restricted tensor product of the merged blocks.
struct RhoResult {
    FiberingSequence merged_seq;
    HatTensor target;
    ChainMap map;  // src.sub -> target.sub
};
RhoResult rho(GeometryModel&, const HatTensor& src, const std::vector<std::pair<int, int>>& blocks);

/// One element of Z(M, U) as located pieces.
struct LocatedPiece {
    std::vector<int> chain;
    int q = 0;
    GenId id;
    Int coeff = 1;
};

/// A single condition of constraint: an ambient partitioned fibering
/// sequence, the placement of the tensor factors inside it, the subset P,
/// and fixed properly-intersecting elements at the extra positions.
struct SingleConstraint {
    FiberingSequence seq;
    std::vector<int> member_pos;
    std::vector<int> p_subset;
    std::vector<std::pair<int, std::vector<LocatedPiece>>> fixed;
};

struct Constraint {
    std::vector<SingleConstraint> singles;
};

/// Validates that each constraint's fixed tuple passes the oracle, then
/// builds the subcomplex of tuples passing all single conditions.
HatTensor distinguished(GeometryModel&, std::vector<CechComplex> factors, const Constraint&);

}  // namespace relcx::cech
