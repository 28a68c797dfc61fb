#pragma once

#include <functional>
#include <utility>

#include "relcx/complex.hpp"
#include "relcx/ordsets.hpp"

namespace relcx::homalg {

/// Tensor product of complexes, totalized with the reverse-order rule:
///   d(x_1*..*x_n) = sum_i (-1)^{deg x_{i+1}+..+deg x_n} x_1*..*d(x_i)*..*x_n.
/// Layout gives, per total-degree basis index, the (degree, index) of each
/// factor generator; bases are enumerated lexicographically in factor order.
struct TensorComplex {
    CxPtr total;
    std::vector<CxPtr> factors;
    std::vector<std::vector<std::vector<std::pair<int, int>>>> layout;  // [deg-lo][idx][factor]
    std::map<std::vector<std::pair<int, int>>, std::pair<int, int>> index_map;

    int lo() const { return total->lo(); }
    std::optional<int> find(int deg, const std::vector<std::pair<int, int>>& parts) const;
};

TensorComplex tensor(const std::vector<CxPtr>& factors);

/// f_1 * ... * f_n for degree-preserving chain maps, between tensor
/// complexes built from the corresponding factors.
ChainMap tensor_map(const TensorComplex& src, const TensorComplex& dst,
                    const std::vector<ChainMap>& maps);

enum class Conv {
    Anticommuting,  // d_k d_l + d_l d_k = 0
    Commuting,      // "quoted": d_k d_l = d_l d_k
};

enum class TotOrder { Forward, Reverse };

/// Z^n-graded free module with n commuting or anticommuting differentials,
/// each raising its own coordinate by one.  Validated at construction.
class MultiComplex {
public:
    using MDeg = std::vector<int>;

    class Builder {
    public:
        Builder(int arity, Conv conv) : arity_(arity), conv_(conv) {}
        int add_gen(const MDeg& mdeg, GenId id);
        void add_d(int k, const MDeg& src_mdeg, int src_idx, int dst_idx, Int coeff);
        MultiComplex build();

    private:
        friend class MultiComplex;
        int arity_;
        Conv conv_;
        std::map<MDeg, std::vector<GenId>> gens_;
        std::vector<std::map<MDeg, std::vector<Triplet>>> d_;
    };

    int arity() const { return arity_; }
    Conv conv() const { return conv_; }
    const std::map<MDeg, std::vector<GenId>>& basis() const { return basis_; }
    int dim(const MDeg& m) const;
    const std::vector<GenId>& gens(const MDeg& m) const;
    SparseMat d(int k, const MDeg& m) const;  // zero-shaped when absent

    /// Partial totalization along an order-preserving surjection of the
    /// grading coordinates.  For the commuting convention the within-block
    /// sign correction is applied (forward: (-1)^{sum of earlier in-block
    /// degrees}; reverse: later degrees).
    MultiComplex totalize(const ord::OrderedSurjection& f, TotOrder order = TotOrder::Forward) const;

    /// Full totalization to a single complex.
    CxPtr tot(TotOrder order = TotOrder::Forward) const;

    MultiComplex() = default;

private:
    void validate() const;
    int arity_ = 1;
    Conv conv_ = Conv::Commuting;
    std::map<MDeg, std::vector<GenId>> basis_;
    std::vector<std::map<MDeg, SparseMat>> d_;
};

/// View a tensor product of complexes as a commuting ("quoted") n-tuple
/// complex: coordinate k is the degree in factor k, d_k acts on factor k
/// with no signs.
MultiComplex tensor_multi(const std::vector<CxPtr>& factors);

/// Tensor product of two commuting double complexes:
///   d'_E = (-1)^b d'_A * 1 + 1 * d'_B,   d''_E = (-1)^q d''_A * 1 + 1 * d''_B
/// on A^{a,p} * B^{b,q}.  `parts` records the factor pair of each generator.
struct DTimes {
    MultiComplex mc;
    std::map<std::string, std::pair<GenId, GenId>> parts;
};
DTimes dtimes(const MultiComplex& a, const MultiComplex& b);

/// The comparison isomorphism Tot(A) * Tot(B) -> Tot(A x B), acting as
/// (-1)^{a q} on the summand A^{a,p} * B^{b,q}.
ChainMap u_iso(const MultiComplex& a, const MultiComplex& b, const TensorComplex& tot_ab,
               const CxPtr& tot_dtimes);

/// An element of a fixed degree of a complex, as (basis index, coeff).
using Elem = std::vector<std::pair<int, Int>>;

/// Interval-indexed complexes with associative products on adjacent
/// segmentation pairs; input to the bar construction.  Intervals are
/// (lo,hi) position pairs within [0, n-1], hi > lo.
struct BarSystem {
    int n = 0;
    std::map<std::pair<int, int>, CxPtr> comp;
    /// product for the segmentation (lo,k,hi): bilinear on basis elements
    std::function<Elem(int lo, int k, int hi, int degL, int idxL, int degR, int idxR)> rho;

    const CxPtr& at(int lo, int hi) const;
    void validate() const;  // Leibniz + associativity on all basis elements
};

struct BarGen {
    std::vector<int> sigma;                  // interior cut positions, increasing
    std::vector<std::pair<int, int>> parts;  // per block: (degree, index)
};

/// B(I | S)-style complex: direct sum over segmentations with cuts
/// containing `require`, graded by sum of (deg - 1), with differential
/// d-bar + rho-bar.
struct BarComplex {
    CxPtr total;
    std::vector<std::vector<BarGen>> layout;  // [deg - lo][idx]
    int n = 0;
    std::vector<int> require;

    std::optional<int> find(int deg, const BarGen& g) const;
};

BarComplex bar_complex(const BarSystem& sys);
BarComplex bar_quotient(const BarSystem& sys, const std::vector<int>& require);
/// Natural surjection between quotients, for require_from contained in require_to.
ChainMap bar_tau(const BarComplex& from, const BarComplex& to);

/// Signed cube total complex of a functor on subsets of a finite set:
/// complexes c_s for every subset s of {0..t-1} and one-step maps
/// f_{s, s+{k}}, functorial.  Cube coordinate |S| pairs with the internal
/// degree under the commuting-double sign rule.
struct CubeFunctor {
    int t = 0;
    std::vector<CxPtr> at;                          // indexed by bitmask
    std::map<std::pair<unsigned, int>, ChainMap> step;  // (mask, k) : C_mask -> C_{mask|1<<k}
};
CxPtr cube_total(const CubeFunctor& f);

/// Deterministic generator utilities for property tests and the
/// acceptance suite.
struct Rng {
    unsigned long long state;
    explicit Rng(unsigned long long seed) : state(seed) {}
    unsigned long long next();
    /// uniform in [0, n)
    int below(int n);
    Int pick(std::initializer_list<Int> xs);
};

/// Random complex with known homology: a sum of elementary pieces
/// conjugated by unimodular changes of basis.  `expected` receives the
/// homology record per degree.
CxPtr random_complex(Rng& rng, int max_deg, int max_rank,
                     std::vector<HomologyRecord>* expected = nullptr);

/// Random quasi-isomorphism (inclusion of a complex into itself plus
/// acyclic padding, conjugated).
ChainMap random_quasi_iso(Rng& rng, const CxPtr& src);

/// Random commuting double complex of bounded size per bidegree.
MultiComplex random_quoted_double(Rng& rng, int max_rank);

}  // namespace relcx::homalg
