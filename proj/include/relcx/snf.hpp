#pragma once

#include <optional>
#include <vector>

#include "relcx/sparse.hpp"

namespace relcx {

/// Betti number and elementary divisors (> 1) of one homology group.
struct HomologyRecord {
    int degree = 0;
    int betti = 0;
    std::vector<Int> torsion;
    friend bool operator==(const HomologyRecord&, const HomologyRecord&) = default;
};

/// Elementary divisors of an integer matrix, in divisibility order,
/// without the trailing zeros.  rank == divisors.size().
struct SmithSummary {
    std::vector<Int> divisors;
    int rank() const { return static_cast<int>(divisors.size()); }
};

SmithSummary smith_summary(const SparseMat& a);

/// Deliberately plain row/column reduction without pivot-size heuristics;
/// kept as an independent implementation for cross-checking.
SmithSummary smith_summary_naive(const SparseMat& a);

int rank_of(const SparseMat& a);

/// Rank over Q by Bareiss fraction-free elimination; independent of the
/// Smith-normal-form path.
int rational_rank(const SparseMat& a);

/// Integer column basis of { x : a x = 0 }.
std::vector<std::vector<Int>> kernel_basis(const SparseMat& a);

/// One integer solution of a x = b, if any.
std::optional<std::vector<Int>> solve(const SparseMat& a, std::span<const Int> b);

/// Homology at the junction  prev: C^{p-1} -> C^p,  next: C^p -> C^{p+1}.
HomologyRecord homology_at(const SparseMat& prev, const SparseMat& next, int degree);

}  // namespace relcx
