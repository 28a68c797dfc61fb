#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "relcx/ints.hpp"

namespace relcx {

struct Triplet {
    int row = 0;
    int col = 0;
    Int val = 0;
    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Sparse integer matrix stored as column-major triplet lists, kept in
/// canonical form (sorted by (col,row), merged, zero-free) so equality of
/// maps is literal data equality.
class SparseMat {
public:
    SparseMat() = default;
    SparseMat(int rows, int cols) : rows_(rows), cols_(cols) {}

    static SparseMat identity(int n) {
        SparseMat m(n, n);
        for (int i = 0; i < n; ++i) m.entries_.push_back({i, i, 1});
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    void add(int r, int c, Int v);
    void add_block(const SparseMat& other, int row_off, int col_off, Int scale = 1);

    const std::vector<Triplet>& entries() const { canonicalize(); return entries_; }
    bool is_zero() const { canonicalize(); return entries_.empty(); }

    SparseMat operator*(const SparseMat& rhs) const;
    SparseMat operator+(const SparseMat& rhs) const;
    SparseMat operator-(const SparseMat& rhs) const;
    SparseMat scaled(Int s) const;
    SparseMat transposed() const;

    friend bool operator==(const SparseMat& a, const SparseMat& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        a.canonicalize();
        b.canonicalize();
        return a.entries_ == b.entries_;
    }

    std::vector<Int> apply(std::span<const Int> v) const;
    /// Column `c` as a dense vector.
    std::vector<Int> column(int c) const;

    template <class T>
    std::vector<std::vector<T>> dense() const {
        canonicalize();
        std::vector<std::vector<T>> m(rows_, std::vector<T>(cols_, T(0)));
        for (const auto& t : entries_) m[t.row][t.col] = num_from<T>(t.val);
        return m;
    }

private:
    void canonicalize() const;

    int rows_ = 0;
    int cols_ = 0;
    mutable std::vector<Triplet> entries_;
    mutable bool dirty_ = false;
};

}  // namespace relcx
