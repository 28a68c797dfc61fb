#include "relcx/sparse.hpp"

#include <map>
#include <stdexcept>

namespace relcx {

void SparseMat::add(int r, int c, Int v) {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
        throw std::out_of_range("SparseMat::add: index out of range");
    if (v == 0) return;
    entries_.push_back({r, c, v});
    dirty_ = true;
}

void SparseMat::add_block(const SparseMat& other, int row_off, int col_off, Int scale) {
    if (scale == 0) return;
    other.canonicalize();
    for (const auto& t : other.entries_)
        add(t.row + row_off, t.col + col_off, checked_mul(t.val, scale));
}

void SparseMat::canonicalize() const {
    if (!dirty_) return;
    std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
        return a.col != b.col ? a.col < b.col : a.row < b.row;
    });
    std::vector<Triplet> merged;
    merged.reserve(entries_.size());
    for (const auto& t : entries_) {
        if (!merged.empty() && merged.back().col == t.col && merged.back().row == t.row)
            merged.back().val = checked_add(merged.back().val, t.val);
        else
            merged.push_back(t);
    }
    std::erase_if(merged, [](const Triplet& t) { return t.val == 0; });
    entries_ = std::move(merged);
    dirty_ = false;
}

SparseMat SparseMat::operator*(const SparseMat& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("SparseMat: size mismatch in product");
    canonicalize();
    rhs.canonicalize();
    // rows of *this grouped by column index for lookup
    std::vector<std::vector<std::pair<int, Int>>> by_col(cols_);
    for (const auto& t : entries_) by_col[t.col].push_back({t.row, t.val});
    SparseMat out(rows_, rhs.cols_);
    for (const auto& t : rhs.entries_)
        for (const auto& [r, v] : by_col[t.row])
            out.add(r, t.col, checked_mul(v, t.val));
    out.canonicalize();
    return out;
}

SparseMat SparseMat::operator+(const SparseMat& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw std::invalid_argument("SparseMat: size mismatch in sum");
    SparseMat out = *this;
    rhs.canonicalize();
    for (const auto& t : rhs.entries_) out.add(t.row, t.col, t.val);
    out.canonicalize();
    return out;
}

SparseMat SparseMat::operator-(const SparseMat& rhs) const { return *this + rhs.scaled(-1); }

SparseMat SparseMat::scaled(Int s) const {
    canonicalize();
    SparseMat out(rows_, cols_);
    if (s == 0) return out;
    for (const auto& t : entries_) out.entries_.push_back({t.row, t.col, checked_mul(t.val, s)});
    return out;
}

SparseMat SparseMat::transposed() const {
    canonicalize();
    SparseMat out(cols_, rows_);
    for (const auto& t : entries_) out.add(t.col, t.row, t.val);
    out.canonicalize();
    return out;
}

std::vector<Int> SparseMat::apply(std::span<const Int> v) const {
    if (static_cast<int>(v.size()) != cols_)
        throw std::invalid_argument("SparseMat::apply: size mismatch");
    canonicalize();
    std::vector<Int> out(rows_, 0);
    for (const auto& t : entries_)
        out[t.row] = checked_add(out[t.row], checked_mul(t.val, v[t.col]));
    return out;
}

std::vector<Int> SparseMat::column(int c) const {
    canonicalize();
    std::vector<Int> out(rows_, 0);
    for (const auto& t : entries_)
        if (t.col == c) out[t.row] = t.val;
    return out;
}

}  // namespace relcx
