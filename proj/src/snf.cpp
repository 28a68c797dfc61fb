#include "relcx/snf.hpp"

#include <algorithm>
#include <cstdlib>

namespace relcx {
namespace {

template <class T>
using Dense = std::vector<std::vector<T>>;

template <class T>
struct SmithWork {
    Dense<T> s;           // current matrix, reduced in place
    Dense<T> basis;       // columns tracked through column ops (V: s = ... a V)
    bool track_basis = false;

    int rows() const { return static_cast<int>(s.size()); }
    int cols() const { return s.empty() ? 0 : static_cast<int>(s[0].size()); }

    void swap_rows(int i, int j) { std::swap(s[i], s[j]); }
    void swap_cols(int i, int j) {
        for (auto& row : s) std::swap(row[i], row[j]);
        if (track_basis)
            for (auto& row : basis) std::swap(row[i], row[j]);
    }
    void addmul_row(int dst, int src, const T& c) {
        for (int k = 0; k < cols(); ++k) s[dst][k] = num_add(s[dst][k], num_mul(c, s[src][k]));
    }
    void addmul_col(int dst, int src, const T& c) {
        for (int i = 0; i < rows(); ++i) s[i][dst] = num_add(s[i][dst], num_mul(c, s[i][src]));
        if (track_basis)
            for (auto& row : basis) row[dst] = num_add(row[dst], num_mul(c, row[src]));
    }
    void negate_row(int i) {
        for (auto& v : s[i]) v = num_sub(T(0), v);
    }
};

// Full Smith reduction with pivot selection by minimal absolute value.
// Produces diagonal entries in divisibility order.
template <class T>
void smith_reduce(SmithWork<T>& w) {
    const int m = w.rows(), n = w.cols();
    int t = 0;
    for (; t < std::min(m, n); ++t) {
        // pick the nonzero entry of minimal |.| in the remaining block
        int pr = -1, pc = -1;
        T best(0);
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j)
                if (!num_is_zero(w.s[i][j])) {
                    T a = num_abs(w.s[i][j]);
                    if (pr < 0 || a < best) { best = a; pr = i; pc = j; }
                }
        if (pr < 0) break;
        w.swap_rows(t, pr);
        w.swap_cols(t, pc);
        bool again = true;
        while (again) {
            again = false;
            for (int i = t + 1; i < m; ++i)
                if (!num_is_zero(w.s[i][t])) {
                    T q = num_div(w.s[i][t], w.s[t][t]);
                    if (!num_is_zero(q)) w.addmul_row(i, t, num_sub(T(0), q));
                    if (!num_is_zero(w.s[i][t])) { w.swap_rows(t, i); again = true; }
                }
            for (int j = t + 1; j < n; ++j)
                if (!num_is_zero(w.s[t][j])) {
                    T q = num_div(w.s[t][j], w.s[t][t]);
                    if (!num_is_zero(q)) w.addmul_col(j, t, num_sub(T(0), q));
                    if (!num_is_zero(w.s[t][j])) { w.swap_cols(t, j); again = true; }
                }
        }
        if (w.s[t][t] < T(0)) w.negate_row(t);
    }
    // enforce divisibility chain d_1 | d_2 | ...
    for (int i = 0; i + 1 < t; ++i)
        for (int j = i + 1; j < t; ++j)
            if (!num_divides(w.s[i][i], w.s[j][j])) {
                // fold s[j][j] into column i and redo the 2x2 corner
                w.addmul_col(i, j, T(1));
                // clears via another local reduction pass over {i,j}
                while (!num_is_zero(w.s[j][i])) {
                    T q = num_div(w.s[i][i], w.s[j][i]);
                    if (!num_is_zero(q)) w.addmul_row(i, j, num_sub(T(0), q));
                    if (num_is_zero(w.s[i][i])) { w.swap_rows(i, j); continue; }
                    std::swap(w.s[i], w.s[j]);
                }
                // now row j has entries in cols i and j; clear col entries
                while (!num_is_zero(w.s[i][j])) {
                    T q = num_div(w.s[i][j], w.s[i][i]);
                    if (!num_is_zero(q)) w.addmul_col(j, i, num_sub(T(0), q));
                    if (!num_is_zero(w.s[i][j])) w.swap_cols(i, j);
                }
                if (w.s[i][i] < T(0)) w.negate_row(i);
                if (w.s[j][j] < T(0)) w.negate_row(j);
            }
}

template <class T>
Dense<T> to_dense(const SparseMat& a) {
    return a.dense<T>();
}

template <class T>
SmithSummary summary_impl(const SparseMat& a) {
    SmithWork<T> w{to_dense<T>(a), {}, false};
    smith_reduce(w);
    SmithSummary out;
    int lim = std::min(w.rows(), w.cols());
    for (int i = 0; i < lim; ++i) {
        if (num_is_zero(w.s[i][i])) break;
        out.divisors.push_back(num_to_long(w.s[i][i]));
    }
    return out;
}

template <class T>
std::vector<std::vector<Int>> kernel_impl(const SparseMat& a) {
    SmithWork<T> w;
    w.s = to_dense<T>(a);
    w.track_basis = true;
    const int n = a.cols();
    w.basis.assign(n, std::vector<T>(n, T(0)));
    for (int i = 0; i < n; ++i) w.basis[i][i] = T(1);
    smith_reduce(w);
    int rank = 0;
    int lim = std::min(a.rows(), n);
    while (rank < lim && !num_is_zero(w.s[rank][rank])) ++rank;
    std::vector<std::vector<Int>> out;
    for (int j = rank; j < n; ++j) {
        std::vector<Int> col(n);
        for (int i = 0; i < n; ++i) col[i] = num_to_long(w.basis[i][j]);
        out.push_back(std::move(col));
    }
    return out;
}

// Solve a x = b by reducing [a | b] with column ops restricted to a's part.
// We use SNF of a with both transforms tracked implicitly: reduce rows of b
// alongside, then back-substitute through the diagonal.
template <class T>
std::optional<std::vector<Int>> solve_impl(const SparseMat& a, std::span<const Int> b) {
    const int m = a.rows(), n = a.cols();
    SmithWork<T> w;
    w.s = to_dense<T>(a);
    w.track_basis = true;
    w.basis.assign(n, std::vector<T>(n, T(0)));
    for (int i = 0; i < n; ++i) w.basis[i][i] = T(1);
    // track row ops on rhs: keep an augmented column updated by hand
    std::vector<T> rhs(m);
    for (int i = 0; i < m; ++i) rhs[i] = num_from<T>(b[i]);

    // re-run the reduction but mirror row operations onto rhs; easiest is a
    // local copy of smith_reduce with hooks, so we inline a variant here.
    int t = 0;
    auto swap_rows = [&](int i, int j) { w.swap_rows(i, j); std::swap(rhs[i], rhs[j]); };
    auto addmul_row = [&](int dst, int src, const T& c) {
        w.addmul_row(dst, src, c);
        rhs[dst] = num_add(rhs[dst], num_mul(c, rhs[src]));
    };
    for (; t < std::min(m, n); ++t) {
        int pr = -1, pc = -1;
        T best(0);
        for (int i = t; i < m; ++i)
            for (int j = t; j < n; ++j)
                if (!num_is_zero(w.s[i][j])) {
                    T v = num_abs(w.s[i][j]);
                    if (pr < 0 || v < best) { best = v; pr = i; pc = j; }
                }
        if (pr < 0) break;
        swap_rows(t, pr);
        w.swap_cols(t, pc);
        bool again = true;
        while (again) {
            again = false;
            for (int i = t + 1; i < m; ++i)
                if (!num_is_zero(w.s[i][t])) {
                    T q = num_div(w.s[i][t], w.s[t][t]);
                    if (!num_is_zero(q)) addmul_row(i, t, num_sub(T(0), q));
                    if (!num_is_zero(w.s[i][t])) { swap_rows(t, i); again = true; }
                }
            for (int j = t + 1; j < n; ++j)
                if (!num_is_zero(w.s[t][j])) {
                    T q = num_div(w.s[t][j], w.s[t][t]);
                    if (!num_is_zero(q)) w.addmul_col(j, t, num_sub(T(0), q));
                    if (!num_is_zero(w.s[t][j])) { w.swap_cols(t, j); again = true; }
                }
        }
    }
    // system is now  diag * y = rhs  with x = basis * y
    std::vector<T> y(n, T(0));
    for (int i = 0; i < m; ++i) {
        if (i < t && !num_is_zero(w.s[i][i])) {
            if (!num_divides(w.s[i][i], rhs[i])) return std::nullopt;
            y[i] = num_div(rhs[i], w.s[i][i]);
        } else if (!num_is_zero(rhs[i])) {
            return std::nullopt;
        }
    }
    std::vector<Int> x(n, 0);
    for (int i = 0; i < n; ++i) {
        T acc(0);
        for (int j = 0; j < n; ++j) acc = num_add(acc, num_mul(w.basis[i][j], y[j]));
        x[i] = num_to_long(acc);
    }
    return x;
}

}  // namespace

SmithSummary smith_summary(const SparseMat& a) {
    try {
        return summary_impl<Int>(a);
    } catch (const OverflowError&) {
        return summary_impl<mpz_class>(a);
    }
}

SmithSummary smith_summary_naive(const SparseMat& a) {
    // first-nonzero pivoting, no size heuristics; mpz throughout
    auto s = a.dense<mpz_class>();
    const int m = a.rows(), n = a.cols();
    int t = 0;
    for (; t < std::min(m, n); ++t) {
        int pr = -1, pc = -1;
        for (int j = t; j < n && pr < 0; ++j)
            for (int i = t; i < m; ++i)
                if (s[i][j] != 0) { pr = i; pc = j; break; }
        if (pr < 0) break;
        std::swap(s[t], s[pr]);
        for (auto& row : s) std::swap(row[t], row[pc]);
        bool again = true;
        while (again) {
            again = false;
            for (int i = t + 1; i < m; ++i)
                while (s[i][t] != 0) {
                    mpz_class q = s[i][t] / s[t][t];
                    for (int k = t; k < n; ++k) s[i][k] -= q * s[t][k];
                    if (s[i][t] != 0) std::swap(s[t], s[i]);
                }
            for (int j = t + 1; j < n; ++j)
                while (s[t][j] != 0) {
                    mpz_class q = s[t][j] / s[t][t];
                    for (int i = t; i < m; ++i) s[i][j] -= q * s[i][t];
                    if (s[t][j] != 0) {
                        for (auto& row : s) std::swap(row[t], row[j]);
                        again = true;
                    }
                }
        }
    }
    // divisibility fix-up by folding and re-reducing pairs
    for (int i = 0; i < t; ++i)
        for (int j = i + 1; j < t; ++j) {
            if (s[i][i] == 0 || s[j][j] == 0) continue;
            mpz_class g, x, y;
            mpz_gcdext(g.get_mpz_t(), x.get_mpz_t(), y.get_mpz_t(), s[i][i].get_mpz_t(),
                       s[j][j].get_mpz_t());
            mpz_class l = s[i][i] / g * s[j][j];
            s[i][i] = g;
            s[j][j] = l;
        }
    SmithSummary out;
    for (int i = 0; i < t; ++i) {
        if (s[i][i] == 0) break;
        out.divisors.push_back(std::abs(s[i][i].get_si()));
    }
    return out;
}

int rank_of(const SparseMat& a) { return smith_summary(a).rank(); }

int rational_rank(const SparseMat& a) {
    auto m = a.dense<mpz_class>();
    const int rows = a.rows(), cols = a.cols();
    int rank = 0;
    mpz_class prev(1);
    for (int c = 0; c < cols && rank < rows; ++c) {
        int piv = -1;
        for (int r = rank; r < rows; ++r)
            if (m[r][c] != 0) { piv = r; break; }
        if (piv < 0) continue;
        std::swap(m[rank], m[piv]);
        for (int r = rank + 1; r < rows; ++r) {
            for (int k = c + 1; k < cols; ++k)
                m[r][k] = (m[rank][c] * m[r][k] - m[r][c] * m[rank][k]) / prev;
            m[r][c] = 0;
        }
        prev = m[rank][c];
        ++rank;
    }
    return rank;
}

std::vector<std::vector<Int>> kernel_basis(const SparseMat& a) {
    try {
        return kernel_impl<Int>(a);
    } catch (const OverflowError&) {
        return kernel_impl<mpz_class>(a);
    }
}

std::optional<std::vector<Int>> solve(const SparseMat& a, std::span<const Int> b) {
    if (static_cast<int>(b.size()) != a.rows())
        throw std::invalid_argument("solve: rhs size mismatch");
    try {
        return solve_impl<Int>(a, b);
    } catch (const OverflowError&) {
        return solve_impl<mpz_class>(a, b);
    }
}

HomologyRecord homology_at(const SparseMat& prev, const SparseMat& next, int degree) {
    if (prev.rows() != next.cols())
        throw std::invalid_argument("homology_at: mismatched differentials");
    HomologyRecord rec;
    rec.degree = degree;
    auto ker = kernel_basis(next);
    const int k = static_cast<int>(ker.size());
    // express the image of `prev` in kernel coordinates and take its cokernel
    SparseMat kmat(prev.rows(), k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < prev.rows(); ++i)
            if (ker[j][i] != 0) kmat.add(i, j, ker[j][i]);
    SparseMat rel(k, prev.cols());
    for (int c = 0; c < prev.cols(); ++c) {
        auto col = prev.column(c);
        auto x = solve(kmat, col);
        if (!x) throw InvariantError("homology_at: image not contained in kernel (dd != 0?)");
        for (int i = 0; i < k; ++i)
            if ((*x)[i] != 0) rel.add(i, c, (*x)[i]);
    }
    auto sm = smith_summary(rel);
    rec.betti = k - sm.rank();
    for (Int d : sm.divisors)
        if (d != 1) rec.torsion.push_back(d);
    return rec;
}

}  // namespace relcx
