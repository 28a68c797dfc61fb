#include "relcx/complex.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace relcx::homalg {

GenId GenId::chain(const std::vector<int>& c, const GenId& inner) {
    std::ostringstream os;
    os << '{';
    for (size_t i = 0; i < c.size(); ++i) {
        if (i) os << ' ';
        os << c[i];
    }
    os << '}' << inner.s_;
    return GenId(os.str());
}

GenId GenId::tensor(const std::vector<GenId>& parts) {
    std::ostringstream os;
    os << '(';
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) os << " & ";
        os << parts[i].s_;
    }
    os << ')';
    return GenId(os.str());
}

int FreeComplex::Builder::add_gen(int deg, GenId id) {
    auto& v = gens_[deg];
    v.push_back(std::move(id));
    return static_cast<int>(v.size()) - 1;
}

void FreeComplex::Builder::add_d(int src_deg, int src_idx, int dst_idx, Int coeff) {
    if (coeff == 0) return;
    d_[src_deg].push_back({dst_idx, src_idx, coeff});
}

CxPtr FreeComplex::Builder::build() {
    auto cx = std::shared_ptr<FreeComplex>(new FreeComplex());
    if (gens_.empty()) {
        cx->lo_ = 0;
        cx->hi_ = -1;
        return cx;
    }
    cx->lo_ = gens_.begin()->first;
    cx->hi_ = gens_.rbegin()->first;
    cx->basis_.resize(cx->hi_ - cx->lo_ + 1);
    for (auto& [deg, v] : gens_) {
        std::set<std::string> seen;
        for (const auto& g : v)
            if (!seen.insert(g.str()).second)
                throw InvariantError("FreeComplex: duplicate generator id in degree " +
                                     std::to_string(deg) + ": " + g.str());
        cx->basis_[deg - cx->lo_] = std::move(v);
    }
    cx->d_.resize(std::max(0, cx->hi_ - cx->lo_));
    for (int p = cx->lo_; p < cx->hi_; ++p) {
        SparseMat m(cx->dim(p + 1), cx->dim(p));
        if (auto it = d_.find(p); it != d_.end())
            for (const auto& t : it->second) m.add(t.row, t.col, t.val);
        cx->d_[p - cx->lo_] = std::move(m);
    }
    for (auto& [deg, trips] : d_)
        if ((deg < cx->lo_ || deg >= cx->hi_) && !trips.empty())
            throw InvariantError("FreeComplex: differential out of degree range");
    for (int p = cx->lo_; p + 1 < cx->hi_; ++p) {
        if (!(cx->d(p + 1) * cx->d(p)).is_zero())
            throw InvariantError("FreeComplex: dd != 0 at degree " + std::to_string(p));
    }
    return cx;
}

int FreeComplex::total_dim() const {
    int n = 0;
    for (const auto& b : basis_) n += static_cast<int>(b.size());
    return n;
}

const std::vector<GenId>& FreeComplex::basis(int p) const {
    static const std::vector<GenId> empty;
    if (p < lo_ || p > hi_) return empty;
    return basis_[p - lo_];
}

SparseMat FreeComplex::d(int p) const {
    if (p < lo_ || p >= hi_) return SparseMat(dim(p + 1), dim(p));
    return d_[p - lo_];
}

std::optional<int> FreeComplex::index_of(int p, const GenId& id) const {
    if (p < lo_ || p > hi_) return std::nullopt;
    if (index_.empty()) index_.resize(basis_.size());
    auto& m = index_[p - lo_];
    if (m.empty() && !basis_[p - lo_].empty())
        for (int i = 0; i < dim(p); ++i) m[basis_[p - lo_][i].str()] = i;
    auto it = m.find(id.str());
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::vector<HomologyRecord> FreeComplex::homology_all() const {
    std::vector<HomologyRecord> out;
    for (int p = lo_; p <= hi_; ++p) out.push_back(homology(p));
    return out;
}

bool FreeComplex::is_acyclic() const {
    for (int p = lo_; p <= hi_; ++p) {
        auto h = homology(p);
        if (h.betti != 0 || !h.torsion.empty()) return false;
    }
    return true;
}

ChainMap::ChainMap(CxPtr src, CxPtr dst, int shift, std::map<int, SparseMat> mats, bool validate)
    : src_(std::move(src)), dst_(std::move(dst)), shift_(shift), mats_(std::move(mats)) {
    for (auto it = mats_.begin(); it != mats_.end();) {
        const auto& [p, m] = *it;
        if (m.rows() != dst_->dim(p + shift_) || m.cols() != src_->dim(p))
            throw InvariantError("ChainMap: matrix shape mismatch at degree " + std::to_string(p));
        if (m.is_zero())
            it = mats_.erase(it);
        else
            ++it;
    }
    if (validate) check_commutes();
}

void ChainMap::check_commutes() const {
    for (int p = src_->lo() - 1; p <= src_->hi(); ++p) {
        SparseMat lhs = dst_->d(p + shift_) * at(p);
        SparseMat rhs = at(p + 1) * src_->d(p);
        if (!(lhs == rhs))
            throw InvariantError("ChainMap: does not commute with differentials at degree " +
                                 std::to_string(p));
    }
}

ChainMap ChainMap::zero(CxPtr src, CxPtr dst, int shift) {
    return ChainMap(std::move(src), std::move(dst), shift, {}, false);
}

ChainMap ChainMap::identity(CxPtr cx) {
    std::map<int, SparseMat> mats;
    for (int p = cx->lo(); p <= cx->hi(); ++p)
        if (cx->dim(p) > 0) mats.emplace(p, SparseMat::identity(cx->dim(p)));
    return ChainMap(cx, cx, 0, std::move(mats), false);
}

SparseMat ChainMap::at(int p) const {
    auto it = mats_.find(p);
    if (it != mats_.end()) return it->second;
    return SparseMat(dst_ ? dst_->dim(p + shift_) : 0, src_ ? src_->dim(p) : 0);
}

ChainMap ChainMap::scaled(Int s) const {
    std::map<int, SparseMat> mats;
    for (const auto& [p, m] : mats_) mats.emplace(p, m.scaled(s));
    return ChainMap(src_, dst_, shift_, std::move(mats), false);
}

ChainMap compose(const ChainMap& g, const ChainMap& f) {
    if (g.src() != f.dst())
        throw std::invalid_argument("ChainMap compose: middle complexes differ");
    std::map<int, SparseMat> mats;
    for (int p = f.src()->lo(); p <= f.src()->hi(); ++p) {
        SparseMat m = g.at(p + f.shift()) * f.at(p);
        if (!m.is_zero()) mats.emplace(p, std::move(m));
    }
    return ChainMap(f.src(), g.dst(), f.shift() + g.shift(), std::move(mats), false);
}

ChainMap operator+(const ChainMap& a, const ChainMap& b) {
    if (a.src() != b.src() || a.dst() != b.dst() || a.shift() != b.shift())
        throw std::invalid_argument("ChainMap sum: incompatible maps");
    std::map<int, SparseMat> mats;
    for (int p = a.src()->lo(); p <= a.src()->hi(); ++p) {
        SparseMat m = a.at(p) + b.at(p);
        if (!m.is_zero()) mats.emplace(p, std::move(m));
    }
    return ChainMap(a.src(), a.dst(), a.shift(), std::move(mats), false);
}

ChainMap operator-(const ChainMap& a, const ChainMap& b) { return a + b.scaled(-1); }

bool operator==(const ChainMap& a, const ChainMap& b) {
    if (a.src() != b.src() || a.dst() != b.dst() || a.shift() != b.shift()) return false;
    for (int p = a.src()->lo(); p <= a.src()->hi(); ++p)
        if (!(a.at(p) == b.at(p))) return false;
    return true;
}

bool ChainMap::is_zero() const {
    for (const auto& [p, m] : mats_)
        if (!m.is_zero()) return false;
    return true;
}

CxPtr shift(const CxPtr& c, int k) {
    FreeComplex::Builder b;
    for (int p = c->lo(); p <= c->hi(); ++p)
        for (const auto& g : c->basis(p)) b.add_gen(p - k, g);
    Int sign = (k % 2 == 0) ? 1 : -1;
    for (int p = c->lo(); p < c->hi(); ++p) {
        SparseMat dm = c->d(p);
        for (const auto& t : dm.entries()) b.add_d(p - k, t.col, t.row, sign * t.val);
    }
    return b.build();
}

ChainMap shift_iso(const CxPtr& c, const CxPtr& shifted, int k) {
    std::map<int, SparseMat> mats;
    for (int p = c->lo(); p <= c->hi(); ++p) {
        if (c->dim(p) == 0) continue;
        Int sign = ((static_cast<long long>(k) * p) % 2 == 0) ? 1 : -1;
        mats.emplace(p, SparseMat::identity(c->dim(p)).scaled(sign));
    }
    return ChainMap(c, shifted, -k, std::move(mats));
}

SumComplex direct_sum(const std::vector<CxPtr>& parts, const std::string& tag_prefix) {
    FreeComplex::Builder b;
    // per part and degree, offset in the sum
    std::vector<std::map<int, int>> offset(parts.size());
    std::map<int, int> filled;
    for (size_t i = 0; i < parts.size(); ++i)
        for (int p = parts[i]->lo(); p <= parts[i]->hi(); ++p) {
            offset[i][p] = filled[p];
            for (const auto& g : parts[i]->basis(p))
                b.add_gen(p, GenId::tagged(tag_prefix + std::to_string(i), g));
            filled[p] += parts[i]->dim(p);
        }
    for (size_t i = 0; i < parts.size(); ++i)
        for (int p = parts[i]->lo(); p < parts[i]->hi(); ++p) {
            SparseMat dm = parts[i]->d(p);
            for (const auto& t : dm.entries())
                b.add_d(p, offset[i][p] + t.col, offset[i][p + 1] + t.row, t.val);
        }
    SumComplex out;
    out.total = b.build();
    for (size_t i = 0; i < parts.size(); ++i) {
        std::map<int, SparseMat> in_m, pr_m;
        for (int p = parts[i]->lo(); p <= parts[i]->hi(); ++p) {
            SparseMat in(out.total->dim(p), parts[i]->dim(p));
            SparseMat pr(parts[i]->dim(p), out.total->dim(p));
            for (int j = 0; j < parts[i]->dim(p); ++j) {
                in.add(offset[i][p] + j, j, 1);
                pr.add(j, offset[i][p] + j, 1);
            }
            in_m.emplace(p, std::move(in));
            pr_m.emplace(p, std::move(pr));
        }
        out.inject.emplace_back(parts[i], out.total, 0, std::move(in_m));
        out.project.emplace_back(out.total, parts[i], 0, std::move(pr_m));
    }
    return out;
}

ConeComplex cone(const ChainMap& f) {
    if (f.shift() != 0) throw std::invalid_argument("cone: map must be degree-preserving");
    const auto& A = f.src();
    const auto& C = f.dst();
    FreeComplex::Builder b;
    std::map<int, int> a_off, c_off;  // offsets of the two parts per cone degree
    for (int p = A->lo() - 1; p <= std::max(A->hi(), C->hi()); ++p) {
        int off = 0;
        for (const auto& g : A->basis(p + 1)) {
            b.add_gen(p, GenId::tagged("cs", g));
            ++off;
        }
        a_off[p] = 0;
        c_off[p] = off;
        for (const auto& g : C->basis(p)) b.add_gen(p, GenId::tagged("cd", g));
    }
    // d(a, c) = (-d_A a, f(a) + d_C c)
    for (int p = A->lo() - 1; p <= std::max(A->hi(), C->hi()); ++p) {
        SparseMat da = A->d(p + 1), mf = f.at(p + 1), dc = C->d(p);
        for (const auto& t : da.entries())
            b.add_d(p, a_off[p] + t.col, a_off[p + 1] + t.row, -t.val);
        for (const auto& t : mf.entries())
            b.add_d(p, a_off[p] + t.col, c_off[p + 1] + t.row, t.val);
        for (const auto& t : dc.entries())
            b.add_d(p, c_off[p] + t.col, c_off[p + 1] + t.row, t.val);
    }
    ConeComplex out;
    out.total = b.build();
    CxPtr a1 = shift(A, 1);
    std::map<int, SparseMat> proj, incl;
    for (int p = out.total->lo(); p <= out.total->hi(); ++p) {
        SparseMat pm(a1->dim(p), out.total->dim(p));
        for (int j = 0; j < A->dim(p + 1); ++j) pm.add(j, a_off[p] + j, 1);
        if (!pm.is_zero()) proj.emplace(p, std::move(pm));
    }
    for (int p = C->lo(); p <= C->hi(); ++p) {
        SparseMat im(out.total->dim(p), C->dim(p));
        for (int j = 0; j < C->dim(p); ++j) im.add(c_off[p] + j, j, 1);
        if (!im.is_zero()) incl.emplace(p, std::move(im));
    }
    out.to_src_shift = ChainMap(out.total, a1, 0, std::move(proj));
    out.from_dst = ChainMap(C, out.total, 0, std::move(incl));
    return out;
}

bool is_quasi_iso(const ChainMap& f) {
    ChainMap g = f;
    if (f.shift() != 0) {
        // straighten via the sign iso onto the shifted target
        CxPtr sh = shift(f.dst(), -f.shift());
        ChainMap iso = shift_iso(f.dst(), sh, -f.shift());
        g = compose(iso, f);
    }
    return cone(g).total->is_acyclic();
}

namespace {

struct RouteState {
    CxPtr at;
    int shift = 0;
    bool rational = false;
};

// transports columns of `vecs` (cycles in degree `deg` of state.at) through one leg
bool transport(const ZigzagLeg& leg, RouteState& st, int& deg, SparseMat& vecs,
               std::string& err) {
    if (!leg.backward) {
        if (leg.map.src() != st.at) { err = "route mismatch"; return false; }
        vecs = leg.map.at(deg) * vecs;
        deg += leg.map.shift();
        st.at = leg.map.dst();
        return true;
    }
    if (leg.map.dst() != st.at) { err = "route mismatch (backward)"; return false; }
    const auto& E = leg.map.src();
    int q = deg - leg.map.shift();
    // solve  [T  d_D][x;y] = v,  [d_E 0][x;y] = 0  for each column v
    SparseMat T = leg.map.at(q);
    SparseMat dD = st.at->d(deg - 1);
    SparseMat dE = E->d(q);
    const int xs = E->dim(q), ys = st.at->dim(deg - 1);
    SparseMat sys(st.at->dim(deg) + E->dim(q + 1), xs + ys);
    sys.add_block(T, 0, 0);
    sys.add_block(dD, 0, xs);
    sys.add_block(dE, st.at->dim(deg), 0);
    SparseMat rhs(sys.rows(), vecs.cols());
    rhs.add_block(vecs, 0, 0);
    SparseMat lifted(xs, vecs.cols());
    for (int c = 0; c < vecs.cols(); ++c) {
        auto sol = solve(sys, rhs.column(c));
        if (!sol) { err = "homology inverse: no integral lift"; return false; }
        for (int i = 0; i < xs; ++i)
            if ((*sol)[i] != 0) lifted.add(i, c, (*sol)[i]);
    }
    vecs = std::move(lifted);
    deg = q;
    st.at = E;
    return true;
}

}  // namespace

HomologyCompareResult equal_on_homology(const std::vector<ZigzagLeg>& route_a,
                                        const std::vector<ZigzagLeg>& route_b) {
    HomologyCompareResult res;
    auto route_src = [](const std::vector<ZigzagLeg>& r) {
        return r.front().backward ? r.front().map.dst() : r.front().map.src();
    };
    CxPtr src = route_src(route_a);
    if (src != route_src(route_b)) throw std::invalid_argument("equal_on_homology: sources differ");

    for (int p = src->lo(); p <= src->hi(); ++p) {
        auto ker = kernel_basis(src->d(p));
        if (ker.empty()) continue;
        SparseMat cycles(src->dim(p), static_cast<int>(ker.size()));
        for (size_t j = 0; j < ker.size(); ++j)
            for (int i = 0; i < src->dim(p); ++i)
                if (ker[j][i] != 0) cycles.add(i, static_cast<int>(j), ker[j][i]);

        auto run = [&](const std::vector<ZigzagLeg>& route, RouteState& st, int& deg,
                       SparseMat& v) -> bool {
            st.at = src;
            deg = p;
            v = cycles;
            std::string err;
            for (const auto& leg : route)
                if (!transport(leg, st, deg, v, err)) {
                    res.witness = err + " at degree " + std::to_string(deg);
                    return false;
                }
            return true;
        };
        RouteState sa, sb;
        int da = p, db = p;
        SparseMat va, vb;
        if (!run(route_a, sa, da, va) || !run(route_b, sb, db, vb)) {
            res.equal = false;
            return res;
        }
        if (sa.at != sb.at || da != db)
            throw std::invalid_argument("equal_on_homology: routes end at different places");
        SparseMat diff = va - vb;
        if (diff.is_zero()) continue;
        SparseMat bnd = sa.at->d(da - 1);
        for (int c = 0; c < diff.cols(); ++c) {
            auto col = diff.column(c);
            bool zerocol = std::all_of(col.begin(), col.end(), [](Int x) { return x == 0; });
            if (zerocol) continue;
            if (!solve(bnd, col)) {
                res.equal = false;
                res.witness = "classes differ at source degree " + std::to_string(p) +
                              ", cycle #" + std::to_string(c);
                return res;
            }
        }
    }
    res.equal = true;
    return res;
}

}  // namespace relcx::homalg
