#include "relcx/homalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace relcx::homalg {

namespace {

// all generators of a complex as (deg, idx), degree-major
std::vector<std::pair<int, int>> all_gens(const CxPtr& c) {
    std::vector<std::pair<int, int>> out;
    for (int p = c->lo(); p <= c->hi(); ++p)
        for (int i = 0; i < c->dim(p); ++i) out.push_back({p, i});
    return out;
}

}  // namespace

std::optional<int> TensorComplex::find(int deg,
                                       const std::vector<std::pair<int, int>>& parts) const {
    auto it = index_map.find(parts);
    if (it == index_map.end() || it->second.first != deg) return std::nullopt;
    return it->second.second;
}

TensorComplex tensor(const std::vector<CxPtr>& factors) {
    if (factors.empty()) throw std::invalid_argument("tensor: no factors");
    const int n = static_cast<int>(factors.size());
    TensorComplex out;
    out.factors = factors;

    std::vector<std::vector<std::pair<int, int>>> gens;
    for (const auto& f : factors) gens.push_back(all_gens(f));

    // cartesian product, leftmost factor slowest; grouped by total degree
    std::map<int, std::vector<std::vector<std::pair<int, int>>>> by_deg;
    std::vector<std::pair<int, int>> cur(n);
    std::function<void(int, int)> rec = [&](int i, int deg) {
        if (i == n) {
            by_deg[deg].push_back(cur);
            return;
        }
        for (const auto& g : gens[i]) {
            cur[i] = g;
            rec(i + 1, deg + g.first);
        }
    };
    bool any_empty = std::any_of(gens.begin(), gens.end(), [](const auto& v) { return v.empty(); });
    if (!any_empty) rec(0, 0);

    FreeComplex::Builder b;
    std::map<std::vector<std::pair<int, int>>, std::pair<int, int>> index;
    for (const auto& [deg, list] : by_deg)
        for (const auto& parts : list) {
            std::vector<GenId> ids;
            for (int i = 0; i < n; ++i) ids.push_back(factors[i]->gen(parts[i].first, parts[i].second));
            int idx = b.add_gen(deg, GenId::tensor(ids));
            index[parts] = {deg, idx};
        }
    for (const auto& [parts, where] : index) {
        const auto& [deg, idx] = where;
        int suffix = 0;
        for (int i = n - 1; i >= 0; --i) {
            Int sign = (suffix % 2 == 0) ? 1 : -1;
            SparseMat dm = factors[i]->d(parts[i].first);
            for (const auto& t : dm.entries()) {
                if (t.col != parts[i].second) continue;
                auto tparts = parts;
                tparts[i] = {parts[i].first + 1, t.row};
                auto it = index.find(tparts);
                if (it == index.end()) throw InvariantError("tensor: missing target generator");
                b.add_d(deg, idx, it->second.second, sign * t.val);
            }
            suffix += parts[i].first;
        }
    }
    out.total = b.build();
    out.layout.assign(out.total->hi() - out.total->lo() + 1, {});
    for (int p = out.total->lo(); p <= out.total->hi(); ++p)
        out.layout[p - out.total->lo()].resize(out.total->dim(p));
    for (const auto& [parts, where] : index)
        out.layout[where.first - out.total->lo()][where.second] = parts;
    out.index_map = std::move(index);
    return out;
}

ChainMap tensor_map(const TensorComplex& src, const TensorComplex& dst,
                    const std::vector<ChainMap>& maps) {
    const int n = static_cast<int>(maps.size());
    if (static_cast<int>(src.factors.size()) != n || static_cast<int>(dst.factors.size()) != n)
        throw std::invalid_argument("tensor_map: factor count mismatch");
    for (const auto& m : maps)
        if (m.shift() != 0)
            throw std::invalid_argument("tensor_map: only degree-preserving maps supported");
    std::map<int, SparseMat> mats;
    for (int p = src.total->lo(); p <= src.total->hi(); ++p) {
        SparseMat m(dst.total->dim(p), src.total->dim(p));
        for (int i = 0; i < src.total->dim(p); ++i) {
            const auto& parts = src.layout[p - src.total->lo()][i];
            // expand the product of the per-factor images
            std::vector<std::pair<std::vector<std::pair<int, int>>, Int>> images{{{}, 1}};
            for (int f = 0; f < n; ++f) {
                auto col = maps[f].at(parts[f].first).column(parts[f].second);
                std::vector<std::pair<std::vector<std::pair<int, int>>, Int>> next;
                for (const auto& [pref, coeff] : images)
                    for (int r = 0; r < static_cast<int>(col.size()); ++r)
                        if (col[r] != 0) {
                            auto np = pref;
                            np.push_back({parts[f].first, r});
                            next.push_back({std::move(np), checked_mul(coeff, col[r])});
                        }
                images = std::move(next);
            }
            for (const auto& [tparts, coeff] : images) {
                auto found = dst.find(p, tparts);
                if (!found) throw InvariantError("tensor_map: image generator not in target");
                m.add(*found, i, coeff);
            }
        }
        if (!m.is_zero()) mats.emplace(p, std::move(m));
    }
    return ChainMap(src.total, dst.total, 0, std::move(mats));
}

int MultiComplex::Builder::add_gen(const MDeg& mdeg, GenId id) {
    if (static_cast<int>(mdeg.size()) != arity_)
        throw std::invalid_argument("MultiComplex: mdeg arity mismatch");
    auto& v = gens_[mdeg];
    v.push_back(std::move(id));
    return static_cast<int>(v.size()) - 1;
}

void MultiComplex::Builder::add_d(int k, const MDeg& src_mdeg, int src_idx, int dst_idx,
                                  Int coeff) {
    if (coeff == 0) return;
    if (k < 0 || k >= arity_) throw std::invalid_argument("MultiComplex: bad direction");
    if (d_.empty()) d_.resize(arity_);
    d_[k][src_mdeg].push_back({dst_idx, src_idx, coeff});
}

MultiComplex MultiComplex::Builder::build() {
    MultiComplex mc;
    mc.arity_ = arity_;
    mc.conv_ = conv_;
    mc.basis_ = std::move(gens_);
    mc.d_.resize(arity_);
    if (d_.empty()) d_.resize(arity_);
    for (int k = 0; k < arity_; ++k)
        for (auto& [m, trips] : d_[k]) {
            MDeg tgt = m;
            tgt[k] += 1;
            int rows = 0, cols = 0;
            if (auto it = mc.basis_.find(tgt); it != mc.basis_.end())
                rows = static_cast<int>(it->second.size());
            if (auto it = mc.basis_.find(m); it != mc.basis_.end())
                cols = static_cast<int>(it->second.size());
            SparseMat mat(rows, cols);
            for (const auto& t : trips) mat.add(t.row, t.col, t.val);
            if (!mat.is_zero()) mc.d_[k][m] = std::move(mat);
        }
    mc.validate();
    return mc;
}

int MultiComplex::dim(const MDeg& m) const {
    auto it = basis_.find(m);
    return it == basis_.end() ? 0 : static_cast<int>(it->second.size());
}

const std::vector<GenId>& MultiComplex::gens(const MDeg& m) const {
    static const std::vector<GenId> empty;
    auto it = basis_.find(m);
    return it == basis_.end() ? empty : it->second;
}

SparseMat MultiComplex::d(int k, const MDeg& m) const {
    MDeg tgt = m;
    tgt[k] += 1;
    auto it = d_[k].find(m);
    if (it != d_[k].end()) return it->second;
    return SparseMat(dim(tgt), dim(m));
}

void MultiComplex::validate() const {
    for (const auto& [m, gens] : basis_) {
        (void)gens;
        for (int k = 0; k < arity_; ++k) {
            MDeg mk = m;
            mk[k] += 1;
            if (!(d(k, mk) * d(k, m)).is_zero())
                throw InvariantError("MultiComplex: d_k d_k != 0");
            for (int l = k + 1; l < arity_; ++l) {
                MDeg ml = m;
                ml[l] += 1;
                SparseMat lk = d(l, mk) * d(k, m);
                SparseMat kl = d(k, ml) * d(l, m);
                bool ok = (conv_ == Conv::Commuting) ? (lk == kl) : (lk == kl.scaled(-1));
                if (!ok)
                    throw InvariantError("MultiComplex: commutation relation fails");
            }
        }
    }
}

MultiComplex MultiComplex::totalize(const ord::OrderedSurjection& f, TotOrder order) const {
    if (f.source.size() != arity_)
        throw std::invalid_argument("totalize: surjection arity mismatch");
    const int m_out = f.target.size();
    Builder b(m_out, conv_);
    // stable enumeration: iterate basis map order, keep per-(old mdeg) offsets
    std::map<MDeg, int> offset;
    std::map<MDeg, int> filled;
    auto project = [&](const MDeg& m) {
        MDeg out(m_out, 0);
        for (int k = 0; k < arity_; ++k) out[f(k)] += m[k];
        return out;
    };
    for (const auto& [m, gens] : basis_) {
        MDeg pm = project(m);
        offset[m] = filled[pm];
        for (const auto& g : gens) b.add_gen(pm, g);
        filled[pm] += static_cast<int>(gens.size());
    }
    for (const auto& [m, gens] : basis_) {
        (void)gens;
        MDeg pm = project(m);
        for (int k = 0; k < arity_; ++k) {
            Int sign = 1;
            if (conv_ == Conv::Commuting) {
                int s = 0;
                for (int j = 0; j < arity_; ++j) {
                    if (f(j) != f(k)) continue;
                    if (order == TotOrder::Forward ? (j < k) : (j > k)) s += m[j];
                }
                sign = (s % 2 == 0) ? 1 : -1;
            }
            MDeg mk = m;
            mk[k] += 1;
            SparseMat dm = d(k, m);
            for (const auto& t : dm.entries())
                b.add_d(f(k), pm, offset[m] + t.col, offset[mk] + t.row, sign * t.val);
        }
    }
    return b.build();
}

CxPtr MultiComplex::tot(TotOrder order) const {
    std::vector<int> a(arity_, 0);
    auto one = ord::FiniteOrderedSet::range(1, 1);
    auto src = ord::FiniteOrderedSet::range(1, arity_);
    MultiComplex t = totalize(ord::OrderedSurjection(src, one, a), order);
    FreeComplex::Builder b;
    std::map<MDeg, int> off;
    for (const auto& [m, gens] : t.basis_) {
        off[m] = 0;  // one block per degree in an arity-1 complex
        for (const auto& g : gens) b.add_gen(m[0], g);
    }
    for (const auto& [m, gens] : t.basis_) {
        (void)gens;
        SparseMat dm = t.d(0, m);
        for (const auto& tr : dm.entries()) b.add_d(m[0], tr.col, tr.row, tr.val);
    }
    return b.build();
}

MultiComplex tensor_multi(const std::vector<CxPtr>& factors) {
    const int n = static_cast<int>(factors.size());
    MultiComplex::Builder b(n, Conv::Commuting);
    std::vector<std::vector<std::pair<int, int>>> gens;
    for (const auto& f : factors) gens.push_back(all_gens(f));
    std::map<std::vector<std::pair<int, int>>, std::pair<MultiComplex::MDeg, int>> index;
    std::vector<std::pair<int, int>> cur(n);
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            MultiComplex::MDeg m(n);
            std::vector<GenId> ids;
            for (int k = 0; k < n; ++k) {
                m[k] = cur[k].first;
                ids.push_back(factors[k]->gen(cur[k].first, cur[k].second));
            }
            int idx = b.add_gen(m, GenId::tensor(ids));
            index[cur] = {m, idx};
            return;
        }
        for (const auto& g : gens[i]) {
            cur[i] = g;
            rec(i + 1);
        }
    };
    bool any_empty = std::any_of(gens.begin(), gens.end(), [](const auto& v) { return v.empty(); });
    if (!any_empty) rec(0);
    for (const auto& [parts, where] : index)
        for (int k = 0; k < n; ++k) {
            SparseMat dm = factors[k]->d(parts[k].first);
            for (const auto& t : dm.entries()) {
                if (t.col != parts[k].second) continue;
                auto tparts = parts;
                tparts[k] = {parts[k].first + 1, t.row};
                auto it = index.find(tparts);
                if (it == index.end()) throw InvariantError("tensor_multi: missing target");
                b.add_d(k, where.first, where.second, it->second.second, t.val);
            }
        }
    return b.build();
}

DTimes dtimes(const MultiComplex& a, const MultiComplex& b) {
    if (a.arity() != 2 || b.arity() != 2 || a.conv() != Conv::Commuting ||
        b.conv() != Conv::Commuting)
        throw std::invalid_argument("dtimes: both factors must be commuting double complexes");
    MultiComplex::Builder bd(2, Conv::Commuting);
    DTimes out;
    struct Key {
        MultiComplex::MDeg ma, mb;
        int ia, ib;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::pair<MultiComplex::MDeg, int>> index;
    for (const auto& [ma, ga] : a.basis())
        for (const auto& [mb, gb] : b.basis()) {
            MultiComplex::MDeg m{ma[0] + mb[0], ma[1] + mb[1]};
            for (int ia = 0; ia < static_cast<int>(ga.size()); ++ia)
                for (int ib = 0; ib < static_cast<int>(gb.size()); ++ib) {
                    GenId id = GenId::tensor({ga[ia], gb[ib]});
                    int idx = bd.add_gen(m, id);
                    index[{ma, mb, ia, ib}] = {m, idx};
                    out.parts[id.str()] = {ga[ia], gb[ib]};
                }
        }
    for (const auto& [key, where] : index) {
        const auto& [m, idx] = where;
        for (int k = 0; k < 2; ++k) {
            // (-1)^{b or q} d_A x 1
            int s = (k == 0) ? key.mb[0] : key.mb[1];
            Int sign = (s % 2 == 0) ? 1 : -1;
            SparseMat da = a.d(k, key.ma);
            for (const auto& t : da.entries()) {
                if (t.col != key.ia) continue;
                Key tk = key;
                tk.ma[k] += 1;
                tk.ia = t.row;
                auto it = index.find(tk);
                if (it == index.end()) throw InvariantError("dtimes: missing target");
                bd.add_d(k, m, idx, it->second.second, sign * t.val);
            }
            // 1 x d_B
            SparseMat db = b.d(k, key.mb);
            for (const auto& t : db.entries()) {
                if (t.col != key.ib) continue;
                Key tk = key;
                tk.mb[k] += 1;
                tk.ib = t.row;
                auto it = index.find(tk);
                if (it == index.end()) throw InvariantError("dtimes: missing target");
                bd.add_d(k, m, idx, it->second.second, t.val);
            }
        }
    }
    out.mc = bd.build();
    return out;
}

ChainMap u_iso(const MultiComplex& a, const MultiComplex& b, const TensorComplex& tot_ab,
               const CxPtr& tot_dtimes) {
    // per-generator bidegree lookup (ids survive totalization)
    auto mdeg_of = [](const MultiComplex& mc) {
        std::map<std::string, MultiComplex::MDeg> m;
        for (const auto& [md, gens] : mc.basis())
            for (const auto& g : gens) m[g.str()] = md;
        return m;
    };
    auto ma = mdeg_of(a), mb = mdeg_of(b);
    std::map<int, SparseMat> mats;
    const auto& src = tot_ab.total;
    for (int p = src->lo(); p <= src->hi(); ++p) {
        SparseMat m(tot_dtimes->dim(p), src->dim(p));
        for (int i = 0; i < src->dim(p); ++i) {
            const auto& parts = tot_ab.layout[p - src->lo()][i];
            const GenId& ga = tot_ab.factors[0]->gen(parts[0].first, parts[0].second);
            const GenId& gb = tot_ab.factors[1]->gen(parts[1].first, parts[1].second);
            const auto& da = ma.at(ga.str());
            const auto& db = mb.at(gb.str());
            Int sign = ((da[0] * db[1]) % 2 == 0) ? 1 : -1;
            auto idx = tot_dtimes->index_of(p, GenId::tensor({ga, gb}));
            if (!idx) throw InvariantError("u_iso: missing generator in Tot(A x B)");
            m.add(*idx, i, sign);
        }
        if (!m.is_zero()) mats.emplace(p, std::move(m));
    }
    return ChainMap(src, tot_dtimes, 0, std::move(mats));
}

const CxPtr& BarSystem::at(int lo, int hi) const {
    auto it = comp.find({lo, hi});
    if (it == comp.end())
        throw std::invalid_argument("BarSystem: missing component [" + std::to_string(lo) + "," +
                                    std::to_string(hi) + "]");
    return it->second;
}

namespace {

Elem elem_canon(Elem e) {
    std::sort(e.begin(), e.end());
    Elem out;
    for (const auto& [i, c] : e) {
        if (!out.empty() && out.back().first == i)
            out.back().second = checked_add(out.back().second, c);
        else
            out.push_back({i, c});
    }
    std::erase_if(out, [](const auto& p) { return p.second == 0; });
    return out;
}

Elem elem_scale(const Elem& e, Int s) {
    Elem out;
    for (const auto& [i, c] : e) out.push_back({i, checked_mul(c, s)});
    return out;
}

Elem elem_add(Elem a, const Elem& b) {
    a.insert(a.end(), b.begin(), b.end());
    return elem_canon(std::move(a));
}

// image of a basis vector under the differential, as an Elem in deg+1
Elem d_of(const CxPtr& c, int deg, int idx) {
    Elem out;
    SparseMat dm = c->d(deg);
    for (const auto& t : dm.entries())
        if (t.col == idx) out.push_back({t.row, t.val});
    return elem_canon(std::move(out));
}

}  // namespace

void BarSystem::validate() const {
    if (!rho) throw std::invalid_argument("BarSystem: no product");
    // Leibniz: d(x.y) = (-1)^{deg y} dx.y + x.dy, for every adjacent split
    for (int lo = 0; lo < n; ++lo)
        for (int k = lo + 1; k < n; ++k)
            for (int hi = k + 1; hi < n; ++hi) {
                const auto& L = at(lo, k);
                const auto& R = at(k, hi);
                const auto& T = at(lo, hi);
                for (auto [p, i] : all_gens(L))
                    for (auto [q, j] : all_gens(R)) {
                        Elem lhs;
                        for (const auto& [ti, tc] : rho(lo, k, hi, p, i, q, j))
                            lhs = elem_add(lhs, elem_scale(d_of(T, p + q, ti), tc));
                        Elem rhs;
                        Int sgn = (q % 2 == 0) ? 1 : -1;
                        for (const auto& [di, dc] : d_of(L, p, i))
                            rhs = elem_add(rhs, elem_scale(rho(lo, k, hi, p + 1, di, q, j),
                                                           checked_mul(sgn, dc)));
                        for (const auto& [dj, dc] : d_of(R, q, j))
                            rhs = elem_add(rhs, elem_scale(rho(lo, k, hi, p, i, q + 1, dj), dc));
                        if (elem_canon(lhs) != elem_canon(rhs))
                            throw InvariantError("BarSystem: product is not a chain map");
                    }
            }
    // associativity
    for (int lo = 0; lo < n; ++lo)
        for (int k = lo + 1; k < n; ++k)
            for (int l = k + 1; l < n; ++l)
                for (int hi = l + 1; hi < n; ++hi) {
                    const auto& A = at(lo, k);
                    const auto& B = at(k, l);
                    const auto& C = at(l, hi);
                    for (auto [p, i] : all_gens(A))
                        for (auto [q, j] : all_gens(B))
                            for (auto [r, h] : all_gens(C)) {
                                Elem left;
                                for (const auto& [m, mc] : rho(lo, k, l, p, i, q, j))
                                    left = elem_add(left,
                                                    elem_scale(rho(lo, l, hi, p + q, m, r, h), mc));
                                Elem right;
                                for (const auto& [m, mc] : rho(k, l, hi, q, j, r, h))
                                    right = elem_add(right,
                                                     elem_scale(rho(lo, k, hi, p, i, q + r, m), mc));
                                if (left != right)
                                    throw InvariantError("BarSystem: product not associative");
                            }
                }
}

std::optional<int> BarComplex::find(int deg, const BarGen& g) const {
    if (deg < total->lo() || deg > total->hi()) return std::nullopt;
    const auto& lay = layout[deg - total->lo()];
    for (int i = 0; i < static_cast<int>(lay.size()); ++i)
        if (lay[i].sigma == g.sigma && lay[i].parts == g.parts) return i;
    return std::nullopt;
}

BarComplex bar_quotient(const BarSystem& sys, const std::vector<int>& require) {
    sys.validate();
    BarComplex out;
    out.n = sys.n;
    out.require = require;
    std::vector<int> interior;
    for (int p = 1; p + 1 < sys.n; ++p) interior.push_back(p);

    struct Entry {
        BarGen g;
        int deg;
        int idx;
    };
    std::vector<Entry> entries;
    std::map<std::string, int> seq;  // id -> entry position
    FreeComplex::Builder b;

    auto gen_id = [&](const BarGen& g) {
        std::ostringstream os;
        os << "S{";
        for (size_t i = 0; i < g.sigma.size(); ++i) os << (i ? " " : "") << g.sigma[i];
        os << "}";
        std::vector<GenId> ids;
        std::vector<int> cuts = g.sigma;
        int lo = 0;
        for (size_t bi = 0; bi <= cuts.size(); ++bi) {
            int hi = bi < cuts.size() ? cuts[bi] : sys.n - 1;
            ids.push_back(sys.at(lo, hi)->gen(g.parts[bi].first, g.parts[bi].second));
            lo = hi;
        }
        return GenId::tagged(os.str(), GenId::tensor(ids));
    };

    for (const auto& sigma : ord::subsets_of(interior)) {
        if (!std::includes(sigma.begin(), sigma.end(), require.begin(), require.end())) continue;
        // blocks of the segmentation
        std::vector<std::pair<int, int>> blocks;
        int lo = 0;
        for (int cut : sigma) {
            blocks.push_back({lo, cut});
            lo = cut;
        }
        blocks.push_back({lo, sys.n - 1});
        // cartesian product over the block complexes
        std::vector<std::vector<std::pair<int, int>>> bg;
        for (auto [l, h] : blocks) bg.push_back(all_gens(sys.at(l, h)));
        if (std::any_of(bg.begin(), bg.end(), [](const auto& v) { return v.empty(); })) continue;
        std::vector<std::pair<int, int>> cur(blocks.size());
        std::function<void(size_t)> rec = [&](size_t i) {
            if (i == blocks.size()) {
                BarGen g{sigma, cur};
                int deg = 0;
                for (const auto& [p, ix] : cur) deg += p - 1;
                int idx = b.add_gen(deg, gen_id(g));
                seq[gen_id(g).str()] = static_cast<int>(entries.size());
                entries.push_back({g, deg, idx});
                return;
            }
            for (const auto& pg : bg[i]) {
                cur[i] = pg;
                rec(i + 1);
            }
        };
        rec(0);
    }

    auto find_entry = [&](const BarGen& g) -> const Entry* {
        auto it = seq.find(gen_id(g).str());
        return it == seq.end() ? nullptr : &entries[it->second];
    };

    for (const auto& e : entries) {
        const auto& sigma = e.g.sigma;
        const int c = static_cast<int>(e.g.parts.size());
        std::vector<std::pair<int, int>> blocks;
        int lo = 0;
        for (int cut : sigma) {
            blocks.push_back({lo, cut});
            lo = cut;
        }
        blocks.push_back({lo, sys.n - 1});
        std::vector<int> eps(c);
        for (int i = 0; i < c; ++i) eps[i] = e.g.parts[i].first - 1;
        // d-bar: -(-1)^{sum_{j>i} eps_j} per-block differential
        for (int i = 0; i < c; ++i) {
            int s = 0;
            for (int j = i + 1; j < c; ++j) s += eps[j];
            Int sign = (s % 2 == 0) ? -1 : 1;
            for (const auto& [di, dc] :
                 d_of(sys.at(blocks[i].first, blocks[i].second), e.g.parts[i].first,
                      e.g.parts[i].second)) {
                BarGen tg = e.g;
                tg.parts[i] = {e.g.parts[i].first + 1, di};
                if (const Entry* te = find_entry(tg))
                    b.add_d(e.deg, e.idx, te->idx, checked_mul(sign, dc));
                else
                    throw InvariantError("bar: d target missing");
            }
        }
        // rho-bar: merge blocks (i-1, i), sign (-1)^{sum_{j>=i} eps_j}
        for (int i = 1; i < c; ++i) {
            int cut = sigma[i - 1];
            if (std::find(require.begin(), require.end(), cut) != require.end()) continue;
            int s = 0;
            for (int j = i; j < c; ++j) s += eps[j];
            Int sign = (s % 2 == 0) ? 1 : -1;
            auto prod = sys.rho(blocks[i - 1].first, cut, blocks[i].second, e.g.parts[i - 1].first,
                                e.g.parts[i - 1].second, e.g.parts[i].first, e.g.parts[i].second);
            for (const auto& [ti, tc] : prod) {
                BarGen tg;
                tg.sigma = sigma;
                tg.sigma.erase(std::find(tg.sigma.begin(), tg.sigma.end(), cut));
                tg.parts = e.g.parts;
                tg.parts[i - 1] = {e.g.parts[i - 1].first + e.g.parts[i].first, ti};
                tg.parts.erase(tg.parts.begin() + i);
                if (const Entry* te = find_entry(tg))
                    b.add_d(e.deg, e.idx, te->idx, checked_mul(sign, tc));
                else
                    throw InvariantError("bar: product target missing");
            }
        }
    }
    out.total = b.build();
    out.layout.assign(std::max(0, out.total->hi() - out.total->lo() + 1), {});
    for (auto& lay : out.layout) lay = {};
    for (int p = out.total->lo(); p <= out.total->hi(); ++p)
        out.layout[p - out.total->lo()].resize(out.total->dim(p));
    for (const auto& e : entries) out.layout[e.deg - out.total->lo()][e.idx] = e.g;
    return out;
}

BarComplex bar_complex(const BarSystem& sys) { return bar_quotient(sys, {}); }

ChainMap bar_tau(const BarComplex& from, const BarComplex& to) {
    if (!std::includes(to.require.begin(), to.require.end(), from.require.begin(),
                       from.require.end()))
        throw std::invalid_argument("bar_tau: requirements not nested");
    std::map<int, SparseMat> mats;
    for (int p = from.total->lo(); p <= from.total->hi(); ++p) {
        SparseMat m(to.total->dim(p), from.total->dim(p));
        for (int i = 0; i < from.total->dim(p); ++i) {
            const auto& g = from.layout[p - from.total->lo()][i];
            if (auto j = to.find(p, g)) m.add(*j, i, 1);
        }
        if (!m.is_zero()) mats.emplace(p, std::move(m));
    }
    return ChainMap(from.total, to.total, 0, std::move(mats));
}

CxPtr cube_total(const CubeFunctor& f) {
    const unsigned full = 1u << f.t;
    if (f.at.size() != full) throw std::invalid_argument("cube_total: wrong functor size");
    // functoriality of the steps
    for (unsigned mask = 0; mask < full; ++mask)
        for (int k = 0; k < f.t; ++k) {
            if (mask & (1u << k)) continue;
            for (int l = k + 1; l < f.t; ++l) {
                if (mask & (1u << l)) continue;
                const auto& fk = f.step.at({mask, k});
                const auto& fl = f.step.at({mask, l});
                const auto& fk2 = f.step.at({mask | (1u << l), k});
                const auto& fl2 = f.step.at({mask | (1u << k), l});
                if (!(compose(fl2, fk) == compose(fk2, fl)))
                    throw std::invalid_argument("cube_total: steps not functorial");
            }
        }
    FreeComplex::Builder b;
    std::map<std::pair<unsigned, int>, int> off;  // (mask, inner degree) -> offset
    std::map<int, int> filled;
    for (unsigned mask = 0; mask < full; ++mask) {
        const auto& c = f.at[mask];
        int w = __builtin_popcount(mask);
        for (int p = c->lo(); p <= c->hi(); ++p) {
            off[{mask, p}] = filled[w + p];
            for (const auto& g : c->basis(p))
                b.add_gen(w + p, GenId::tagged("m" + std::to_string(mask), g));
            filled[w + p] += c->dim(p);
        }
    }
    for (unsigned mask = 0; mask < full; ++mask) {
        const auto& c = f.at[mask];
        int w = __builtin_popcount(mask);
        Int isign = (w % 2 == 0) ? 1 : -1;
        for (int p = c->lo(); p < c->hi(); ++p) {
            SparseMat dm = c->d(p);
            for (const auto& t : dm.entries())
                b.add_d(w + p, off[{mask, p}] + t.col, off[{mask, p + 1}] + t.row,
                        checked_mul(isign, t.val));
        }
        for (int k = 0; k < f.t; ++k) {
            if (mask & (1u << k)) continue;
            int later = __builtin_popcount(mask >> (k + 1));
            Int ssign = (later % 2 == 0) ? 1 : -1;
            const auto& st = f.step.at({mask, k});
            unsigned tm = mask | (1u << k);
            for (int p = c->lo(); p <= c->hi(); ++p) {
                SparseMat sm = st.at(p);
                for (const auto& t : sm.entries())
                    b.add_d(w + p, off[{mask, p}] + t.col, off[{tm, p}] + t.row,
                            checked_mul(ssign, t.val));
            }
        }
    }
    return b.build();
}

unsigned long long Rng::next() {
    state += 0x9E3779B97f4A7C15ull;
    unsigned long long z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

int Rng::below(int n) { return n <= 1 ? 0 : static_cast<int>(next() % n); }

Int Rng::pick(std::initializer_list<Int> xs) {
    int i = below(static_cast<int>(xs.size()));
    return *(xs.begin() + i);
}

namespace {

// unimodular conjugation of every degree; returns the new complex and the
// change-of-basis map old -> new
std::pair<CxPtr, ChainMap> conjugate(Rng& rng, const CxPtr& c) {
    std::map<int, SparseMat> u, uinv;
    for (int p = c->lo(); p <= c->hi(); ++p) {
        int n = c->dim(p);
        SparseMat m = SparseMat::identity(n);
        SparseMat mi = SparseMat::identity(n);
        int ops = std::min(6, 2 * n);
        for (int k = 0; k < ops && n >= 2; ++k) {
            int i = rng.below(n), j = rng.below(n);
            if (i == j) continue;
            Int cval = rng.pick({-2, -1, 1, 2});
            SparseMat e = SparseMat::identity(n);
            e.add(i, j, cval);
            SparseMat einv = SparseMat::identity(n);
            einv.add(i, j, -cval);
            m = e * m;
            mi = mi * einv;
        }
        u[p] = m;
        uinv[p] = mi;
    }
    FreeComplex::Builder b;
    for (int p = c->lo(); p <= c->hi(); ++p)
        for (const auto& g : c->basis(p)) b.add_gen(p, g);
    for (int p = c->lo(); p < c->hi(); ++p) {
        SparseMat nd = u[p + 1] * c->d(p) * uinv[p];
        for (const auto& t : nd.entries()) b.add_d(p, t.col, t.row, t.val);
    }
    auto out = b.build();
    std::map<int, SparseMat> mats;
    for (auto& [p, m] : u)
        if (!m.is_zero()) mats.emplace(p, m);
    return {out, ChainMap(c, out, 0, std::move(mats))};
}

}  // namespace

CxPtr random_complex(Rng& rng, int max_deg, int max_rank, std::vector<HomologyRecord>* expected) {
    FreeComplex::Builder b;
    std::map<int, int> betti;
    std::map<int, std::vector<Int>> torsion;
    int rank = 0, piece = 0;
    while (rank < std::max(1, max_rank)) {
        int kind = rng.below(3);
        int p = rng.below(max_deg + 1);
        std::string tag = "g" + std::to_string(piece++);
        if (kind == 0 || rank + 2 > max_rank) {
            b.add_gen(p, GenId::atom(tag));
            betti[p] += 1;
            rank += 1;
        } else {
            Int m = (kind == 1) ? 1 : rng.pick({2, 3, 4});
            int i = b.add_gen(p, GenId::atom(tag + "a"));
            int j = b.add_gen(p + 1, GenId::atom(tag + "b"));
            b.add_d(p, i, j, m);
            if (m != 1) torsion[p + 1].push_back(m);
            rank += 2;
        }
    }
    auto base = b.build();
    if (expected) {
        expected->clear();
        for (int p = base->lo(); p <= base->hi(); ++p) {
            HomologyRecord r;
            r.degree = p;
            r.betti = betti.count(p) ? betti[p] : 0;
            if (torsion.count(p)) {
                // canonicalize to a divisor chain via SNF of a diagonal matrix
                auto& ts = torsion[p];
                SparseMat diag(static_cast<int>(ts.size()), static_cast<int>(ts.size()));
                for (int i = 0; i < static_cast<int>(ts.size()); ++i) diag.add(i, i, ts[i]);
                auto sm = smith_summary(diag);
                for (Int d : sm.divisors)
                    if (d != 1) r.torsion.push_back(d);
            }
            expected->push_back(r);
        }
    }
    return conjugate(rng, base).first;
}

ChainMap random_quasi_iso(Rng& rng, const CxPtr& src) {
    // pad with acyclic pieces, then conjugate the target
    FreeComplex::Builder b;
    for (int p = src->lo(); p <= src->hi(); ++p)
        for (const auto& g : src->basis(p)) b.add_gen(p, GenId::tagged("q", g));
    for (int p = src->lo(); p < src->hi(); ++p) {
        SparseMat dm = src->d(p);
        for (const auto& t : dm.entries()) b.add_d(p, t.col, t.row, t.val);
    }
    int pads = 1 + rng.below(3);
    for (int k = 0; k < pads; ++k) {
        int p = src->lo() + rng.below(std::max(1, src->hi() - src->lo() + 1));
        int i = b.add_gen(p, GenId::atom("pad" + std::to_string(k) + "a"));
        int j = b.add_gen(p + 1, GenId::atom("pad" + std::to_string(k) + "b"));
        b.add_d(p, i, j, 1);
    }
    auto padded = b.build();
    std::map<int, SparseMat> incl;
    for (int p = src->lo(); p <= src->hi(); ++p) {
        SparseMat m(padded->dim(p), src->dim(p));
        for (int i = 0; i < src->dim(p); ++i) {
            auto j = padded->index_of(p, GenId::tagged("q", src->gen(p, i)));
            if (!j) throw InvariantError("random_quasi_iso: lost generator");
            m.add(*j, i, 1);
        }
        if (!m.is_zero()) incl.emplace(p, std::move(m));
    }
    ChainMap inc(src, padded, 0, std::move(incl));
    auto [tgt, iso] = conjugate(rng, padded);
    (void)tgt;
    return compose(iso, inc);
}

MultiComplex random_quoted_double(Rng& rng, int max_rank) {
    int half = std::max(1, max_rank / 2);
    auto a = random_complex(rng, 2, 1 + rng.below(half));
    auto c = random_complex(rng, 2, 1 + rng.below(half));
    MultiComplex::Builder b(2, Conv::Commuting);
    std::map<std::pair<std::pair<int, int>, std::pair<int, int>>, int> idx;
    for (auto ga : all_gens(a))
        for (auto gc : all_gens(c)) {
            MultiComplex::MDeg m{ga.first, gc.first};
            idx[{ga, gc}] = b.add_gen(
                m, GenId::tensor({a->gen(ga.first, ga.second), c->gen(gc.first, gc.second)}));
        }
    for (auto ga : all_gens(a))
        for (auto gc : all_gens(c)) {
            MultiComplex::MDeg m{ga.first, gc.first};
            SparseMat da = a->d(ga.first);
            for (const auto& t : da.entries())
                if (t.col == ga.second)
                    b.add_d(0, m, idx[{ga, gc}], idx[{{ga.first + 1, t.row}, gc}], t.val);
            SparseMat dc = c->d(gc.first);
            for (const auto& t : dc.entries())
                if (t.col == gc.second)
                    b.add_d(1, m, idx[{ga, gc}], idx[{ga, {gc.first + 1, t.row}}], t.val);
        }
    MultiComplex plain = b.build();
    // conjugate by a unimodular change of basis in every bidegree
    std::map<MultiComplex::MDeg, std::pair<SparseMat, SparseMat>> u;
    for (const auto& [m, gens] : plain.basis()) {
        int n = static_cast<int>(gens.size());
        SparseMat fw = SparseMat::identity(n), bw = SparseMat::identity(n);
        for (int k = 0; k < std::min(4, n) && n >= 2; ++k) {
            int i = rng.below(n), j = rng.below(n);
            if (i == j) continue;
            Int cv = rng.pick({-1, 1, 2});
            SparseMat e = SparseMat::identity(n);
            e.add(i, j, cv);
            SparseMat ei = SparseMat::identity(n);
            ei.add(i, j, -cv);
            fw = e * fw;
            bw = bw * ei;
        }
        u[m] = {fw, bw};
    }
    MultiComplex::Builder b2(2, Conv::Commuting);
    for (const auto& [m, gens] : plain.basis())
        for (const auto& g : gens) b2.add_gen(m, g);
    for (const auto& [m, gens] : plain.basis()) {
        (void)gens;
        for (int k = 0; k < 2; ++k) {
            MultiComplex::MDeg mk = m;
            mk[k] += 1;
            if (plain.dim(mk) == 0) continue;
            SparseMat nd = u[mk].first * plain.d(k, m) * u[m].second;
            for (const auto& t : nd.entries()) b2.add_d(k, m, t.col, t.row, t.val);
        }
    }
    return b2.build();
}

}  // namespace relcx::homalg
