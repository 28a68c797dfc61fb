#include "relcx/cech.hpp"

#include <algorithm>
#include <functional>

namespace relcx::cech {

using homalg::FreeComplex;
using relcx::SparseMat;

namespace {

// subsets of [0, k) ordered by (size, lexicographic), including the empty set
std::vector<std::vector<int>> chains_of(int k) {
    std::vector<std::vector<int>> out;
    for (unsigned m = 0; m < (1u << k); ++m) {
        std::vector<int> c;
        for (int i = 0; i < k; ++i)
            if (m & (1u << i)) c.push_back(i);
        out.push_back(std::move(c));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

}  // namespace

std::optional<int> CechComplex::find(int deg, const CechGen& g) const {
    auto it = index.find(g);
    if (it == index.end()) return std::nullopt;
    if (static_cast<int>(g.chain.size()) + g.q != deg) return std::nullopt;
    return it->second;
}

CechComplex cech_complex(GeometryModel& model, geo::SpaceId space, const Covering& cov) {
    if (cov.space != space) throw std::invalid_argument("cech: covering on another space");
    if (!model.union_is(cov.opens, cov.covered))
        throw std::invalid_argument("cech: covering union differs from the covered open");

    CechComplex out;
    out.space = space;
    out.cov = cov;
    const int k = static_cast<int>(cov.opens.size());

    for (const auto& c : chains_of(k)) {
        if (c.empty()) {
            out.chain_open[c] = geo::OpenId{};
            out.chain_cx[c] = model.cycles(space);
        } else {
            geo::OpenId acc = cov.opens[c[0]];
            for (size_t i = 1; i < c.size(); ++i) acc = model.intersect(acc, cov.opens[c[i]]);
            out.chain_open[c] = acc;
            out.chain_cx[c] = model.cycles_open(acc);
        }
    }

    FreeComplex::Builder b;
    std::map<std::pair<std::vector<int>, int>, int> pos;  // (chain, q) -> index of first gen
    std::map<int, int> filled;
    for (const auto& [c, cx] : out.chain_cx) {
        for (int q = cx->lo(); q <= cx->hi(); ++q) {
            int deg = static_cast<int>(c.size()) + q;
            pos[{c, q}] = filled[deg];
            for (const auto& g : cx->basis(q)) b.add_gen(deg, GenId::chain(c, g));
            filled[deg] += cx->dim(q);
        }
    }
    auto at = [&](const std::vector<int>& c, int q, int i) { return pos.at({c, q}) + i; };

    for (const auto& [c, cx] : out.chain_cx) {
        const int col = static_cast<int>(c.size());
        // inner differential with sign (-1)^{col}
        Int isign = (col % 2 == 0) ? 1 : -1;
        for (int q = cx->lo(); q < cx->hi(); ++q) {
            SparseMat dm = cx->d(q);
            for (const auto& t : dm.entries())
                b.add_d(col + q, at(c, q, t.col), at(c, q + 1, t.row), isign * t.val);
        }
        // Cech coboundary into longer chains
        for (int j = 0; j < k; ++j) {
            if (std::binary_search(c.begin(), c.end(), j)) continue;
            auto d = c;
            d.insert(std::lower_bound(d.begin(), d.end(), j), j);
            int r = static_cast<int>(std::lower_bound(d.begin(), d.end(), j) - d.begin());
            Int csign = (r % 2 == 0) ? 1 : -1;
            ChainMap rest = c.empty()
                                ? model.restrict_space_to_open(space, out.chain_open.at(d))
                                : model.restrict_open_to_open(out.chain_open.at(c),
                                                              out.chain_open.at(d));
            for (int q = cx->lo(); q <= cx->hi(); ++q) {
                SparseMat rm = rest.at(q);
                for (const auto& t : rm.entries())
                    b.add_d(col + q, at(c, q, t.col), at(d, q, t.row), csign * t.val);
            }
        }
    }
    out.total = b.build();
    out.layout.assign(std::max(0, out.total->hi() - out.total->lo() + 1), {});
    for (int p = out.total->lo(); p <= out.total->hi(); ++p)
        out.layout[p - out.total->lo()].resize(out.total->dim(p));
    for (const auto& [key, start] : pos) {
        const auto& [c, q] = key;
        int deg = static_cast<int>(c.size()) + q;
        int n = out.chain_cx.at(c)->dim(q);
        for (int i = 0; i < n; ++i) {
            CechGen g{c, q, i};
            out.layout[deg - out.total->lo()][start + i] = g;
            out.index[g] = start + i;
        }
    }
    return out;
}

std::pair<CxPtr, ChainMap> cech_iota(GeometryModel& model, const CechComplex& zc) {
    auto [acx, incl] = model.complement(zc.space, zc.cov.covered);
    std::map<int, SparseMat> mats;
    for (int q = acx->lo(); q <= acx->hi(); ++q) {
        SparseMat m(zc.total->dim(q), acx->dim(q));
        SparseMat im = incl.at(q);
        for (const auto& t : im.entries()) {
            auto j = zc.find(q, CechGen{{}, q, t.row});
            if (!j) throw InvariantError("cech_iota: ambient layer generator missing");
            m.add(*j, t.col, t.val);
        }
        if (!m.is_zero()) mats.emplace(q, std::move(m));
    }
    return {acx, ChainMap(acx, zc.total, 0, std::move(mats))};
}

ChainMap cech_restrict(GeometryModel& model, const CechComplex& src, const CechComplex& dst,
                       const CovMap& cm) {
    const int kd = static_cast<int>(dst.cov.opens.size());
    if (static_cast<int>(cm.lambda.size()) != kd)
        throw std::invalid_argument("cech_restrict: lambda size mismatch");
    for (int j = 0; j + 1 < kd; ++j)
        if (cm.lambda[j] > cm.lambda[j + 1])
            throw std::invalid_argument("cech_restrict: lambda not order-preserving");
    for (int j = 0; j < kd; ++j)
        if (!model.contains(src.cov.opens.at(cm.lambda[j]), dst.cov.opens[j]))
            throw std::invalid_argument("cech_restrict: containment violated");

    std::map<int, std::vector<Triplet>> trips;
    for (const auto& [dchain, dcx] : dst.chain_cx) {
        // source chain: lambda applied elementwise; degenerate -> 0
        std::vector<int> schain;
        for (int j : dchain) schain.push_back(cm.lambda[j]);
        bool degenerate = false;
        for (size_t i = 0; i + 1 < schain.size(); ++i)
            if (schain[i] >= schain[i + 1]) degenerate = true;
        if (degenerate) continue;
        ChainMap rest = dchain.empty()
                            ? ChainMap::identity(model.cycles(src.space))
                            : model.restrict_open_to_open(src.chain_open.at(schain),
                                                          dst.chain_open.at(dchain));
        const auto& scx = src.chain_cx.at(schain);
        for (int q = scx->lo(); q <= scx->hi(); ++q) {
            SparseMat rm = rest.at(q);
            for (const auto& t : rm.entries()) {
                int sdeg = static_cast<int>(schain.size()) + q;
                auto si = src.find(sdeg, CechGen{schain, q, t.col});
                auto di = dst.find(static_cast<int>(dchain.size()) + q, CechGen{dchain, q, t.row});
                if (!si || !di) throw InvariantError("cech_restrict: index lookup failed");
                // both chains have the same length here
                trips[sdeg].push_back({*di, *si, t.val});
            }
        }
    }
    std::map<int, SparseMat> mats;
    for (auto& [p, ts] : trips) {
        SparseMat m(dst.total->dim(p), src.total->dim(p));
        for (const auto& t : ts) m.add(t.row, t.col, t.val);
        mats.emplace(p, std::move(m));
    }
    return ChainMap(src.total, dst.total, 0, std::move(mats));
}

namespace {

enum class Variance { Push, Pull };

ChainMap cech_transfer(GeometryModel& model, geo::MapId p, const CechComplex& src,
                       const CechComplex& dst, Variance var) {
    auto info = model.map_info(p);
    const CechComplex& on_m = (var == Variance::Push) ? src : dst;  // covering p^{-1}V
    const CechComplex& on_n = (var == Variance::Push) ? dst : src;  // covering V
    if (static_cast<int>(on_m.cov.opens.size()) != static_cast<int>(on_n.cov.opens.size()))
        throw std::invalid_argument("cech push/pull: covering index sets differ");
    if (on_m.space != info.src || on_n.space != info.dst)
        throw std::invalid_argument("cech push/pull: spaces do not match the map");
    for (size_t i = 0; i < on_n.cov.opens.size(); ++i)
        if (!(model.preimage(p, on_n.cov.opens[i]) == on_m.cov.opens[i]))
            throw std::invalid_argument("cech push/pull: covering is not the preimage covering");

    std::map<int, std::vector<Triplet>> trips;
    for (const auto& [chain, ncx] : on_n.chain_cx) {
        ChainMap t = chain.empty()
                         ? (var == Variance::Push ? model.push_spaces(p) : model.pull_spaces(p))
                         : (var == Variance::Push
                                ? model.push_on_open(p, on_n.chain_open.at(chain))
                                : model.pull_on_open(p, on_n.chain_open.at(chain)));
        (void)ncx;
        const auto& scx = src.chain_cx.at(chain);
        for (int q = scx->lo(); q <= scx->hi(); ++q) {
            SparseMat tm = t.at(q);
            for (const auto& tr : tm.entries()) {
                int deg = static_cast<int>(chain.size()) + q;
                auto si = src.find(deg, CechGen{chain, q, tr.col});
                auto di = dst.find(deg, CechGen{chain, q, tr.row});
                if (!si || !di) throw InvariantError("cech push/pull: index lookup failed");
                trips[deg].push_back({*di, *si, tr.val});
            }
        }
    }
    std::map<int, SparseMat> mats;
    for (auto& [pdeg, ts] : trips) {
        SparseMat m(dst.total->dim(pdeg), src.total->dim(pdeg));
        for (const auto& t : ts) m.add(t.row, t.col, t.val);
        mats.emplace(pdeg, std::move(m));
    }
    return ChainMap(src.total, dst.total, 0, std::move(mats));
}

}  // namespace

ChainMap cech_push(GeometryModel& model, geo::MapId p, const CechComplex& src,
                   const CechComplex& dst) {
    if (!model.map_info(p).projective)
        throw std::invalid_argument("cech_push: map is not projective");
    return cech_transfer(model, p, src, dst, Variance::Push);
}

ChainMap cech_pull(GeometryModel& model, geo::MapId p, const CechComplex& src,
                   const CechComplex& dst) {
    if (!model.map_info(p).smooth)
        throw std::invalid_argument("cech_pull: map is not smooth");
    return cech_transfer(model, p, src, dst, Variance::Pull);
}

Covering merged_covering(GeometryModel& model, const FiberingSequence& seq, int lo, int hi) {
    Covering out;
    out.space = model.fiber_space(seq, lo, hi);
    std::vector<geo::OpenId> covered_parts;
    for (int i = lo; i <= hi; ++i) {
        const Covering& ci = seq.covs.at(i);
        for (geo::OpenId o : ci.opens) {
            geo::OpenId po = (lo == hi)
                                 ? o
                                 : model.preimage(model.fiber_projection(seq, lo, hi, i, i), o);
            out.opens.push_back(po);
        }
        geo::OpenId pc = (lo == hi)
                             ? ci.covered
                             : model.preimage(model.fiber_projection(seq, lo, hi, i, i),
                                              ci.covered);
        covered_parts.push_back(pc);
    }
    out.covered = model.union_of(covered_parts);
    return out;
}

CechComplex merged_cech(GeometryModel& model, const FiberingSequence& seq, int lo, int hi) {
    Covering cov = merged_covering(model, seq, lo, hi);
    return cech_complex(model, cov.space, cov);
}

std::optional<int> HatTensor::find(int deg, const std::vector<std::pair<int, int>>& parts) const {
    auto it = index.find(parts);
    if (it == index.end() || it->second.first != deg) return std::nullopt;
    return it->second.second;
}

HatTensor filtered_tensor(std::vector<CechComplex> factors, const TupleFilter& keep) {
    HatTensor out;
    const int n = static_cast<int>(factors.size());
    std::vector<CxPtr> totals;
    for (const auto& f : factors) totals.push_back(f.total);
    out.full = homalg::tensor(totals);
    out.factors = std::move(factors);

    FreeComplex::Builder b;
    std::map<std::vector<std::pair<int, int>>, std::pair<int, int>> index;
    for (int p = out.full.total->lo(); p <= out.full.total->hi(); ++p)
        for (int i = 0; i < out.full.total->dim(p); ++i) {
            const auto& parts = out.full.layout[p - out.full.total->lo()][i];
            if (!keep(parts)) continue;
            int idx = b.add_gen(p, out.full.total->gen(p, i));
            index[parts] = {p, idx};
        }
    // restrict the tensor differential; closure is an invariant, not a choice
    for (const auto& [parts, where] : index) {
        const auto& [deg, idx] = where;
        int suffix = 0;
        for (int f = n - 1; f >= 0; --f) {
            Int sign = (suffix % 2 == 0) ? 1 : -1;
            SparseMat dm = out.factors[f].total->d(parts[f].first);
            for (const auto& t : dm.entries()) {
                if (t.col != parts[f].second) continue;
                auto tparts = parts;
                tparts[f] = {parts[f].first + 1, t.row};
                auto it = index.find(tparts);
                if (it == index.end())
                    throw InvariantError(
                        "filtered_tensor: generating set not closed under the differential");
                b.add_d(deg, idx, it->second.second, sign * t.val);
            }
            suffix += parts[f].first;
        }
    }
    out.sub = b.build();
    out.layout.assign(std::max(0, out.sub->hi() - out.sub->lo() + 1), {});
    for (int p = out.sub->lo(); p <= out.sub->hi(); ++p)
        out.layout[p - out.sub->lo()].resize(out.sub->dim(p));
    for (const auto& [parts, where] : index)
        out.layout[where.first - out.sub->lo()][where.second] = parts;
    out.index = std::move(index);

    std::map<int, SparseMat> inc;
    for (int p = out.sub->lo(); p <= out.sub->hi(); ++p) {
        SparseMat m(out.full.total->dim(p), out.sub->dim(p));
        for (int i = 0; i < out.sub->dim(p); ++i) {
            auto j = out.full.find(p, out.layout[p - out.sub->lo()][i]);
            if (!j) throw InvariantError("filtered_tensor: inclusion lookup failed");
            m.add(*j, i, 1);
        }
        if (!m.is_zero()) inc.emplace(p, std::move(m));
    }
    out.inclusion = ChainMap(out.sub, out.full.total, 0, std::move(inc));
    return out;
}

namespace {

std::vector<LocatedRef> located_of(const std::vector<CechComplex>& factors,
                                   std::span<const std::pair<int, int>> parts) {
    std::vector<LocatedRef> refs;
    for (size_t f = 0; f < factors.size(); ++f) {
        const CechGen& g = factors[f].gen(parts[f].first, parts[f].second);
        const auto& cx = factors[f].chain_cx.at(g.chain);
        refs.push_back({static_cast<int>(f), g.chain, cx->gen(g.q, g.idx)});
    }
    return refs;
}

}  // namespace

HatTensor restricted_tensor(GeometryModel& model, const FiberingSequence& seq,
                            std::vector<CechComplex> factors) {
    if (seq.size() != static_cast<int>(factors.size()))
        throw std::invalid_argument("restricted_tensor: sequence length mismatch");
    std::vector<std::pair<int, int>> groups;
    for (int i = 0; i < seq.size(); ++i) groups.push_back({i, i});
    const auto& fs = factors;
    auto filter = [&model, &seq, groups, &fs](std::span<const std::pair<int, int>> parts) {
        auto refs = located_of(fs, parts);
        return model.proper(seq, groups, refs);
    };
    HatTensor out = filtered_tensor(factors, filter);
    out.seq = seq;
    return out;
}

RhoResult rho(GeometryModel& model, const HatTensor& src,
              const std::vector<std::pair<int, int>>& blocks) {
    const auto& seq = src.seq;
    if (seq.spaces.empty()) throw std::invalid_argument("rho: source has no fibering sequence");
    RhoResult out;
    // the merged sequence: block spaces with the junction targets between
    FiberingSequence ms;
    for (size_t a = 0; a < blocks.size(); ++a) {
        auto [lo, hi] = blocks[a];
        ms.spaces.push_back(model.fiber_space(seq, lo, hi));
        if (a + 1 < blocks.size()) {
            // junction between blocks: the original junction at position hi;
            // its maps act through the boundary atomic coordinates
            int j = hi;
            ms.targets.push_back(seq.targets.at(j));
            ms.left_to_target.push_back(seq.left_to_target.at(j));
            ms.right_to_target.push_back(seq.right_to_target.at(j));
        }
        ms.covs.push_back(merged_covering(model, seq, lo, hi));
    }
    out.merged_seq = ms;

    std::vector<CechComplex> merged;
    for (auto [lo, hi] : blocks) merged.push_back(merged_cech(model, seq, lo, hi));

    // target generating set: all tuples whose originals could map there; in
    // the restricted tensor over the merged sequence the oracle speaks the
    // grouped language directly
    std::vector<std::pair<int, int>> groups(blocks.begin(), blocks.end());
    const auto& mf = merged;
    auto filter = [&model, &seq, groups, &mf](std::span<const std::pair<int, int>> parts) {
        std::vector<LocatedRef> refs;
        for (size_t f = 0; f < mf.size(); ++f) {
            const CechGen& g = mf[f].gen(parts[f].first, parts[f].second);
            refs.push_back({static_cast<int>(f), g.chain, mf[f].chain_cx.at(g.chain)->gen(g.q, g.idx)});
        }
        return model.proper(seq, groups, refs);
    };
    out.target = filtered_tensor(merged, filter);
    out.target.seq = ms;

    // matrix: per source tuple, fold the factors of each block with the
    // pairwise product, with the comparison sign (-1)^{cols(left) * q(right)}
    struct Piece {
        std::vector<int> chain;
        int q;
        GenId id;
        Int coeff;
    };
    std::map<int, SparseMat> mats;
    for (int p = src.sub->lo(); p <= src.sub->hi(); ++p) {
        SparseMat m(out.target.sub->dim(p), src.sub->dim(p));
        for (int i = 0; i < src.sub->dim(p); ++i) {
            const auto& parts = src.layout[p - src.sub->lo()][i];
            // per block: fold
            std::vector<std::vector<Piece>> block_elems;
            for (auto [lo, hi] : blocks) {
                const CechGen& g0 = src.factors[lo].gen(parts[lo].first, parts[lo].second);
                std::vector<Piece> acc{{g0.chain, g0.q,
                                        src.factors[lo].chain_cx.at(g0.chain)->gen(g0.q, g0.idx),
                                        1}};
                int chain_off = static_cast<int>(src.factors[lo].cov.opens.size());
                for (int f = lo + 1; f <= hi; ++f) {
                    const CechGen& gf = src.factors[f].gen(parts[f].first, parts[f].second);
                    GenId fid = src.factors[f].chain_cx.at(gf.chain)->gen(gf.q, gf.idx);
                    std::vector<Piece> next;
                    for (const auto& pc : acc) {
                        // comparison sign between the tensor of totals and the
                        // total of the column-paired double structure
                        int a = static_cast<int>(pc.chain.size());
                        int bb = static_cast<int>(gf.chain.size());
                        int e = a * bb + a * gf.q + pc.q * gf.q;
                        Int tw = (e % 2 == 0) ? 1 : -1;
                        auto prod = model.product_pair(seq, lo, f - 1, f, pc.chain, pc.id,
                                                       gf.chain, fid);
                        std::vector<int> nchain = pc.chain;
                        for (int c : gf.chain) nchain.push_back(c + chain_off);
                        for (const auto& [nid, nc] : prod)
                            next.push_back({nchain, pc.q + gf.q, nid,
                                            checked_mul(pc.coeff, checked_mul(tw, nc))});
                    }
                    acc = std::move(next);
                    chain_off += static_cast<int>(src.factors[f].cov.opens.size());
                }
                block_elems.push_back(std::move(acc));
            }
            // expand across blocks
            std::vector<std::pair<std::vector<std::pair<int, int>>, Int>> images{{{}, 1}};
            for (size_t a = 0; a < blocks.size(); ++a) {
                std::vector<std::pair<std::vector<std::pair<int, int>>, Int>> next;
                for (const auto& [pref, coeff] : images)
                    for (const auto& pc : block_elems[a]) {
                        auto inner = merged[a].chain_cx.at(pc.chain)->index_of(pc.q, pc.id);
                        if (!inner) throw InvariantError("rho: product generator not found");
                        auto gi = merged[a].find(static_cast<int>(pc.chain.size()) + pc.q,
                                                 CechGen{pc.chain, pc.q, *inner});
                        if (!gi) throw InvariantError("rho: merged index lookup failed");
                        auto np = pref;
                        np.push_back({static_cast<int>(pc.chain.size()) + pc.q, *gi});
                        next.push_back({std::move(np), checked_mul(coeff, pc.coeff)});
                    }
                images = std::move(next);
            }
            for (const auto& [tparts, coeff] : images) {
                auto j = out.target.find(p, tparts);
                if (!j)
                    throw InvariantError("rho: image tuple outside the restricted product");
                m.add(*j, i, coeff);
            }
        }
        if (!m.is_zero()) mats.emplace(p, std::move(m));
    }
    out.map = ChainMap(src.sub, out.target.sub, 0, std::move(mats));
    return out;
}

HatTensor distinguished(GeometryModel& model, std::vector<CechComplex> factors,
                        const Constraint& con) {
    // validate the fixed tuples of every single condition
    for (const auto& sc : con.singles) {
        std::vector<std::pair<int, int>> groups;
        for (int i = 0; i < sc.seq.size(); ++i) groups.push_back({i, i});
        // all combinations of basis pieces of the fixed elements
        std::function<bool(size_t, std::vector<LocatedRef>&)> rec =
            [&](size_t k, std::vector<LocatedRef>& acc) -> bool {
            if (k == sc.fixed.size())
                return model.proper(sc.seq, groups, acc);
            for (const auto& piece : sc.fixed[k].second) {
                acc.push_back({sc.fixed[k].first, piece.chain, piece.id});
                if (!rec(k + 1, acc)) return false;
                acc.pop_back();
            }
            return true;
        };
        std::vector<LocatedRef> acc;
        if (!rec(0, acc))
            throw LoadError("distinguished: fixed elements are not properly intersecting");
    }

    const auto& fs = factors;
    auto filter = [&model, &con, &fs](std::span<const std::pair<int, int>> parts) {
        for (const auto& sc : con.singles) {
            std::vector<std::pair<int, int>> groups;
            for (int i = 0; i < sc.seq.size(); ++i) groups.push_back({i, i});
            std::vector<LocatedRef> base;
            for (int fi : sc.p_subset) {
                const CechGen& g = fs[fi].gen(parts[fi].first, parts[fi].second);
                base.push_back({sc.member_pos.at(fi), g.chain,
                                fs[fi].chain_cx.at(g.chain)->gen(g.q, g.idx)});
            }
            std::function<bool(size_t, std::vector<LocatedRef>&)> rec =
                [&](size_t k, std::vector<LocatedRef>& acc) -> bool {
                if (k == sc.fixed.size())
                    return model.proper(sc.seq, groups, acc);
                for (const auto& piece : sc.fixed[k].second) {
                    acc.push_back({sc.fixed[k].first, piece.chain, piece.id});
                    if (!rec(k + 1, acc)) return false;
                    acc.pop_back();
                }
                return true;
            };
            if (!rec(0, base)) return false;
        }
        return true;
    };
    return filtered_tensor(factors, filter);
}

}  // namespace relcx::cech
