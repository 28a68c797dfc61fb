#include "relcx/geomodel.hpp"

#include <algorithm>
#include <sstream>

namespace relcx::geo {

using homalg::FreeComplex;
using relcx::SparseMat;

namespace {

CxPtr point_complex(const std::vector<std::string>& labels) {
    FreeComplex::Builder b;
    for (const auto& l : labels) b.add_gen(0, GenId::atom(l));
    return b.build();
}

}  // namespace

SpaceId PointModel::add_space(std::string name, std::vector<std::string> labels, int dim) {
    SpaceData s;
    s.name = std::move(name);
    s.labels = std::move(labels);
    s.dim = dim;
    int id = static_cast<int>(spaces_.size());
    s.atoms = {id};
    s.key = "s" + std::to_string(id);
    spaces_.push_back(std::move(s));
    return {id};
}

MapId PointModel::add_map(std::string name, SpaceId src, SpaceId dst, std::vector<int> images) {
    if (static_cast<int>(images.size()) != point_count(src))
        throw std::invalid_argument("PointModel::add_map: image table size mismatch");
    for (int v : images)
        if (v < 0 || v >= point_count(dst))
            throw std::invalid_argument("PointModel::add_map: image out of range");
    MapData m;
    m.name = std::move(name);
    m.info = {src, dst, true, true, 0};
    m.f = std::move(images);
    maps_.push_back(std::move(m));
    return {static_cast<int>(maps_.size()) - 1};
}

OpenId PointModel::open_of(SpaceId s, std::vector<int> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    for (int p : pts)
        if (p < 0 || p >= point_count(s))
            throw std::invalid_argument("PointModel::open_of: point out of range");
    auto key = std::make_pair(s.v, pts);
    if (auto it = open_memo_.find(key); it != open_memo_.end()) return it->second;
    opens_.push_back({s, pts});
    OpenId id{static_cast<int>(opens_.size()) - 1};
    open_memo_[key] = id;
    return id;
}

OpenId PointModel::full_open(SpaceId s) {
    std::vector<int> all(point_count(s));
    for (int i = 0; i < point_count(s); ++i) all[i] = i;
    return open_of(s, all);
}

int PointModel::point_index(SpaceId s, const std::string& label) const {
    const auto& ls = spaces_.at(s.v).labels;
    for (int i = 0; i < static_cast<int>(ls.size()); ++i)
        if (ls[i] == label) return i;
    return -1;
}

int PointModel::dim(SpaceId s) const { return spaces_.at(s.v).dim; }
std::string PointModel::space_name(SpaceId s) const { return spaces_.at(s.v).name; }

CxPtr PointModel::cycles(SpaceId s) {
    if (auto it = space_cx_.find(s.v); it != space_cx_.end()) return it->second;
    auto cx = point_complex(spaces_.at(s.v).labels);
    space_cx_[s.v] = cx;
    return cx;
}

CxPtr PointModel::cycles_open(OpenId o) {
    if (auto it = open_cx_.find(o.v); it != open_cx_.end()) return it->second;
    const auto& od = opens_.at(o.v);
    std::vector<std::string> labels;
    for (int p : od.pts) labels.push_back(point_label(od.sp, p));
    auto cx = point_complex(labels);
    open_cx_[o.v] = cx;
    return cx;
}

SpaceId PointModel::space_of(OpenId o) const { return opens_.at(o.v).sp; }

OpenId PointModel::intersect(OpenId a, OpenId b) {
    const auto& da = opens_.at(a.v);
    const auto& db = opens_.at(b.v);
    if (da.sp != db.sp) throw std::invalid_argument("PointModel::intersect: different spaces");
    std::vector<int> out;
    std::set_intersection(da.pts.begin(), da.pts.end(), db.pts.begin(), db.pts.end(),
                          std::back_inserter(out));
    return open_of(da.sp, std::move(out));
}

bool PointModel::contains(OpenId big, OpenId small) {
    const auto& db = opens_.at(big.v);
    const auto& ds = opens_.at(small.v);
    return db.sp == ds.sp &&
           std::includes(db.pts.begin(), db.pts.end(), ds.pts.begin(), ds.pts.end());
}

OpenId PointModel::union_of(const std::vector<OpenId>& parts) {
    if (parts.empty()) throw std::invalid_argument("union_of: no parts");
    std::vector<int> u;
    SpaceId sp = opens_.at(parts[0].v).sp;
    for (OpenId o : parts) {
        if (opens_.at(o.v).sp != sp) throw std::invalid_argument("union_of: different spaces");
        const auto& p = opens_.at(o.v).pts;
        u.insert(u.end(), p.begin(), p.end());
    }
    return open_of(sp, std::move(u));
}

bool PointModel::union_is(const std::vector<OpenId>& parts, OpenId whole) {
    std::vector<int> u;
    for (OpenId o : parts) {
        const auto& p = opens_.at(o.v).pts;
        u.insert(u.end(), p.begin(), p.end());
    }
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u == opens_.at(whole.v).pts;
}

namespace {

// degree-0 matrix between point complexes induced by a point map
ChainMap point_matrix(CxPtr src, CxPtr dst, const std::vector<std::pair<int, int>>& pairs,
                      bool forward) {
    SparseMat m(dst->dim(0), src->dim(0));
    for (auto [s, d] : pairs) {
        if (forward)
            m.add(d, s, 1);
        else
            m.add(s, d, 1);  // unused; kept for symmetry
    }
    std::map<int, SparseMat> mats;
    if (!m.is_zero()) mats.emplace(0, std::move(m));
    return ChainMap(std::move(src), std::move(dst), 0, std::move(mats));
}

}  // namespace

ChainMap PointModel::restrict_space_to_open(SpaceId s, OpenId o) {
    const auto& od = opens_.at(o.v);
    if (od.sp != s) throw std::invalid_argument("restrict_space_to_open: open of another space");
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(od.pts.size()); ++i) pairs.push_back({od.pts[i], i});
    return point_matrix(cycles(s), cycles_open(o), pairs, true);
}

ChainMap PointModel::restrict_open_to_open(OpenId sup, OpenId sub) {
    if (!contains(sup, sub)) throw std::invalid_argument("restrict_open_to_open: not contained");
    const auto& a = opens_.at(sup.v);
    const auto& b = opens_.at(sub.v);
    std::vector<std::pair<int, int>> pairs;
    for (int j = 0; j < static_cast<int>(b.pts.size()); ++j) {
        int i = static_cast<int>(std::lower_bound(a.pts.begin(), a.pts.end(), b.pts[j]) -
                                 a.pts.begin());
        pairs.push_back({i, j});
    }
    return point_matrix(cycles_open(sup), cycles_open(sub), pairs, true);
}

std::pair<CxPtr, ChainMap> PointModel::complement(SpaceId s, OpenId o) {
    const auto& od = opens_.at(o.v);
    std::vector<int> rest;
    for (int p = 0; p < point_count(s); ++p)
        if (!std::binary_search(od.pts.begin(), od.pts.end(), p)) rest.push_back(p);
    std::vector<std::string> labels;
    for (int p : rest) labels.push_back(point_label(s, p));
    auto acx = point_complex(labels);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(rest.size()); ++i) pairs.push_back({i, rest[i]});
    return {acx, point_matrix(acx, cycles(s), pairs, true)};
}

MapInfo PointModel::map_info(MapId m) const { return maps_.at(m.v).info; }

OpenId PointModel::preimage(MapId m, OpenId o) {
    const auto& md = maps_.at(m.v);
    const auto& od = opens_.at(o.v);
    if (od.sp != md.info.dst) throw std::invalid_argument("preimage: open not in target");
    std::vector<int> pts;
    for (int p = 0; p < point_count(md.info.src); ++p)
        if (std::binary_search(od.pts.begin(), od.pts.end(), md.f[p])) pts.push_back(p);
    return open_of(md.info.src, std::move(pts));
}

ChainMap PointModel::push_spaces(MapId m) {
    const auto& md = maps_.at(m.v);
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < point_count(md.info.src); ++p) pairs.push_back({p, md.f[p]});
    return point_matrix(cycles(md.info.src), cycles(md.info.dst), pairs, true);
}

ChainMap PointModel::push_on_open(MapId m, OpenId dst) {
    const auto& md = maps_.at(m.v);
    OpenId src = preimage(m, dst);
    const auto& sp = opens_.at(src.v).pts;
    const auto& dp = opens_.at(dst.v).pts;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(sp.size()); ++i) {
        int img = md.f[sp[i]];
        int j = static_cast<int>(std::lower_bound(dp.begin(), dp.end(), img) - dp.begin());
        pairs.push_back({i, j});
    }
    return point_matrix(cycles_open(src), cycles_open(dst), pairs, true);
}

ChainMap PointModel::pull_spaces(MapId m) {
    const auto& md = maps_.at(m.v);
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < point_count(md.info.src); ++p) pairs.push_back({md.f[p], p});
    return point_matrix(cycles(md.info.dst), cycles(md.info.src), pairs, true);
}

ChainMap PointModel::pull_on_open(MapId m, OpenId dst) {
    const auto& md = maps_.at(m.v);
    OpenId src = preimage(m, dst);
    const auto& sp = opens_.at(src.v).pts;
    const auto& dp = opens_.at(dst.v).pts;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(sp.size()); ++i) {
        int img = md.f[sp[i]];
        int j = static_cast<int>(std::lower_bound(dp.begin(), dp.end(), img) - dp.begin());
        pairs.push_back({j, i});
    }
    return point_matrix(cycles_open(dst), cycles_open(src), pairs, true);
}

std::string PointModel::seq_key(const FiberingSequence& seq, int lo, int hi) const {
    std::ostringstream os;
    for (int i = lo; i <= hi; ++i) {
        os << spaces_.at(seq.spaces[i].v).key;
        if (i < hi) {
            if (seq.targets[i].ok())
                os << 'y' << seq.targets[i].v << 'l' << seq.left_to_target[i].v << 'r'
                   << seq.right_to_target[i].v;
            else
                os << '|';
        }
    }
    return os.str();
}

SpaceId PointModel::fiber_space(const FiberingSequence& seq, int lo, int hi) {
    if (lo == hi) return seq.spaces[lo];
    auto key = seq_key(seq, lo, hi);
    if (auto it = fiber_memo_.find(key); it != fiber_memo_.end()) return it->second;
    // junction maps act through the boundary atomic coordinates, so merged
    // sequences flatten to the same space as the original run
    auto last_atom_coord = [&](SpaceId sp, int pt) {
        const auto& sd = spaces_.at(sp.v);
        return sd.atoms.size() == 1 ? pt : sd.tuples[pt].back();
    };
    auto first_atom_coord = [&](SpaceId sp, int pt) {
        const auto& sd = spaces_.at(sp.v);
        return sd.atoms.size() == 1 ? pt : sd.tuples[pt].front();
    };
    std::vector<std::vector<int>> tuples;  // per-factor point indices
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int i) {
        if (i > hi) {
            tuples.push_back(cur);
            return;
        }
        for (int p = 0; p < point_count(seq.spaces[i]); ++p) {
            if (i > lo && seq.targets[i - 1].ok()) {
                int l = map_apply(seq.left_to_target[i - 1],
                                  last_atom_coord(seq.spaces[i - 1], cur.back()));
                int r = map_apply(seq.right_to_target[i - 1], first_atom_coord(seq.spaces[i], p));
                if (l != r) continue;
            }
            cur.push_back(p);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(lo);
    // flatten factor points to atomic coordinates
    std::vector<int> atoms;
    for (int i = lo; i <= hi; ++i) {
        const auto& fa = spaces_.at(seq.spaces[i].v).atoms;
        atoms.insert(atoms.end(), fa.begin(), fa.end());
    }
    std::vector<std::vector<int>> flat;
    for (const auto& t : tuples) {
        std::vector<int> coords;
        for (int i = lo; i <= hi; ++i) {
            const auto& sd = spaces_.at(seq.spaces[i].v);
            if (sd.atoms.size() == 1)
                coords.push_back(t[i - lo]);
            else {
                const auto& sub = sd.tuples[t[i - lo]];
                coords.insert(coords.end(), sub.begin(), sub.end());
            }
        }
        flat.push_back(std::move(coords));
    }
    std::vector<std::string> labels;
    for (const auto& t : flat) {
        std::ostringstream os;
        os << '(';
        for (size_t a = 0; a < atoms.size(); ++a) {
            if (a) os << '|';
            os << spaces_.at(atoms[a]).labels.at(t[a]);
        }
        os << ')';
        labels.push_back(os.str());
    }
    SpaceId id = add_space("fiber:" + key, std::move(labels), 0);
    spaces_[id.v].atoms = atoms;
    spaces_[id.v].tuples = flat;
    spaces_[id.v].key = key;
    for (int q = 0; q < static_cast<int>(flat.size()); ++q)
        spaces_[id.v].tuple_index[flat[q]] = q;
    fiber_memo_[key] = id;
    return id;
}

MapId PointModel::fiber_projection(const FiberingSequence& seq, int lo, int hi, int lo2,
                                   int hi2) {
    if (lo2 < lo || hi2 > hi) throw std::invalid_argument("fiber_projection: not contained");
    std::string key = seq_key(seq, lo, hi) + "->" + seq_key(seq, lo2, hi2);
    if (auto it = proj_memo_.find(key); it != proj_memo_.end()) return it->second;
    SpaceId src = fiber_space(seq, lo, hi);
    SpaceId dst = fiber_space(seq, lo2, hi2);
    // atomic offsets of the [lo2,hi2] region within [lo,hi]
    int off = 0;
    for (int i = lo; i < lo2; ++i)
        off += static_cast<int>(spaces_.at(seq.spaces[i].v).atoms.size());
    int len = 0;
    for (int i = lo2; i <= hi2; ++i)
        len += static_cast<int>(spaces_.at(seq.spaces[i].v).atoms.size());
    std::vector<int> images;
    const auto& sd = spaces_.at(src.v);
    const auto& dd = spaces_.at(dst.v);
    for (int p = 0; p < point_count(src); ++p) {
        std::vector<int> coords = (sd.atoms.size() == 1) ? std::vector<int>{p} : sd.tuples[p];
        std::vector<int> sub(coords.begin() + off, coords.begin() + off + len);
        if (dd.atoms.size() == 1)
            images.push_back(sub[0]);
        else
            images.push_back(dd.tuple_index.at(sub));
    }
    MapId id = add_map("proj:" + key, src, dst, std::move(images));
    proj_memo_[key] = id;
    return id;
}

bool PointModel::proper(const FiberingSequence&, const std::vector<std::pair<int, int>>&,
                        std::span<const LocatedRef>) {
    return true;  // dimension-zero model: every intersection is proper
}

NamedElem PointModel::product_pair(const FiberingSequence& seq, int lo, int mid, int hi,
                                   const std::vector<int>&, const GenId& a,
                                   const std::vector<int>&, const GenId& b) {
    SpaceId L = fiber_space(seq, lo, mid);
    SpaceId R = fiber_space(seq, mid + 1, hi);
    SpaceId T = fiber_space(seq, lo, hi);
    int pa = point_index(L, a.str());
    int pb = point_index(R, b.str());
    if (pa < 0 || pb < 0) throw std::invalid_argument("product_pair: unknown point generator");
    const auto& ld = spaces_.at(L.v);
    const auto& rd = spaces_.at(R.v);
    std::vector<int> coords = (ld.atoms.size() == 1) ? std::vector<int>{pa} : ld.tuples[pa];
    std::vector<int> right = (rd.atoms.size() == 1) ? std::vector<int>{pb} : rd.tuples[pb];
    if (seq.targets[mid].ok()) {
        int l = map_apply(seq.left_to_target[mid], coords.back());
        int r = map_apply(seq.right_to_target[mid], right.front());
        if (l != r) return {};
    }
    coords.insert(coords.end(), right.begin(), right.end());
    const auto& td = spaces_.at(T.v);
    auto it = td.tuple_index.find(coords);
    if (it == td.tuple_index.end()) return {};  // incompatible intermediate junctions
    return {{GenId::atom(td.labels[it->second]), 1}};
}

// ---------------------------------------------------------------------------
// TableModel

SpaceId TableModel::add_space(std::string name, int dim, CxPtr cx) {
    SpaceData s;
    s.name = std::move(name);
    s.dim = dim;
    s.cx = std::move(cx);
    spaces_.push_back(std::move(s));
    return {static_cast<int>(spaces_.size()) - 1};
}

OpenId TableModel::add_open(SpaceId sp, std::string name, CxPtr cx, ChainMap from_space) {
    OpenData o;
    o.name = std::move(name);
    o.sp = sp;
    o.cx = std::move(cx);
    o.from_space = std::move(from_space);
    opens_.push_back(std::move(o));
    return {static_cast<int>(opens_.size()) - 1};
}

void TableModel::set_intersection(OpenId a, OpenId b, OpenId c) {
    inters_[{std::min(a.v, b.v), std::max(a.v, b.v)}] = c;
}

void TableModel::set_open_restriction(OpenId sup, OpenId sub, ChainMap m) {
    opens_.at(sup.v).to_sub.emplace(sub.v, std::move(m));
}

void TableModel::set_complement(SpaceId s, OpenId o, CxPtr cx, ChainMap incl) {
    spaces_.at(s.v).complements.emplace(o.v, std::make_pair(std::move(cx), std::move(incl)));
}

MapId TableModel::add_map(std::string name, MapInfo info, std::optional<ChainMap> push,
                          std::optional<ChainMap> pull) {
    MapData m;
    m.name = std::move(name);
    m.info = info;
    m.push = std::move(push);
    m.pull = std::move(pull);
    maps_.push_back(std::move(m));
    return {static_cast<int>(maps_.size()) - 1};
}

void TableModel::set_preimage(MapId m, OpenId dst, OpenId src) {
    maps_.at(m.v).preim[dst.v] = src;
}
void TableModel::set_push_on_open(MapId m, OpenId dst, ChainMap mm) {
    maps_.at(m.v).push_open.emplace(dst.v, std::move(mm));
}
void TableModel::set_pull_on_open(MapId m, OpenId dst, ChainMap mm) {
    maps_.at(m.v).pull_open.emplace(dst.v, std::move(mm));
}

void TableModel::register_fiber_space(const std::string& seq, int lo, int hi, SpaceId s) {
    fiber_sp_[seq][{lo, hi}] = s;
}
void TableModel::register_fiber_projection(const std::string& seq, int lo, int hi, int lo2,
                                           int hi2, MapId m) {
    fiber_proj_[seq][{lo, hi, lo2, hi2}] = m;
}

std::string TableModel::seq_fingerprint(const FiberingSequence& seq) const {
    std::ostringstream os;
    for (int i = 0; i < seq.size(); ++i) {
        os << 's' << seq.spaces[i].v;
        if (i + 1 < seq.size()) os << (seq.targets[i].ok() ? 'y' : '|');
    }
    return os.str();
}

void TableModel::set_sequence_name(const FiberingSequence& seq, std::string name) {
    seq_names_[seq_fingerprint(seq)] = std::move(name);
}

std::string TableModel::sequence_name(const FiberingSequence& seq) const {
    auto it = seq_names_.find(seq_fingerprint(seq));
    if (it == seq_names_.end()) throw LoadError("TableModel: unregistered fibering sequence");
    return it->second;
}

void TableModel::add_proper(PKey tuple) {
    std::sort(tuple.begin(), tuple.end());
    proper_.push_back(std::move(tuple));
}

OpenId chain_open_of(GeometryModel& g, const FiberingSequence& seq, int lo, int hi,
                     const std::vector<int>& chain) {
    if (chain.empty()) return {};
    if (seq.covs.empty()) throw std::invalid_argument("chain_open_of: sequence has no coverings");
    // opens of the concatenated covering, as opens of the merged space
    std::vector<OpenId> concat;
    for (int i = lo; i <= hi; ++i) {
        for (OpenId o : seq.covs[i].opens) {
            if (lo == hi)
                concat.push_back(o);
            else
                concat.push_back(g.preimage(g.fiber_projection(seq, lo, hi, i, i), o));
        }
    }
    OpenId acc = concat.at(chain[0]);
    for (size_t k = 1; k < chain.size(); ++k) acc = g.intersect(acc, concat.at(chain[k]));
    return acc;
}

void TableModel::add_product(const std::string& seq, int lo, int mid, int hi,
                             std::vector<int> chain_a, std::string a, std::vector<int> chain_b,
                             std::string b, NamedElem value) {
    std::ostringstream os;
    os << seq << ':' << lo << ',' << mid << ',' << hi << ":[";
    for (int c : chain_a) os << c << ' ';
    os << "]" << a << ":[";
    for (int c : chain_b) os << c << ' ';
    os << "]" << b;
    products_[os.str()] = std::move(value);
}

SpaceId TableModel::space_by_name(const std::string& n) const {
    for (int i = 0; i < static_cast<int>(spaces_.size()); ++i)
        if (spaces_[i].name == n) return {i};
    throw LoadError("TableModel: unknown space " + n);
}

OpenId TableModel::open_by_name(const std::string& n) const {
    for (int i = 0; i < static_cast<int>(opens_.size()); ++i)
        if (opens_[i].name == n) return {i};
    throw LoadError("TableModel: unknown open " + n);
}

int TableModel::dim(SpaceId s) const { return spaces_.at(s.v).dim; }
std::string TableModel::space_name(SpaceId s) const { return spaces_.at(s.v).name; }
CxPtr TableModel::cycles(SpaceId s) { return spaces_.at(s.v).cx; }
CxPtr TableModel::cycles_open(OpenId o) { return opens_.at(o.v).cx; }
SpaceId TableModel::space_of(OpenId o) const { return opens_.at(o.v).sp; }

OpenId TableModel::intersect(OpenId a, OpenId b) {
    if (a == b) return a;
    auto it = inters_.find({std::min(a.v, b.v), std::max(a.v, b.v)});
    if (it == inters_.end()) throw LoadError("TableModel: undeclared intersection");
    return it->second;
}

bool TableModel::contains(OpenId big, OpenId small) {
    return big == small || opens_.at(big.v).to_sub.count(small.v) > 0;
}

OpenId TableModel::union_of(const std::vector<OpenId>& parts) {
    auto key = parts;
    std::sort(key.begin(), key.end());
    for (const auto& [ps, w] : unions_)
        if (ps == key) return w;
    throw LoadError("TableModel: undeclared union");
}

bool TableModel::union_is(const std::vector<OpenId>& parts, OpenId whole) {
    auto key = parts;
    std::sort(key.begin(), key.end());
    for (const auto& [ps, w] : unions_)
        if (ps == key && w == whole) return true;
    return false;
}

void TableModel::declare_union(std::vector<OpenId> parts, OpenId whole) {
    std::sort(parts.begin(), parts.end());
    unions_.push_back({std::move(parts), whole});
}

ChainMap TableModel::restrict_space_to_open(SpaceId s, OpenId o) {
    const auto& od = opens_.at(o.v);
    if (od.sp != s) throw std::invalid_argument("TableModel: open of another space");
    return od.from_space;
}

ChainMap TableModel::restrict_open_to_open(OpenId sup, OpenId sub) {
    if (sup == sub) return ChainMap::identity(opens_.at(sup.v).cx);
    auto it = opens_.at(sup.v).to_sub.find(sub.v);
    if (it == opens_.at(sup.v).to_sub.end())
        throw LoadError("TableModel: undeclared restriction " + opens_.at(sup.v).name + " -> " +
                        opens_.at(sub.v).name);
    return it->second;
}

std::pair<CxPtr, ChainMap> TableModel::complement(SpaceId s, OpenId o) {
    auto it = spaces_.at(s.v).complements.find(o.v);
    if (it == spaces_.at(s.v).complements.end())
        throw LoadError("TableModel: undeclared complement");
    return it->second;
}

MapInfo TableModel::map_info(MapId m) const { return maps_.at(m.v).info; }

OpenId TableModel::preimage(MapId m, OpenId o) {
    auto it = maps_.at(m.v).preim.find(o.v);
    if (it == maps_.at(m.v).preim.end()) throw LoadError("TableModel: undeclared preimage");
    return it->second;
}

ChainMap TableModel::push_spaces(MapId m) {
    const auto& md = maps_.at(m.v);
    if (!md.info.projective)
        throw std::invalid_argument("TableModel: push along a non-projective map");
    if (!md.push) throw LoadError("TableModel: push matrix not declared for " + md.name);
    return *md.push;
}

ChainMap TableModel::push_on_open(MapId m, OpenId dst) {
    const auto& md = maps_.at(m.v);
    if (!md.info.projective)
        throw std::invalid_argument("TableModel: push along a non-projective map");
    auto it = md.push_open.find(dst.v);
    if (it == md.push_open.end()) throw LoadError("TableModel: undeclared push on open");
    return it->second;
}

ChainMap TableModel::pull_spaces(MapId m) {
    const auto& md = maps_.at(m.v);
    if (!md.info.smooth) throw std::invalid_argument("TableModel: pull along a non-smooth map");
    if (!md.pull) throw LoadError("TableModel: pull matrix not declared for " + md.name);
    return *md.pull;
}

ChainMap TableModel::pull_on_open(MapId m, OpenId dst) {
    const auto& md = maps_.at(m.v);
    if (!md.info.smooth) throw std::invalid_argument("TableModel: pull along a non-smooth map");
    auto it = md.pull_open.find(dst.v);
    if (it == md.pull_open.end()) throw LoadError("TableModel: undeclared pull on open");
    return it->second;
}

SpaceId TableModel::fiber_space(const FiberingSequence& seq, int lo, int hi) {
    if (lo == hi) return seq.spaces[lo];
    auto name = sequence_name(seq);
    auto it = fiber_sp_.find(name);
    if (it != fiber_sp_.end())
        if (auto jt = it->second.find({lo, hi}); jt != it->second.end()) return jt->second;
    throw LoadError("TableModel: undeclared fiber space [" + std::to_string(lo) + "," +
                    std::to_string(hi) + "] of " + name);
}

MapId TableModel::fiber_projection(const FiberingSequence& seq, int lo, int hi, int lo2,
                                   int hi2) {
    auto name = sequence_name(seq);
    auto it = fiber_proj_.find(name);
    if (it != fiber_proj_.end())
        if (auto jt = it->second.find({lo, hi, lo2, hi2}); jt != it->second.end())
            return jt->second;
    throw LoadError("TableModel: undeclared fiber projection of " + name);
}

bool TableModel::proper_key(const PKey& key) const {
    if (key.size() <= 1) return true;
    for (const auto& tup : proper_)
        if (std::includes(tup.begin(), tup.end(), key.begin(), key.end())) return true;
    return false;
}

bool TableModel::proper(const FiberingSequence& seq,
                        const std::vector<std::pair<int, int>>& groups,
                        std::span<const LocatedRef> gens) {
    PKey key;
    for (const auto& g : gens) {
        auto [lo, hi] = groups.at(g.group);
        if (g.chain.empty()) {
            SpaceId sp = fiber_space(seq, lo, hi);
            key.push_back({spaces_.at(sp.v).name, g.id.str()});
        } else {
            OpenId o = chain_open_of(*this, seq, lo, hi, g.chain);
            key.push_back({opens_.at(o.v).name, g.id.str()});
        }
    }
    std::sort(key.begin(), key.end());
    return proper_key(key);
}

NamedElem TableModel::product_pair(const FiberingSequence& seq, int lo, int mid, int hi,
                                   const std::vector<int>& chain_a, const GenId& a,
                                   const std::vector<int>& chain_b, const GenId& b) {
    std::ostringstream os;
    os << sequence_name(seq) << ':' << lo << ',' << mid << ',' << hi << ":[";
    for (int c : chain_a) os << c << ' ';
    os << "]" << a.str() << ":[";
    for (int c : chain_b) os << c << ' ';
    os << "]" << b.str();
    auto it = products_.find(os.str());
    if (it == products_.end()) throw LoadError("TableModel: undeclared product " + os.str());
    return it->second;
}

void TableModel::validate() {
    // locate a generator inside a named complex (holder = space or open)
    auto holder_cx = [&](const std::string& name) -> CxPtr {
        for (const auto& s : spaces_)
            if (s.name == name) return s.cx;
        for (const auto& o : opens_)
            if (o.name == name) return o.cx;
        throw LoadError("TableModel: unknown complex holder " + name);
    };
    auto find_gen = [&](const CxPtr& cx, const std::string& id) -> std::pair<int, int> {
        for (int p = cx->lo(); p <= cx->hi(); ++p)
            if (auto i = cx->index_of(p, GenId::atom(id))) return {p, *i};
        throw LoadError("TableModel: unknown generator " + id + " in properness table");
    };
    // boundary closure of the properness table
    for (const auto& tup : proper_) {
        for (size_t m = 0; m < tup.size(); ++m) {
            const auto& [holder, id] = tup[m];
            auto cx = holder_cx(holder);
            auto [p, i] = find_gen(cx, id);
            SparseMat dm = cx->d(p);
            for (const auto& t : dm.entries()) {
                if (t.col != i) continue;
                auto repl = tup;
                repl[m].second = cx->gen(p + 1, t.row).str();
                std::sort(repl.begin(), repl.end());
                if (!proper_key(repl))
                    throw LoadError("TableModel: properness table not closed under boundary (" +
                                    holder + ": " + id + ")");
            }
        }
    }
    // closure under declared restrictions out of a holder
    for (const auto& tup : proper_) {
        for (size_t m = 0; m < tup.size(); ++m) {
            const auto& [holder, id] = tup[m];
            auto step = [&](const CxPtr& sup_cx, const ChainMap& rmap, const std::string& sub_name,
                            const CxPtr& sub_cx) {
                auto [p, i] = find_gen(sup_cx, id);
                auto col = rmap.at(p).column(i);
                for (int r = 0; r < static_cast<int>(col.size()); ++r) {
                    if (col[r] == 0) continue;
                    auto repl = tup;
                    repl[m] = {sub_name, sub_cx->gen(p, r).str()};
                    std::sort(repl.begin(), repl.end());
                    if (!proper_key(repl))
                        throw LoadError(
                            "TableModel: properness table not closed under restriction (" +
                            holder + ": " + id + ")");
                }
            };
            for (const auto& o : opens_)
                if (o.name == holder)
                    for (const auto& [sub, rmap] : o.to_sub)
                        step(o.cx, rmap, opens_[sub].name, opens_[sub].cx);
            for (const auto& s : spaces_)
                if (s.name == holder)
                    for (const auto& o : opens_)
                        if (o.sp.v == static_cast<int>(&s - spaces_.data()))
                            step(s.cx, o.from_space, o.name, o.cx);
        }
    }
}

}  // namespace relcx::geo
