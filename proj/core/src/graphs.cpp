#include "bosejj/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bosejj {

namespace {

// Infinite-graph degree for the built kinds; a patch vertex with fewer
// neighbors sits on the boundary.
int ideal_degree(const GraphPatch& g, int v) {
    switch (g.kind) {
        case PatchKind::Zd: return 2 * g.d;
        case PatchKind::Comb: return g.coords[v].back() == 0 ? 2 * g.d + 2 : 2;
        case PatchKind::Custom: return g.degree(v);
    }
    return g.degree(v);
}

void finalize_adjacency(GraphPatch& g, std::vector<std::vector<int>>& nbr) {
    g.adj_offsets.assign(g.n + 1, 0);
    for (int v = 0; v < g.n; ++v) {
        std::sort(nbr[v].begin(), nbr[v].end());
        g.adj_offsets[v + 1] = g.adj_offsets[v] + static_cast<int>(nbr[v].size());
    }
    g.adj.reserve(g.adj_offsets[g.n]);
    for (int v = 0; v < g.n; ++v)
        g.adj.insert(g.adj.end(), nbr[v].begin(), nbr[v].end());
}

void compute_depth(GraphPatch& g) {
    g.depth.assign(g.n, -1);
    std::queue<int> q;
    for (int v = 0; v < g.n; ++v) {
        if (g.degree(v) < ideal_degree(g, v)) {
            g.depth[v] = 0;
            q.push(v);
        }
    }
    if (q.empty()) {
        g.depth.assign(g.n, g.n);
        return;
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int y : g.neighbors(v)) {
            if (g.depth[y] < 0) {
                g.depth[y] = g.depth[v] + 1;
                q.push(y);
            }
        }
    }
}

void require_interior_support(const GraphPatch& g, const GraphExplicit& xi) {
    for (const auto& [v, a] : xi.amp) {
        if (a != cdouble{0.0, 0.0} && !g.is_interior(v))
            throw std::invalid_argument("support touches the boundary margin");
    }
}

std::vector<int> sorted_intersection(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Interior partners of x at hop distance <= 2, including x itself, with
// id >= x so each unordered pair is visited once.
std::vector<int> pair_partners(const GraphPatch& g, int x) {
    std::vector<int> s{x};
    for (int y : g.neighbors(x)) {
        s.push_back(y);
        for (int z : g.neighbors(y)) s.push_back(z);
    }
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::erase_if(s, [&](int y) { return y < x || !g.is_interior(y); });
    return s;
}

}  // namespace

std::optional<int> GraphPatch::find(const std::vector<int>& c) const {
    auto it = coord_index.find(c);
    if (it == coord_index.end()) return std::nullopt;
    return it->second;
}

std::optional<int> GraphPatch::find(const std::string& name) const {
    auto it = name_index.find(name);
    if (it == name_index.end()) return std::nullopt;
    return it->second;
}

bool GraphPatch::is_regular() const {
    for (int v = 1; v < n; ++v)
        if (degree(v) != degree(0)) return false;
    return true;
}

GraphPatch make_zd_patch(int d, int radius, int margin) {
    if (d < 1 || radius < 1) throw std::invalid_argument("bad lattice patch parameters");
    GraphPatch g;
    g.kind = PatchKind::Zd;
    g.d = d;
    g.radius = radius;
    g.boundary_margin = margin;

    std::vector<int> c(d, -radius);
    for (;;) {
        g.coord_index.emplace(c, static_cast<int>(g.coords.size()));
        g.coords.push_back(c);
        int k = d - 1;
        while (k >= 0 && c[k] == radius) c[k--] = -radius;
        if (k < 0) break;
        ++c[k];
    }
    g.n = static_cast<int>(g.coords.size());

    std::vector<std::vector<int>> nbr(g.n);
    for (int v = 0; v < g.n; ++v) {
        std::vector<int> w = g.coords[v];
        for (int k = 0; k < d; ++k) {
            for (int s : {-1, 1}) {
                w[k] += s;
                if (auto u = g.find(w)) nbr[v].push_back(*u);
                w[k] -= s;
            }
        }
    }
    finalize_adjacency(g, nbr);
    compute_depth(g);
    return g;
}

GraphPatch make_comb_patch(int d, int base_radius, int tooth_length, int margin) {
    if (d < 1 || base_radius < 1 || tooth_length < 1)
        throw std::invalid_argument("bad comb patch parameters");
    GraphPatch g;
    g.kind = PatchKind::Comb;
    g.d = d;
    g.base_radius = base_radius;
    g.tooth_length = tooth_length;
    g.boundary_margin = margin;

    std::vector<int> c(d + 1);
    std::fill(c.begin(), c.end() - 1, -base_radius);
    c.back() = -tooth_length;
    for (;;) {
        g.coord_index.emplace(c, static_cast<int>(g.coords.size()));
        g.coords.push_back(c);
        int k = d;
        while (k >= 0 && c[k] == (k == d ? tooth_length : base_radius)) {
            c[k] = (k == d ? -tooth_length : -base_radius);
            --k;
        }
        if (k < 0) break;
        ++c[k];
    }
    g.n = static_cast<int>(g.coords.size());

    std::vector<std::vector<int>> nbr(g.n);
    for (int v = 0; v < g.n; ++v) {
        std::vector<int> w = g.coords[v];
        for (int s : {-1, 1}) {
            w[d] += s;
            if (auto u = g.find(w)) nbr[v].push_back(*u);
            w[d] -= s;
        }
        if (w[d] == 0) {
            for (int k = 0; k < d; ++k) {
                for (int s : {-1, 1}) {
                    w[k] += s;
                    if (auto u = g.find(w)) nbr[v].push_back(*u);
                    w[k] -= s;
                }
            }
        }
    }
    finalize_adjacency(g, nbr);
    compute_depth(g);
    return g;
}

Orientation orientation_from_pairs(const GraphPatch& g,
                                   const std::vector<std::pair<int, int>>& pairs) {
    Orientation o;
    o.succ.assign(g.n, {});
    o.pred.assign(g.n, {});
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : pairs) {
        if (u < 0 || u >= g.n || v < 0 || v >= g.n)
            throw std::invalid_argument("directed pair out of range");
        auto nb = g.neighbors(u);
        if (!std::binary_search(nb.begin(), nb.end(), v))
            throw std::invalid_argument("directed pair is not a patch edge");
        if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
            throw std::invalid_argument("edge directed twice");
        o.succ[u].push_back(v);
        o.pred[v].push_back(u);
    }
    if (2 * static_cast<int>(pairs.size()) != g.adj_offsets[g.n])
        throw std::invalid_argument("orientation does not cover every edge");
    for (int v = 0; v < g.n; ++v) {
        std::sort(o.succ[v].begin(), o.succ[v].end());
        std::sort(o.pred[v].begin(), o.pred[v].end());
    }
    return o;
}

Orientation orient_by_phi(const GraphPatch& g, const std::vector<double>& phi) {
    std::vector<std::pair<int, int>> pairs;
    for (int u = 0; u < g.n; ++u) {
        for (int v : g.neighbors(u)) {
            if (v < u) continue;
            if (phi[u] == phi[v]) throw std::invalid_argument("zero increment edge cannot be directed");
            pairs.emplace_back(phi[u] < phi[v] ? u : v, phi[u] < phi[v] ? v : u);
        }
    }
    return orientation_from_pairs(g, pairs);
}

ParsedGraph parse_edge_list(const std::string& text) {
    GraphPatch g;
    g.kind = PatchKind::Custom;
    g.boundary_margin = 0;

    auto intern = [&](const std::string& s) {
        auto it = g.name_index.find(s);
        if (it != g.name_index.end()) return it->second;
        int id = static_cast<int>(g.names.size());
        g.names.push_back(s);
        g.name_index.emplace(s, id);
        return id;
    };

    std::vector<std::pair<int, int>> directed;
    std::set<std::pair<int, int>> seen;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string a, b;
        if (!(ls >> a)) continue;
        if (!(ls >> b)) throw std::invalid_argument("edge line needs two vertex ids");
        std::string extra;
        if (ls >> extra) throw std::invalid_argument("edge line has trailing tokens");
        int u = intern(a), v = intern(b);
        if (u == v) throw std::invalid_argument("loops are not allowed");
        if (!seen.emplace(std::min(u, v), std::max(u, v)).second)
            throw std::invalid_argument("duplicate edge");
        directed.emplace_back(u, v);
    }
    g.n = static_cast<int>(g.names.size());
    if (g.n == 0) throw std::invalid_argument("empty edge list");

    std::vector<std::vector<int>> nbr(g.n);
    for (auto [u, v] : directed) {
        nbr[u].push_back(v);
        nbr[v].push_back(u);
    }
    finalize_adjacency(g, nbr);

    std::vector<char> vis(g.n, 0);
    std::queue<int> q;
    q.push(0);
    vis[0] = 1;
    int count = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int y : g.neighbors(v))
            if (!vis[y]) { vis[y] = 1; ++count; q.push(y); }
    }
    if (count != g.n) throw std::invalid_argument("graph is not connected");

    compute_depth(g);
    Orientation o = orientation_from_pairs(g, directed);
    return {std::move(g), std::move(o)};
}

double GraphExplicit::norm() const {
    double s = 0.0;
    for (const auto& [v, a] : amp) s += std::norm(a);
    return std::sqrt(s);
}

GraphExplicit delta_at(const GraphPatch& g, const std::vector<int>& coords) {
    auto v = g.find(coords);
    if (!v) throw std::invalid_argument("site outside the patch");
    GraphExplicit d;
    d.amp.emplace(*v, cdouble{1.0, 0.0});
    return d;
}

cdouble inner(const GraphExplicit& a, const GraphExplicit& b) {
    cdouble s{0.0, 0.0};
    for (const auto& [v, x] : a.amp) s += std::conj(x) * b.at(v);
    return s;
}

AdaptedFunction coordinate_sum_phi(const GraphPatch& g) {
    if (g.kind == PatchKind::Custom)
        throw std::invalid_argument("coordinate sum needs lattice coordinates");
    AdaptedFunction f;
    f.lipschitz_c = 1.0;
    f.phi.resize(g.n);
    for (int v = 0; v < g.n; ++v) {
        long s = 0;
        for (int c : g.coords[v]) s += c;
        f.phi[v] = static_cast<double>(s);
    }
    return f;
}

AdaptedFunction base_coordinate_sum_phi(const GraphPatch& g) {
    if (g.kind != PatchKind::Comb)
        throw std::invalid_argument("base coordinate sum is a comb construction");
    AdaptedFunction f;
    f.lipschitz_c = 1.0;
    f.phi.resize(g.n);
    for (int v = 0; v < g.n; ++v) {
        long s = 0;
        for (std::size_t k = 0; k + 1 < g.coords[v].size(); ++k) s += g.coords[v][k];
        f.phi[v] = static_cast<double>(s);
    }
    return f;
}

GraphExplicit a_apply(const GraphPatch& g, const GraphExplicit& xi) {
    require_interior_support(g, xi);
    GraphExplicit out;
    for (const auto& [v, a] : xi.amp)
        for (int y : g.neighbors(v)) out.amp[y] += a;
    std::erase_if(out.amp, [](const auto& kv) { return kv.second == cdouble{0.0, 0.0}; });
    return out;
}

GraphExplicit k_apply(const GraphPatch& g, const AdaptedFunction& phi,
                      const GraphExplicit& xi) {
    require_interior_support(g, xi);
    GraphExplicit out;
    const cdouble i{0.0, 1.0};
    for (const auto& [y, a] : xi.amp)
        for (int x : g.neighbors(y)) out.amp[x] += i * (phi.phi[y] - phi.phi[x]) * a;
    std::erase_if(out.amp, [](const auto& kv) { return kv.second == cdouble{0.0, 0.0}; });
    return out;
}

void a_matvec(const GraphPatch& g, std::span<const cdouble> in, std::span<cdouble> out) {
    for (int v = 0; v < g.n; ++v) {
        cdouble s{0.0, 0.0};
        for (int y : g.neighbors(v)) s += in[y];
        out[v] = s;
    }
}

AdaptedVerdict check_adapted(const GraphPatch& g, const AdaptedFunction& f) {
    AdaptedVerdict verdict;
    constexpr double tol = 1e-9;
    for (int x = 0; x < g.n; ++x) {
        if (!g.is_interior(x)) continue;
        for (int y : g.neighbors(x)) {
            if (y < x || !g.is_interior(y)) continue;
            double inc = std::abs(f.phi[x] - f.phi[y]);
            verdict.max_edge_increment = std::max(verdict.max_edge_increment, inc);
            if (inc > f.lipschitz_c + 1e-12) verdict.edge_violations.emplace_back(x, y);
        }
        for (int y : pair_partners(g, x)) {
            auto common = sorted_intersection(g.neighbors(x), g.neighbors(y));
            if (common.empty()) continue;
            double s2 = 0.0, s3 = 0.0;
            for (int z : common) {
                double a = f.phi[z] - f.phi[x];
                double b = f.phi[z] - f.phi[y];
                s2 += a + b;
                s3 += a * b * (a + b);
            }
            ++verdict.pairs_checked;
            if (std::abs(s2) > tol) verdict.balance_violations.emplace_back(x, y);
            if (std::abs(s3) > tol) verdict.cubic_violations.emplace_back(x, y);
        }
    }
    return verdict;
}

namespace {

bool is_succ(const Orientation& o, int x, int y) {
    const auto& s = o.succ[x];
    return std::binary_search(s.begin(), s.end(), y);
}

// BFS integer labelling: pos(y) = pos(x) + 1 across every forward edge.  A
// conflicting non-tree edge closes a walk with nonzero index through the BFS
// tree, which is returned as the witness.
bool build_position(const GraphPatch& g, const Orientation& o,
                    std::vector<int>& pos, std::vector<int>& witness) {
    pos.assign(g.n, 0);
    std::vector<char> vis(g.n, 0);
    std::vector<int> parent(g.n, -1);
    std::queue<int> q;
    q.push(0);
    vis[0] = 1;
    while (!q.empty()) {
        int x = q.front();
        q.pop();
        for (int y : g.neighbors(x)) {
            int want = pos[x] + (is_succ(o, x, y) ? 1 : -1);
            if (!vis[y]) {
                vis[y] = 1;
                pos[y] = want;
                parent[y] = x;
                q.push(y);
            } else if (pos[y] != want) {
                std::vector<int> a, b;
                for (int v = x; v != -1; v = parent[v]) a.push_back(v);
                for (int v = y; v != -1; v = parent[v]) b.push_back(v);
                std::reverse(a.begin(), a.end());
                witness = std::move(a);
                witness.insert(witness.end(), b.begin(), b.end());
                return false;
            }
        }
    }
    return true;
}

long walk_index(const Orientation& o, const std::vector<int>& walk) {
    long idx = 0;
    for (std::size_t j = 1; j < walk.size(); ++j)
        idx += is_succ(o, walk[j - 1], walk[j]) ? 1 : -1;
    return idx;
}

// Enumerates every closed walk of length <= maxlen from every start.
bool exhaustive_closed_walks(const GraphPatch& g, const Orientation& o, int maxlen,
                             long& checked) {
    std::vector<int> walk;
    bool ok = true;
    auto dfs = [&](auto&& self, int start, int v, int idx, int len) -> void {
        if (!ok) return;
        if (len > 0 && v == start) {
            ++checked;
            if (idx != 0) ok = false;
        }
        if (len == maxlen) return;
        for (int y : g.neighbors(v))
            self(self, start, y, idx + (is_succ(o, v, y) ? 1 : -1), len + 1);
    };
    for (int v = 0; v < g.n && ok; ++v) dfs(dfs, v, v, 0, 0);
    return ok;
}

}  // namespace

AdmissibleVerdict check_admissible(const GraphPatch& g, const Orientation& o,
                                   int max_path_len, std::uint64_t seed) {
    AdmissibleVerdict verdict;

    std::vector<int> pos, witness;
    verdict.univoque = build_position(g, o, pos, witness);
    if (verdict.univoque)
        verdict.position = pos;
    else
        verdict.bad_cycle = witness;

    int maxdeg = 0;
    for (int v = 0; v < g.n; ++v) maxdeg = std::max(maxdeg, g.degree(v));
    double cost = static_cast<double>(g.n) * std::pow(static_cast<double>(maxdeg),
                                                      static_cast<double>(max_path_len));
    if (cost <= 5e5) {
        if (!exhaustive_closed_walks(g, o, max_path_len, verdict.closed_walks_checked))
            verdict.univoque = false;
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pick_start(0, g.n - 1);
        std::vector<int> walk;
        for (int trial = 0; trial < 4000; ++trial) {
            walk.clear();
            walk.push_back(pick_start(rng));
            for (int step = 0; step < max_path_len; ++step) {
                auto nb = g.neighbors(walk.back());
                std::uniform_int_distribution<int> pick(0, static_cast<int>(nb.size()) - 1);
                walk.push_back(nb[pick(rng)]);
                if (walk.back() == walk.front()) {
                    ++verdict.closed_walks_checked;
                    if (walk_index(o, walk) != 0) verdict.univoque = false;
                    break;
                }
            }
        }
    }

    verdict.uniform = true;
    for (int x = 0; x < g.n; ++x) {
        if (!g.is_interior(x)) continue;
        for (int y : pair_partners(g, x)) {
            auto minus = sorted_intersection(o.pred[x], o.pred[y]);
            auto plus = sorted_intersection(o.succ[x], o.succ[y]);
            if (minus.size() != plus.size()) {
                verdict.uniform = false;
                verdict.uniformity_violations.emplace_back(x, y);
            }
        }
    }
    return verdict;
}

double PFWeight::value(const GraphPatch& g, int v) const {
    if (kind == Kind::ConstantOne) return 1.0;
    // e^{-theta_d} = cosh - sinh = sqrt(d^2+1) - d, kept in algebraic form so
    // the tooth recursion v(x-1) + v(x+1) = 2 cosh(theta_d) v(x) is exact.
    double decay = std::sqrt(static_cast<double>(d) * d + 1.0) - d;
    int x = std::abs(g.coords[v].back());
    return std::pow(decay, x) / (2.0 * std::sqrt(norm_sq) * d);
}

PFWeight pf_weight(const GraphPatch& g) {
    PFWeight w;
    switch (g.kind) {
        case PatchKind::Zd:
            w.kind = PFWeight::Kind::ConstantOne;
            w.d = g.d;
            w.spr = 2.0 * g.d;
            return w;
        case PatchKind::Comb: {
            w.kind = PFWeight::Kind::CombClosedForm;
            w.d = g.d;
            double dd = static_cast<double>(g.d);
            w.theta_d = std::log(std::sqrt(dd * dd + 1.0) + dd);
            w.norm_sq = std::sqrt(dd * dd + 1.0) / (4.0 * dd * dd * dd);
            w.spr = 2.0 * std::sqrt(dd * dd + 1.0);
            return w;
        }
        case PatchKind::Custom:
            if (!g.is_regular())
                throw std::invalid_argument("PF weight is only built for regular or comb kinds");
            w.kind = PFWeight::Kind::ConstantOne;
            w.spr = g.n > 0 ? g.degree(0) : 0;
            return w;
    }
    throw std::invalid_argument("unknown patch kind");
}

cdouble pf_pairing(const GraphPatch& g, const PFWeight& v, const GraphExplicit& psi) {
    cdouble s{0.0, 0.0};
    for (const auto& [x, a] : psi.amp) s += v.value(g, x) * a;
    return s;
}

double pf_relation_residual(const GraphPatch& g, const PFWeight& v) {
    double worst = 0.0;
    for (int x = 0; x < g.n; ++x) {
        if (!g.is_interior(x)) continue;
        double s = 0.0;
        for (int y : g.neighbors(x)) s += v.value(g, y);
        worst = std::max(worst, std::abs(s - v.spr * v.value(g, x)));
    }
    return worst;
}

GraphExplicit realize_on_patch(const GraphPatch& g, const FormFactor& f) {
    if (const auto* kd = std::get_if<KDeltaFormFactor>(&f)) {
        return k_apply(g, coordinate_sum_phi(g), delta_at(g, kd->site));
    }
    if (const auto* ex = std::get_if<ExplicitFormFactor>(&f)) {
        GraphExplicit out;
        for (const auto& [site, a] : ex->entries) {
            auto v = g.find(site);
            if (!v) throw std::invalid_argument("explicit entry outside the patch");
            out.amp[*v] += a;
        }
        return out;
    }
    throw std::invalid_argument("form factor kind has no graph realization");
}

}  // namespace bosejj
