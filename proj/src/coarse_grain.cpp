#include "symdyn/coarse_grain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "symdyn/errors.hpp"

namespace symdyn {

namespace {

LogReal gap(double x, const LogReal& ox, double y, const LogReal& oy) {
    return LogReal::from_double(x - y) + ox - oy;
}

struct OrbitInfo {
    std::vector<OrbitWindow> ws;
    std::vector<PesinParams> params;
    std::vector<GridIndex> sizes;
    std::vector<LogReal> offs;  // lo-1 .. hi+1
};

OrbitInfo orbit_info(const OrbitWindow& w, int lo, int hi, const PesinConfig& cfg, const LogReal& top) {
    OrbitInfo o;
    std::vector<GridIndex> Q;
    for (int n = lo; n <= hi; ++n) {
        o.ws.push_back(w.shift(n, cfg.depth + 1));
        o.params.push_back(pesin_params(o.ws.back(), cfg));
        Q.push_back(o.params.back().Q_index);
    }
    o.sizes = q_greedy_index(Q, cfg.epsilon);
    o.offs = orbit_offsets(w, lo, hi, top);
    return o;
}

int floor_int(double v) { return static_cast<int>(std::floor(v)); }

}  // namespace

std::string BinKey::str() const {
    char buf[200];
    std::snprintf(buf, sizeof buf, "k=%d,%d,%d l=%d,%d,%d a=%d,%d,%d m=%d j=%d", k[0], k[1], k[2], l[0], l[1], l[2],
                  a[0], a[1], a[2], m, j);
    return buf;
}

ChartView view_of(const Chart& c) { return {c.x0(), c.offset, c.params.u, c.p_index}; }

bool overlap_test(const ChartView& a, const ChartView& b, double eps) {
    if (std::llabs(a.p_index - b.p_index) > 3) return false;
    const LogReal lhs = gap(a.x0, a.offset, b.x0, b.offset).abs() + LogReal::from_double(1.0 / a.u - 1.0 / b.u).abs();
    if (lhs.is_zero()) return true;
    const double rhs = 4.0 * (grid_log(a.p_index, eps) + grid_log(b.p_index, eps));
    return lhs.lg < rhs;
}

bool overlap_test(const Chart& a, const Chart& b) { return overlap_test(view_of(a), view_of(b), a.params.epsilon); }

bool edge_test(const Chart& v, const Chart& w, bool strong) {
    const MapModel& m = w.center.map();
    const double eps = v.params.epsilon;
    const Branch g = m.branch(w.center.branch(-1));
    ChartView prev{w.center.x(-1), branch_delta(g, w.x0(), w.offset), w.params.u_prev, v.p_index};
    if (!overlap_test(prev, view_of(v), eps)) return false;
    if (!strong) return w.p_index >= v.p_index - 3;
    const LogReal off1 = LogReal::from_double(v.center.df(0)) * v.offset;
    const LogReal d = gap(v.center.x(1), off1, w.x0(), w.offset).abs();
    if (!d.is_zero() && !(d.lg < v.log_p())) return false;
    const double du = std::fabs(std::log(v.params.u_next) - std::log(w.params.u));
    if (du != 0.0 && !(std::log(du) <= v.log_p())) return false;
    const GridIndex want = std::max(v.p_index - 3, delta_eps(eps).index + w.params.Q_index);
    return w.p_index == want;
}

std::vector<LogReal> orbit_offsets(const OrbitWindow& w, int lo, int hi, const LogReal& top) {
    std::vector<LogReal> o(static_cast<std::size_t>(hi - lo + 3));
    auto at = [&](int n) -> LogReal& { return o[static_cast<std::size_t>(n - lo + 1)]; };
    at(hi) = top;
    const MapModel& m = w.map();
    for (int n = hi; n >= lo; --n) at(n - 1) = branch_delta(m.branch(w.branch(n - 1)), w.x(n), at(n));
    at(hi + 1) = LogReal::from_double(w.df(hi)) * top;
    return o;
}

GammaData gamma_data(const OrbitWindow& w, const PesinParams& p, const LogReal& off_m1, const LogReal& off0,
                     const LogReal& off1) {
    GammaData g;
    g.x = {w.x(-1), w.x(0), w.x(1)};
    g.off = {off_m1, off0, off1};
    g.u = {p.u_prev, p.u, p.u_next};
    g.Q_index = p.Q_index;
    return g;
}

bool net_close(const GammaData& a, const GammaData& b, int j, double) {
    if (std::llabs(a.Q_index - b.Q_index) > 1) return false;
    const double bound = -8.0 * (j + 2);
    for (int i = 0; i < 3; ++i) {
        const LogReal s = gap(a.x[i], a.off[i], b.x[i], b.off[i]).abs() +
                          LogReal::from_double(1.0 / a.u[i] - 1.0 / b.u[i]).abs();
        if (!s.is_zero() && !(s.lg < bound)) return false;
    }
    return true;
}

Chart Alphabet::chart(int c, GridIndex p_index) const {
    const Center& z = centers[static_cast<std::size_t>(c)];
    Chart ch;
    ch.center = z.w;
    ch.params = z.params;
    ch.p_index = p_index;
    ch.offset = z.offset;
    return ch;
}

int Alphabet::cover_cell(double x) const {
    if (cover_centers.empty()) return 0;
    auto it = std::lower_bound(cover_centers.begin(), cover_centers.end(), x);
    if (it == cover_centers.end()) return static_cast<int>(cover_centers.size()) - 1;
    const int i = static_cast<int>(it - cover_centers.begin());
    if (i > 0 && x - cover_centers[i - 1] <= *it - x) return i - 1;
    return i;
}

BinKey bin_key(const MapModel& m, const GammaData& g, const PesinParams& p, GridIndex p_index, const Alphabet& alpha) {
    BinKey k;
    for (int i = 0; i < 3; ++i) {
        const double d = m.singular_distance(g.x[i]);
        k.k[i] = d >= 1.0 ? 0 : std::max(0, static_cast<int>(std::ceil(-std::log(d))) - 1);
        k.l[i] = floor_int(std::log(g.u[i]));
        k.a[i] = alpha.cover_cell(g.x[i]);
    }
    k.m = static_cast<int>(std::ceil(-grid_log(p.Q_index, p.epsilon))) - 1;
    k.j = floor_int(-grid_log(p_index, p.epsilon));
    return k;
}

std::vector<GridIndex> orbit_sizes(const OrbitWindow& w, int lo, int hi, const PesinConfig& cfg) {
    std::vector<GridIndex> Q;
    for (int n = lo; n <= hi; ++n) Q.push_back(pesin_params(w.shift(n, cfg.depth + 1), cfg).Q_index);
    return q_greedy_index(Q, cfg.epsilon);
}

Alphabet build_alphabet(const std::vector<OrbitSample>& samples, const AlphabetOptions& opt) {
    if (opt.hi < opt.lo) throw ConfigError("alphabet index range is empty");
    Alphabet A;
    A.cfg = opt.cfg;
    A.cover_level = opt.cover_level;
    A.lo = opt.lo;
    A.hi = opt.hi;
    if (!samples.empty()) {
        const MapModel& m = samples.front().w.map();
        const int cells = 1 << opt.cover_level;
        const double floor_d = std::ldexp(1.0, -opt.cover_level);
        for (int i = 0; i < cells; ++i) {
            const double c = m.lo + (m.hi - m.lo) * (i + 0.5) / cells;
            if (m.singular_distance(c) >= floor_d) A.cover_centers.push_back(c);
        }
    }
    const DeltaEps de = delta_eps(opt.cfg.epsilon);
    for (const OrbitSample& s : samples) {
        const OrbitInfo info = orbit_info(s.w, opt.lo, opt.hi, opt.cfg, s.top_offset);
        for (int n = opt.lo; n <= opt.hi; ++n) {
            const std::size_t i = static_cast<std::size_t>(n - opt.lo);
            const PesinParams& p = info.params[i];
            const GammaData g = gamma_data(info.ws[i], p, info.offs[i], info.offs[i + 1], info.offs[i + 2]);
            const BinKey key = bin_key(info.ws[i].map(), g, p, info.sizes[i], A);
            ++A.samples_seen;
            auto& grp = A.groups[key];
            bool covered = false;
            for (int c : grp)
                if (net_close(g, A.centers[static_cast<std::size_t>(c)].gamma, key.j, opt.cfg.epsilon)) {
                    covered = true;
                    break;
                }
            if (covered) continue;
            Center z;
            z.w = info.ws[i];
            z.offset = info.offs[i + 1];
            z.gamma = g;
            z.params = p;
            z.key = key;
            z.p_min_index = std::max(grid_floor(-key.j + 2.0, opt.cfg.epsilon), de.index + p.Q_index);
            GridIndex hi_idx = static_cast<GridIndex>(std::floor(3.0 * (key.j + 2) / opt.cfg.epsilon));
            while (grid_log(hi_idx, opt.cfg.epsilon) < -key.j - 2.0) --hi_idx;
            z.p_max_index = hi_idx;
            grp.push_back(static_cast<int>(A.centers.size()));
            A.centers.push_back(std::move(z));
        }
    }
    return A;
}

std::size_t GpoGraph::strong_edge_count() const {
    std::size_t n = 0;
    for (const auto& e : strong_out) n += e.size();
    return n;
}

std::size_t GpoGraph::weak_edge_count() const {
    std::size_t n = 0;
    for (const auto& e : weak_out) n += e.size();
    return n;
}

int GpoGraph::find(const VertexRef& r) const {
    auto it = ids.find({r.center, r.p_index});
    return it == ids.end() ? -1 : it->second;
}

std::vector<int> GpoGraph::above(double t) const {
    std::vector<int> out;
    for (const auto& [key, vs] : bin_index) {
        if (!(-key.j + 2.0 > t)) continue;
        for (int v : vs)
            if (log_p(v) > t) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

void index_graph(GpoGraph& g) {
    g.bin_index.clear();
    g.ids.clear();
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
        const VertexRef& r = g.vertices[static_cast<std::size_t>(v)];
        g.bin_index[g.alpha->centers[static_cast<std::size_t>(r.center)].key].push_back(v);
        g.ids[{r.center, r.p_index}] = v;
    }
}

}  // namespace

GpoGraph build_graph(std::shared_ptr<const Alphabet> alpha, bool with_weak) {
    GpoGraph g;
    g.alpha = alpha;
    g.has_weak = with_weak;
    const Alphabet& A = *alpha;
    for (int c = 0; c < static_cast<int>(A.centers.size()); ++c) {
        const Center& z = A.centers[static_cast<std::size_t>(c)];
        for (GridIndex p = z.p_min_index; p <= z.p_max_index; ++p) g.vertices.push_back({c, p});
    }
    index_graph(g);
    // Successor centers must satisfy x_{-1}(succ) == x_0(pred) in floating point; nonzero gaps
    // are far above every overlap threshold the size grid can produce.
    std::unordered_multimap<double, int> succ_index;
    for (int c = 0; c < static_cast<int>(A.centers.size()); ++c)
        succ_index.emplace(A.centers[static_cast<std::size_t>(c)].w.x(-1), c);
    const GridIndex di = delta_eps(A.cfg.epsilon).index;
    g.strong_out.assign(g.vertices.size(), {});
    if (with_weak) g.weak_out.assign(g.vertices.size(), {});
    for (int v = 0; v < static_cast<int>(g.vertices.size()); ++v) {
        const VertexRef& r = g.vertices[static_cast<std::size_t>(v)];
        const Chart cv = A.chart(r.center, r.p_index);
        std::vector<int> succ;
        auto range = succ_index.equal_range(cv.x0());
        for (auto it = range.first; it != range.second; ++it) succ.push_back(it->second);
        std::sort(succ.begin(), succ.end());
        for (int c2 : succ) {
            const Center& z = A.centers[static_cast<std::size_t>(c2)];
            const GridIndex want = std::max(r.p_index - 3, di + z.params.Q_index);
            if (want >= z.p_min_index && want <= z.p_max_index) {
                if (edge_test(cv, A.chart(c2, want), true)) g.strong_out[v].push_back(g.find({c2, want}));
            }
            if (!with_weak) continue;
            for (GridIndex p = std::max(z.p_min_index, r.p_index - 3); p <= z.p_max_index; ++p)
                if (edge_test(cv, A.chart(c2, p), false)) g.weak_out[v].push_back(g.find({c2, p}));
        }
        std::sort(g.strong_out[v].begin(), g.strong_out[v].end());
        if (with_weak) std::sort(g.weak_out[v].begin(), g.weak_out[v].end());
    }
    return g;
}

GpoGraph prune_relevant(const GpoGraph& g) {
    const std::size_t n = g.vertices.size();
    std::vector<int> indeg(n, 0), outdeg(n, 0);
    std::vector<std::vector<int>> in(n);
    for (std::size_t v = 0; v < n; ++v)
        for (int w : g.strong_out[v]) {
            ++indeg[static_cast<std::size_t>(w)];
            ++outdeg[v];
            in[static_cast<std::size_t>(w)].push_back(static_cast<int>(v));
        }
    std::vector<bool> alive(n, true);
    std::deque<int> q;
    for (std::size_t v = 0; v < n; ++v)
        if (indeg[v] == 0 || outdeg[v] == 0) {
            alive[v] = false;
            q.push_back(static_cast<int>(v));
        }
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        for (int w : g.strong_out[static_cast<std::size_t>(v)])
            if (alive[static_cast<std::size_t>(w)] && --indeg[static_cast<std::size_t>(w)] == 0) {
                alive[static_cast<std::size_t>(w)] = false;
                q.push_back(w);
            }
        for (int u : in[static_cast<std::size_t>(v)])
            if (alive[static_cast<std::size_t>(u)] && --outdeg[static_cast<std::size_t>(u)] == 0) {
                alive[static_cast<std::size_t>(u)] = false;
                q.push_back(u);
            }
    }
    GpoGraph out;
    out.alpha = g.alpha;
    out.has_weak = g.has_weak;
    std::vector<int> remap(n, -1);
    for (std::size_t v = 0; v < n; ++v)
        if (alive[v]) {
            remap[v] = static_cast<int>(out.vertices.size());
            out.vertices.push_back(g.vertices[v]);
        }
    auto carry = [&](const std::vector<std::vector<int>>& src, std::vector<std::vector<int>>& dst) {
        dst.assign(out.vertices.size(), {});
        for (std::size_t v = 0; v < n; ++v) {
            if (!alive[v]) continue;
            for (int w : src[v])
                if (alive[static_cast<std::size_t>(w)]) dst[static_cast<std::size_t>(remap[v])].push_back(remap[w]);
        }
    };
    carry(g.strong_out, out.strong_out);
    if (g.has_weak) carry(g.weak_out, out.weak_out);
    index_graph(out);
    return out;
}

Gpo sufficiency_encode(const OrbitWindow& w, const Alphabet& alpha, const LogReal& top_offset) {
    const OrbitInfo info = orbit_info(w, alpha.lo, alpha.hi, alpha.cfg, top_offset);
    Gpo out;
    out.lo = alpha.lo;
    for (int n = alpha.lo; n <= alpha.hi; ++n) {
        const std::size_t i = static_cast<std::size_t>(n - alpha.lo);
        const PesinParams& p = info.params[i];
        const GammaData g = gamma_data(info.ws[i], p, info.offs[i], info.offs[i + 1], info.offs[i + 2]);
        const BinKey key = bin_key(info.ws[i].map(), g, p, info.sizes[i], alpha);
        auto it = alpha.groups.find(key);
        int found = -1;
        if (it != alpha.groups.end())
            for (int c : it->second)
                if (net_close(g, alpha.centers[static_cast<std::size_t>(c)].gamma, key.j, alpha.cfg.epsilon)) {
                    found = c;
                    break;
                }
        if (found < 0) throw NoNetVertex("no net vertex for index " + std::to_string(n) + " in bin " + key.str());
        const Center& z = alpha.centers[static_cast<std::size_t>(found)];
        if (info.sizes[i] < z.p_min_index || info.sizes[i] > z.p_max_index)
            throw NoNetVertex("size outside the chart range of the net vertex at index " + std::to_string(n));
        out.charts.push_back(alpha.chart(found, info.sizes[i]));
        out.refs.push_back({found, info.sizes[i]});
    }
    for (std::size_t i = 0; i + 1 < out.charts.size(); ++i) {
        const bool ok = edge_test(out.charts[i], out.charts[i + 1], true);
        out.strong.push_back(ok);
        if (!ok) out.broken.push_back(out.lo + static_cast<int>(i));
    }
    return out;
}

std::string export_graph(const GpoGraph& g) {
    std::ostringstream os;
    const Alphabet& A = *g.alpha;
    const std::string name = A.centers.empty() ? "" : A.centers.front().w.map().name;
    char buf[320];
    std::snprintf(buf, sizeof buf, "# symdyn-graph v1 map=%s eps=%.17g chi=%.17g vertices=%zu strong=%zu weak=%zu\n",
                  name.c_str(), A.cfg.epsilon, A.cfg.chi, g.size(), g.strong_edge_count(),
                  g.has_weak ? g.weak_edge_count() : std::size_t{0});
    os << buf;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const VertexRef& r = g.vertices[v];
        const Center& z = A.centers[static_cast<std::size_t>(r.center)];
        std::snprintf(buf, sizeof buf, "vertex %zu center=%d x0=%.17g u=%.17g logQ=%.17g p_index=%lld bin=", v,
                      r.center, z.gamma.x[1], z.params.u, z.params.logQ, static_cast<long long>(r.p_index));
        os << buf << z.key.str() << '\n';
    }
    for (std::size_t v = 0; v < g.size(); ++v)
        for (int w : g.strong_out[v]) os << "edge " << v << ' ' << w << " strong\n";
    if (g.has_weak)
        for (std::size_t v = 0; v < g.size(); ++v)
            for (int w : g.weak_out[v]) os << "edge " << v << ' ' << w << " weak\n";
    return os.str();
}

std::string export_dot(const GpoGraph& g) {
    std::ostringstream os;
    os << "digraph gpo {\n";
    for (std::size_t v = 0; v < g.size(); ++v)
        os << "  v" << v << " [label=\"c" << g.vertices[v].center << " k" << g.vertices[v].p_index << "\"];\n";
    for (std::size_t v = 0; v < g.size(); ++v)
        for (int w : g.strong_out[v]) os << "  v" << v << " -> v" << w << ";\n";
    if (g.has_weak)
        for (std::size_t v = 0; v < g.size(); ++v)
            for (int w : g.weak_out[v]) os << "  v" << v << " -> v" << w << " [style=dashed];\n";
    os << "}\n";
    return os.str();
}

}  // namespace symdyn
