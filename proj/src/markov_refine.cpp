#include "symdyn/markov_refine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "symdyn/errors.hpp"

namespace symdyn {

namespace {

bool contains(const std::vector<int>& sorted, int v) { return std::binary_search(sorted.begin(), sorted.end(), v); }

LogReal zeroth_gap(const SamplePoint& a, int ka, const SamplePoint& b, int kb) {
    return LogReal::from_double(a.xs(ka) - b.xs(kb)) + a.ds(ka) - b.ds(kb);
}

bool repeats(const std::vector<int>& v, std::size_t from, std::size_t to) {
    std::set<int> seen;
    for (std::size_t i = from; i < to; ++i)
        if (!seen.insert(v[i]).second) return true;
    return false;
}

std::vector<std::vector<int>> rects_of_points(const Cover& c) {
    std::vector<std::vector<int>> out(c.table.pts.size());
    for (int i = 0; i < static_cast<int>(c.rects.size()); ++i)
        for (int p : c.rects[static_cast<std::size_t>(i)].points) out[static_cast<std::size_t>(p)].push_back(i);
    return out;
}

}  // namespace

bool PointTable::shifted_key(int i, int k, PointKey& out) const {
    const SamplePoint& p = pts[static_cast<std::size_t>(i)];
    if (k > p.window || k - key_depth < -p.window) return false;
    out.x = p.xs(k);
    out.dsign = p.ds(k).sign;
    out.dlg = p.ds(k).is_zero() ? 0.0 : p.ds(k).lg;
    out.back.clear();
    for (int j = 1; j <= key_depth; ++j) out.back.push_back(p.bs(k - j));
    return true;
}

int PointTable::find_shift(int i, int k) const {
    PointKey key;
    if (!shifted_key(i, k, key)) return -1;
    auto it = index.find(key);
    return it == index.end() ? -1 : it->second;
}

int PointTable::insert(SamplePoint p, const std::vector<int>& coding) {
    pts.push_back(std::move(p));
    const int id = static_cast<int>(pts.size()) - 1;
    PointKey key;
    if (!shifted_key(id, 0, key)) throw ConfigError("point window shorter than the identity depth");
    auto it = index.find(key);
    if (it != index.end()) {
        pts.pop_back();
        auto& cs = pts[static_cast<std::size_t>(it->second)].codings;
        if (std::find(cs.begin(), cs.end(), coding) == cs.end()) cs.push_back(coding);
        return it->second;
    }
    pts.back().codings.push_back(coding);
    index.emplace(std::move(key), id);
    return id;
}

bool PointTable::same_zeroth(int a, int b) const {
    return zeroth_gap(pts[static_cast<std::size_t>(a)], 0, pts[static_cast<std::size_t>(b)], 0).is_zero();
}

bool PointTable::same_past(int a, int b) const {
    const SamplePoint& p = pts[static_cast<std::size_t>(a)];
    const SamplePoint& q = pts[static_cast<std::size_t>(b)];
    for (int j = 1; j <= key_depth; ++j)
        if (p.bs(-j) != q.bs(-j)) return false;
    return true;
}

Cover build_cover(const GpoGraph& g, const CoverOptions& opt) {
    if (opt.window < 2) throw ConfigError("cover window must be at least 2");
    Cover c;
    c.table.key_depth = opt.window / 2;
    std::mt19937_64 rng(opt.seed);
    const int V = static_cast<int>(g.size());
    std::vector<std::vector<int>> in(static_cast<std::size_t>(V));
    for (int v = 0; v < V; ++v)
        for (int w : g.strong_out[static_cast<std::size_t>(v)]) in[static_cast<std::size_t>(w)].push_back(v);
    const int W = opt.window;
    auto pick = [&](const std::vector<int>& opts) {
        if (opts.size() == 1) return opts[0];
        std::uniform_int_distribution<std::size_t> d(0, opts.size() - 1);
        return opts[d(rng)];
    };
    for (int v = 0; v < V && opt.paths_per_vertex > 0; ++v) {
        Rectangle r;
        r.vertex = v;
        const Chart ch = g.chart(v);
        r.center = ch.x0();
        r.reach = LogReal::from_log(std::log(100.0) + ch.log_p() - std::log(ch.params.u));
        std::set<std::vector<int>> seen;
        for (int attempt = 0; attempt < 4 * opt.paths_per_vertex &&
                              static_cast<int>(seen.size()) < opt.paths_per_vertex;
             ++attempt) {
            std::vector<int> path(static_cast<std::size_t>(2 * W + 1));
            path[static_cast<std::size_t>(W)] = v;
            bool ok = true;
            for (int i = W + 1; i <= 2 * W && ok; ++i) {
                const auto& o = g.strong_out[static_cast<std::size_t>(path[static_cast<std::size_t>(i - 1)])];
                if (o.empty()) ok = false;
                else path[static_cast<std::size_t>(i)] = pick(o);
            }
            for (int i = W - 1; i >= 0 && ok; --i) {
                const auto& o = in[static_cast<std::size_t>(path[static_cast<std::size_t>(i + 1)])];
                if (o.empty()) ok = false;
                else path[static_cast<std::size_t>(i)] = pick(o);
            }
            if (!ok || !repeats(path, 0, static_cast<std::size_t>(W)) ||
                !repeats(path, static_cast<std::size_t>(W + 1), path.size()))
                continue;
            if (!seen.insert(path).second) continue;
            Gpo gpo;
            gpo.lo = -W;
            for (int u : path) {
                gpo.charts.push_back(g.chart(u));
                gpo.refs.push_back(g.vertices[static_cast<std::size_t>(u)]);
            }
            ShadowResult s;
            try {
                s = shadow(gpo);
            } catch (const Error& e) {
                c.diagnostics.push_back("vertex " + std::to_string(v) + ": " + e.what());
                continue;
            }
            SamplePoint p;
            p.window = W;
            for (int n = -W; n <= W; ++n) {
                p.x.push_back(gpo.at(n).x0());
                p.disp.push_back(s.disp_at(n));
                p.br.push_back(gpo.at(n).center.branch(0));
            }
            const int id = c.table.insert(std::move(p), path);
            if (!contains(r.points, id)) {
                r.points.push_back(id);
                std::sort(r.points.begin(), r.points.end());
            }
        }
        if (r.points.empty()) {
            c.diagnostics.push_back("vertex " + std::to_string(v) + ": no admissible recurrent path");
            continue;
        }
        c.rects.push_back(std::move(r));
    }
    return c;
}

Fibres fibres(const Cover& c, int rect, int point) {
    Fibres f;
    const Rectangle& r = c.rects[static_cast<std::size_t>(rect)];
    for (int q : r.points) {
        if (c.table.same_zeroth(point, q)) f.ws.push_back(q);
        if (!c.table.same_past(point, q)) continue;
        const SamplePoint& Q = c.table.pts[static_cast<std::size_t>(q)];
        const LogReal off = LogReal::from_double(Q.xs(0) - r.center) + Q.ds(0);
        if (!abs_less(r.reach, off)) f.wu.push_back(q);
    }
    return f;
}

const char* sig_name(Sig s) {
    switch (s) {
        case Sig::su: return "su";
        case Sig::s0: return "s0";
        case Sig::u0: return "0u";
        default: return "00";
    }
}

std::vector<std::vector<int>> intersecting(const Cover& c) {
    std::vector<std::set<int>> nb(c.rects.size());
    for (const auto& rs : rects_of_points(c))
        for (int i : rs)
            for (int j : rs) nb[static_cast<std::size_t>(i)].insert(j);
    std::vector<std::vector<int>> out;
    for (auto& s : nb) out.emplace_back(s.begin(), s.end());
    return out;
}

namespace {

Sig classify(bool s, bool u) {
    if (s && u) return Sig::su;
    if (s) return Sig::s0;
    if (u) return Sig::u0;
    return Sig::none;
}

}  // namespace

std::vector<RefinedCell> refine(const Cover& c) {
    const auto nb = intersecting(c);
    const auto owners = rects_of_points(c);
    std::map<std::vector<std::tuple<int, int, Sig>>, std::vector<int>> classes;
    for (int p = 0; p < static_cast<int>(c.table.pts.size()); ++p) {
        const auto& mine = owners[static_cast<std::size_t>(p)];
        if (mine.empty()) continue;
        std::vector<std::tuple<int, int, Sig>> sig;
        for (int i : mine) {
            const Fibres f = fibres(c, i, p);
            for (int j : nb[static_cast<std::size_t>(i)]) {
                const auto& Zj = c.rects[static_cast<std::size_t>(j)].points;
                const bool s = std::any_of(f.ws.begin(), f.ws.end(), [&](int q) { return contains(Zj, q); });
                const bool u = std::any_of(f.wu.begin(), f.wu.end(), [&](int q) { return contains(Zj, q); });
                if (i == j && !(s && u)) throw std::logic_error("T_ii^su differs from Z_i");
                sig.emplace_back(i, j, classify(s, u));
            }
        }
        classes[sig].push_back(p);
    }
    std::vector<RefinedCell> cells;
    for (auto& [sig, members] : classes) {
        RefinedCell cell;
        cell.members = members;
        cell.signature = sig;
        cell.rect = std::get<0>(sig.front());
        cells.push_back(std::move(cell));
    }
    std::sort(cells.begin(), cells.end(),
              [](const RefinedCell& a, const RefinedCell& b) { return a.members.front() < b.members.front(); });
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i].id = static_cast<int>(i);
    return cells;
}

std::vector<std::vector<int>> refine_bruteforce(const Cover& c) {
    const int P = static_cast<int>(c.table.pts.size());
    const int R = static_cast<int>(c.rects.size());
    auto in = [&](int p, int i) {
        for (int q : c.rects[static_cast<std::size_t>(i)].points)
            if (q == p) return true;
        return false;
    };
    auto meet = [&](int i, int j) {
        for (int q = 0; q < P; ++q)
            if (in(q, i) && in(q, j)) return true;
        return false;
    };
    std::vector<std::pair<std::vector<int>, int>> sigs;
    for (int p = 0; p < P; ++p) {
        std::vector<int> sig;
        for (int i = 0; i < R; ++i) {
            if (!in(p, i)) continue;
            const Rectangle& Zi = c.rects[static_cast<std::size_t>(i)];
            for (int j = 0; j < R; ++j) {
                if (!meet(i, j)) continue;
                bool s = false, u = false;
                for (int q = 0; q < P; ++q) {
                    if (!in(q, i) || !in(q, j)) continue;
                    const SamplePoint& Q = c.table.pts[static_cast<std::size_t>(q)];
                    if (c.table.same_zeroth(p, q)) s = true;
                    const LogReal off = LogReal::from_double(Q.xs(0) - Zi.center) + Q.ds(0);
                    if (c.table.same_past(p, q) && !abs_less(Zi.reach, off)) u = true;
                }
                sig.insert(sig.end(), {i, j, static_cast<int>(classify(s, u))});
            }
        }
        if (!sig.empty()) sigs.push_back({sig, p});
    }
    std::vector<std::vector<int>> out;
    std::vector<bool> used(sigs.size(), false);
    for (std::size_t a = 0; a < sigs.size(); ++a) {
        if (used[a]) continue;
        std::vector<int> cls;
        for (std::size_t b = a; b < sigs.size(); ++b)
            if (!used[b] && sigs[b].first == sigs[a].first) {
                used[b] = true;
                cls.push_back(sigs[b].second);
            }
        out.push_back(cls);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::vector<int>> partition_of(const std::vector<RefinedCell>& cells) {
    std::vector<std::vector<int>> out;
    for (const auto& c : cells) out.push_back(c.members);
    std::sort(out.begin(), out.end());
    return out;
}

TmsGraph hat_graph(const Cover& c, const std::vector<RefinedCell>& cells) {
    TmsGraph t;
    t.cell_of.assign(c.table.pts.size(), -1);
    for (const auto& cell : cells)
        for (int p : cell.members) t.cell_of[static_cast<std::size_t>(p)] = cell.id;
    std::vector<std::set<int>> adj(cells.size());
    for (int p = 0; p < static_cast<int>(c.table.pts.size()); ++p) {
        const int a = t.cell_of[static_cast<std::size_t>(p)];
        if (a < 0) continue;
        const int q = c.table.find_shift(p, 1);
        if (q < 0) continue;
        const int b = t.cell_of[static_cast<std::size_t>(q)];
        if (b >= 0) adj[static_cast<std::size_t>(a)].insert(b);
    }
    for (auto& s : adj) t.graph.out.emplace_back(s.begin(), s.end());
    return t;
}

HatPi hat_pi(const Cover& c, const std::vector<RefinedCell>& cells, const TmsGraph& t, const GpoGraph& g,
             const std::vector<int>& path, int depth) {
    if (depth < 0 || path.size() != static_cast<std::size_t>(2 * depth + 1))
        throw std::invalid_argument("path length must be 2*depth+1");
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const auto& o = t.graph.out[static_cast<std::size_t>(path[i])];
        if (!std::binary_search(o.begin(), o.end(), path[i + 1]))
            throw std::invalid_argument("path is not admissible at position " + std::to_string(i));
    }
    auto cell_at = [&](int l) { return path[static_cast<std::size_t>(depth + l)]; };
    HatPi h;
    std::vector<int> members = cells[static_cast<std::size_t>(cell_at(0))].members;
    std::vector<Chart> charts;
    LogReal width;
    bool chained = true;
    for (int d = 0; d <= depth; ++d) {
        std::vector<int> keep;
        for (int p : members) {
            bool ok = true;
            for (int l : {-d, d}) {
                const int q = l == 0 ? p : c.table.find_shift(p, l);
                if (q < 0 || t.cell_of[static_cast<std::size_t>(q)] != cell_at(l)) ok = false;
            }
            if (ok) keep.push_back(p);
        }
        members.swap(keep);
        if (members.empty())
            throw EmptyCylinder("sampled cylinder is empty at depth " + std::to_string(d) +
                                "; Markov property or sampling density insufficient");
        h.members.push_back(members.size());
        const SamplePoint& P0 = c.table.pts[static_cast<std::size_t>(members.front())];
        LogReal spread;
        for (int p : members) {
            const LogReal gap = zeroth_gap(c.table.pts[static_cast<std::size_t>(p)], 0, P0, 0).abs();
            if (abs_less(spread, gap)) spread = gap;
        }
        h.sample_diameter.push_back(spread);
        // Envelope: nested chart intervals along the rectangles' vertices at times 0..d.
        if (chained) {
            const int v = c.rects[static_cast<std::size_t>(cells[static_cast<std::size_t>(cell_at(d))].rect)].vertex;
            if (d > 0) {
                const int u = c.rects[static_cast<std::size_t>(cells[static_cast<std::size_t>(cell_at(d - 1))].rect)].vertex;
                const auto& o = g.strong_out[static_cast<std::size_t>(u)];
                chained = std::find(o.begin(), o.end(), v) != o.end();
            }
            if (chained) {
                charts.push_back(g.chart(v));
                Gpo gpo;
                gpo.lo = 0;
                gpo.charts = charts;
                const LogReal p = charts.back().p();
                LogReal a = -p, b = p;
                for (int n = d; n > 0; --n) {
                    const ChartLink L = gpo_link(gpo, n);
                    a = L.eval(a);
                    b = L.eval(b);
                }
                width = (b - a).abs() / LogReal::from_double(charts.front().params.u);
                h.envelope.push_back(width);
            }
        }
    }
    h.point = members.front();
    return h;
}

AuditReport audits(const Cover& c, const std::vector<RefinedCell>& cells, const TmsGraph& t) {
    AuditReport a;
    for (const auto& nb : intersecting(c)) ++a.intersection_histogram[static_cast<int>(nb.size())];
    std::vector<int> per_rect(c.rects.size(), 0);
    for (const auto& cell : cells) {
        std::set<int> rs;
        for (const auto& s : cell.signature) rs.insert(std::get<0>(s));
        for (int i : rs) ++per_rect[static_cast<std::size_t>(i)];
        a.max_rects_over_cell = std::max(a.max_rects_over_cell, static_cast<int>(rs.size()));
    }
    for (int n : per_rect) a.max_cells_in_rect = std::max(a.max_cells_in_rect, n);
    const PointTable& T = c.table;
    for (int p = 0; p < static_cast<int>(T.pts.size()); ++p) {
        const auto& P = T.pts[static_cast<std::size_t>(p)];
        a.max_sigma_preimages = std::max(a.max_sigma_preimages, static_cast<int>(P.codings.size()));
        // Cells partition the sample, so every coding of a point induces the same cell path.
        std::set<std::vector<int>> paths;
        if (!P.codings.empty()) {
            std::vector<int> cp;
            for (int l = -T.key_depth; l <= P.window; ++l) {
                const int q = T.find_shift(p, l);
                cp.push_back(q < 0 ? -1 : t.cell_of[static_cast<std::size_t>(q)]);
            }
            paths.insert(cp);
        }
        a.max_hat_preimages = std::max(a.max_hat_preimages, static_cast<int>(paths.size()));
    }
    // f(W^s(x, R0)) inside W^s(f x, R1) and f^{-1}(W^u(f x, R1)) inside W^u(x, R0).
    for (int p = 0; p < static_cast<int>(T.pts.size()); ++p) {
        const int r0 = t.cell_of[static_cast<std::size_t>(p)];
        const int fp = T.find_shift(p, 1);
        if (r0 < 0 || fp < 0) continue;
        const int r1 = t.cell_of[static_cast<std::size_t>(fp)];
        if (r1 < 0) continue;
        for (int q : cells[static_cast<std::size_t>(r0)].members) {
            if (!T.same_zeroth(p, q)) continue;
            ++a.markov_checks;
            const int fq = T.find_shift(q, 1);
            if (fq < 0 || t.cell_of[static_cast<std::size_t>(fq)] != r1 || !T.same_zeroth(fq, fp)) ++a.markov_failures;
        }
        for (int q : cells[static_cast<std::size_t>(r1)].members) {
            if (!T.same_past(fp, q)) continue;
            ++a.markov_checks;
            const int bq = T.find_shift(q, -1);
            if (bq < 0 || t.cell_of[static_cast<std::size_t>(bq)] != r0 || !T.same_past(bq, p)) ++a.markov_failures;
        }
    }
    return a;
}

std::string AuditReport::text() const {
    std::ostringstream os;
    os << "intersections:";
    for (const auto& [k, n] : intersection_histogram) os << ' ' << k << 'x' << n;
    os << "\nmax cells per rectangle: " << max_cells_in_rect << "\nmax rectangles per cell: " << max_rects_over_cell
       << "\nmax coding preimages: " << max_sigma_preimages << "\nmax refined preimages: " << max_hat_preimages
       << "\nmarkov checks: " << markov_checks << " failures: " << markov_failures << '\n';
    return os.str();
}

std::string export_partition(const Cover& c, const std::vector<RefinedCell>& cells, const TmsGraph& t) {
    std::ostringstream os;
    os << "# symdyn-partition v1 cells=" << cells.size() << " points=" << c.table.pts.size()
       << " rectangles=" << c.rects.size() << '\n';
    char buf[64];
    for (const auto& cell : cells) {
        os << "cell " << cell.id << " rect=" << cell.rect << " members=";
        for (std::size_t i = 0; i < cell.members.size(); ++i) {
            const int p = cell.members[i];
            std::snprintf(buf, sizeof buf, "%s%d@%.17g", i ? "," : "", p, c.table.pts[static_cast<std::size_t>(p)].xs(0));
            os << buf;
        }
        os << " sig=";
        for (std::size_t i = 0; i < cell.signature.size(); ++i) {
            const auto& [a, b, s] = cell.signature[i];
            os << (i ? ";" : "") << a << ':' << b << ':' << sig_name(s);
        }
        os << '\n';
    }
    for (std::size_t a = 0; a < t.graph.out.size(); ++a)
        for (int b : t.graph.out[a]) os << "edge " << a << ' ' << b << '\n';
    return os.str();
}

}  // namespace symdyn
