#include "symdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace symdyn {

namespace {

double big_log(const BigInt& v) {
    if (v <= 0) return -std::numeric_limits<double>::infinity();
    const std::size_t bits = boost::multiprecision::msb(v);
    if (bits < 1000) return std::log(v.convert_to<double>());
    const std::size_t drop = bits - 60;
    const BigInt top = v >> drop;
    return std::log(top.convert_to<double>()) + static_cast<double>(drop) * std::log(2.0);
}

std::vector<int> component_of(const std::vector<std::vector<int>>& comps, int v) {
    for (const auto& c : comps)
        if (std::find(c.begin(), c.end(), v) != c.end()) return c;
    return {v};
}

// Closed-walk counts through each vertex of a component, restricted to the component.
std::vector<BigInt> loops_in(const Digraph& g, const std::vector<int>& comp, int v, int n_max) {
    std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
    for (std::size_t i = 0; i < comp.size(); ++i) local[static_cast<std::size_t>(comp[i])] = static_cast<int>(i);
    std::vector<BigInt> cur(comp.size()), nxt(comp.size());
    cur[static_cast<std::size_t>(local[static_cast<std::size_t>(v)])] = 1;
    std::vector<BigInt> out;
    for (int n = 1; n <= n_max; ++n) {
        std::fill(nxt.begin(), nxt.end(), BigInt(0));
        for (std::size_t i = 0; i < comp.size(); ++i) {
            if (cur[i] == 0) continue;
            for (int w : g.out[static_cast<std::size_t>(comp[i])]) {
                const int j = local[static_cast<std::size_t>(w)];
                if (j >= 0) nxt[static_cast<std::size_t>(j)] += cur[i];
            }
        }
        std::swap(cur, nxt);
        out.push_back(cur[static_cast<std::size_t>(local[static_cast<std::size_t>(v)])]);
    }
    return out;
}

}  // namespace

std::vector<std::vector<int>> strongly_connected_components(const Digraph& g) {
    const int n = g.size();
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<bool> on(static_cast<std::size_t>(n), false);
    std::vector<int> stack;
    std::vector<std::vector<int>> comps;
    int counter = 0;
    std::vector<std::pair<int, std::size_t>> call;
    for (int s = 0; s < n; ++s) {
        if (index[static_cast<std::size_t>(s)] >= 0) continue;
        call.push_back({s, 0});
        while (!call.empty()) {
            auto& [v, it] = call.back();
            const auto sv = static_cast<std::size_t>(v);
            if (it == 0 && index[sv] < 0) {
                index[sv] = low[sv] = counter++;
                stack.push_back(v);
                on[sv] = true;
            }
            if (it < g.out[sv].size()) {
                const int w = g.out[sv][it++];
                const auto sw = static_cast<std::size_t>(w);
                if (index[sw] < 0) {
                    call.push_back({w, 0});
                } else if (on[sw]) {
                    low[sv] = std::min(low[sv], index[sw]);
                }
                continue;
            }
            if (low[sv] == index[sv]) {
                std::vector<int> c;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on[static_cast<std::size_t>(w)] = false;
                    c.push_back(w);
                } while (w != v);
                std::sort(c.begin(), c.end());
                comps.push_back(std::move(c));
            }
            const int done = v;
            call.pop_back();
            if (!call.empty()) {
                const auto sp = static_cast<std::size_t>(call.back().first);
                low[sp] = std::min(low[sp], low[static_cast<std::size_t>(done)]);
            }
        }
    }
    std::sort(comps.begin(), comps.end());
    return comps;
}

int component_period(const Digraph& g, const std::vector<int>& comp) {
    if (comp.empty()) return 0;
    std::vector<int> level(static_cast<std::size_t>(g.size()), -1);
    std::vector<bool> in(static_cast<std::size_t>(g.size()), false);
    for (int v : comp) in[static_cast<std::size_t>(v)] = true;
    std::vector<int> queue{comp.front()};
    level[static_cast<std::size_t>(comp.front())] = 0;
    int d = 0;
    for (std::size_t h = 0; h < queue.size(); ++h) {
        const int v = queue[h];
        for (int w : g.out[static_cast<std::size_t>(v)]) {
            if (!in[static_cast<std::size_t>(w)]) continue;
            if (level[static_cast<std::size_t>(w)] < 0) {
                level[static_cast<std::size_t>(w)] = level[static_cast<std::size_t>(v)] + 1;
                queue.push_back(w);
            } else {
                d = std::gcd(d, std::abs(level[static_cast<std::size_t>(v)] + 1 - level[static_cast<std::size_t>(w)]));
            }
        }
    }
    return d;
}

BigInt loop_count(const Digraph& g, int v, int n) {
    if (n < 1) throw std::invalid_argument("loop length must be positive");
    const auto comps = strongly_connected_components(g);
    return loops_in(g, component_of(comps, v), v, n).back();
}

std::vector<BigInt> closed_path_counts(const Digraph& g, int n_max) {
    std::vector<BigInt> total(static_cast<std::size_t>(std::max(n_max, 0)));
    for (const auto& comp : strongly_connected_components(g)) {
        if (comp.size() == 1) {
            const auto& o = g.out[static_cast<std::size_t>(comp[0])];
            if (std::find(o.begin(), o.end(), comp[0]) == o.end()) continue;
        }
        for (int v : comp) {
            const auto c = loops_in(g, comp, v, n_max);
            for (std::size_t i = 0; i < c.size(); ++i) total[i] += c[i];
        }
    }
    return total;
}

BigInt loop_count_bruteforce(const Digraph& g, int v, int n) {
    BigInt count = 0;
    std::vector<std::pair<int, int>> st{{v, 0}};
    while (!st.empty()) {
        auto [x, len] = st.back();
        st.pop_back();
        if (len == n) {
            if (x == v) ++count;
            continue;
        }
        for (int w : g.out[static_cast<std::size_t>(x)]) st.push_back({w, len + 1});
    }
    return count;
}

double spectral_radius(const Digraph& g, const std::vector<int>& comp, int iterations) {
    if (comp.empty()) return 0;
    std::vector<int> local(static_cast<std::size_t>(g.size()), -1);
    for (std::size_t i = 0; i < comp.size(); ++i) local[static_cast<std::size_t>(comp[i])] = static_cast<int>(i);
    // Power iteration on A + I, which is primitive on an irreducible block.
    std::vector<double> x(comp.size(), 1.0), y(comp.size());
    double lambda = 0;
    for (int it = 0; it < iterations; ++it) {
        y = x;
        for (std::size_t i = 0; i < comp.size(); ++i)
            for (int w : g.out[static_cast<std::size_t>(comp[i])]) {
                const int j = local[static_cast<std::size_t>(w)];
                if (j >= 0) y[static_cast<std::size_t>(j)] += x[i];
            }
        const double nx = std::accumulate(x.begin(), x.end(), 0.0);
        const double ny = std::accumulate(y.begin(), y.end(), 0.0);
        lambda = ny / nx;
        for (auto& v : y) v /= ny;
        x.swap(y);
    }
    return lambda - 1.0;
}

EntropyEstimate gurevich_entropy(const Digraph& g, int v, int n_max) {
    EntropyEstimate e;
    const auto comp = component_of(strongly_connected_components(g), v);
    e.component_size = static_cast<int>(comp.size());
    e.period = component_period(g, comp);
    const auto loops = loops_in(g, comp, v, n_max);
    for (int n = n_max; n >= 1; --n)
        if (loops[static_cast<std::size_t>(n - 1)] > 0) {
            e.loop_n = n;
            e.loop_growth = big_log(loops[static_cast<std::size_t>(n - 1)]) / n;
            break;
        }
    const double rho = spectral_radius(g, comp);
    e.spectral = rho > 0 ? std::log(rho) : -std::numeric_limits<double>::infinity();
    return e;
}

std::vector<std::vector<BranchId>> branch_words(int branches, int n, bool lyndon_only) {
    std::vector<std::vector<BranchId>> out;
    if (n < 1 || branches < 1) return out;
    std::vector<BranchId> w(static_cast<std::size_t>(n), 0);
    while (true) {
        bool keep = true;
        for (int r = 1; lyndon_only && r < n && keep; ++r) {
            std::vector<BranchId> rot(w.begin() + r, w.end());
            rot.insert(rot.end(), w.begin(), w.begin() + r);
            keep = w < rot;
        }
        if (keep) out.push_back(w);
        int i = n - 1;
        while (i >= 0 && w[static_cast<std::size_t>(i)] == branches - 1) w[static_cast<std::size_t>(i--)] = 0;
        if (i < 0) break;
        ++w[static_cast<std::size_t>(i)];
    }
    return out;
}

std::vector<double> map_periodic_points(const MapModel& m, int n, int branch_cap) {
    int B = m.branch_count();
    if (branch_cap > 0) B = std::min(B, branch_cap);
    std::vector<Branch> brs;
    for (int b = 0; b < B; ++b) brs.push_back(m.branch(b));
    std::vector<double> pts;
    for (const auto& w : branch_words(B, n, false)) {
        auto G = [&](double x) {
            for (int k = n - 1; k >= 0; --k) x = brs[static_cast<std::size_t>(w[static_cast<std::size_t>(k)])].inv(x);
            return x;
        };
        double a = m.lo, b = m.hi;
        if (G(a) - a < 0 || G(b) - b > 0) continue;
        for (int it = 0; it < 200 && b - a > 0; ++it) {
            const double c = 0.5 * (a + b);
            if (c <= a || c >= b) break;
            (G(c) - c >= 0 ? a : b) = c;
        }
        double x = std::fabs(G(a) - a) <= std::fabs(G(b) - b) ? a : b;
        for (int it = 0; it < 4; ++it) x = G(x);
        // Orbit point at time k is the composition of the last n-k inverse branches applied to x.
        std::vector<double> orbit(static_cast<std::size_t>(n));
        double y = x;
        for (int k = n - 1; k >= 1; --k) {
            y = brs[static_cast<std::size_t>(w[static_cast<std::size_t>(k)])].inv(y);
            orbit[static_cast<std::size_t>(k)] = y;
        }
        orbit[0] = x;
        bool ok = true;
        for (int k = 0; k < n && ok; ++k) {
            const double z = orbit[static_cast<std::size_t>(k)];
            ok = m.in_domain(z) && brs[static_cast<std::size_t>(w[static_cast<std::size_t>(k)])].contains(z);
        }
        if (ok) pts.push_back(x);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double p : pts)
        if (out.empty() || p - out.back() > 1e-9) out.push_back(p);
    return out;
}

LeastSquares fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LeastSquares f;
    f.points = static_cast<int>(x.size());
    if (x.size() < 2) return f;
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

GrowthReport growth_report(const MapModel& m, const Digraph& g, int n_max, int branch_cap) {
    GrowthReport r;
    const auto sym = closed_path_counts(g, n_max);
    std::vector<double> xs, ys, xt, yt, mxs, mys, mxt, myt;
    const int tail_from = std::max(1, n_max / 2);
    for (int n = 1; n <= n_max; ++n) {
        GrowthRow row;
        row.n = n;
        row.map_count = map_periodic_points(m, n, branch_cap).size();
        row.symbolic = sym[static_cast<std::size_t>(n - 1)];
        row.ratio = row.map_count ? std::exp(big_log(row.symbolic) - std::log(static_cast<double>(row.map_count))) : 0;
        if (row.symbolic > 0) {
            xs.push_back(n);
            ys.push_back(big_log(row.symbolic));
            if (n >= tail_from) {
                xt.push_back(n);
                yt.push_back(ys.back());
            }
        }
        if (row.map_count > 0) {
            mxs.push_back(n);
            mys.push_back(std::log(static_cast<double>(row.map_count)));
            if (n >= tail_from) {
                mxt.push_back(n);
                myt.push_back(mys.back());
            }
        }
        r.rows.push_back(row);
    }
    r.empty_graph = xs.empty();
    r.slope_full = fit_line(xs, ys).slope;
    r.slope_tail = fit_line(xt, yt).slope;
    r.map_slope_full = fit_line(mxs, mys).slope;
    r.map_slope_tail = fit_line(mxt, myt).slope;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : strongly_connected_components(g)) {
        if (c.size() == 1) {
            const auto& o = g.out[static_cast<std::size_t>(c[0])];
            if (std::find(o.begin(), o.end(), c[0]) == o.end()) continue;
        }
        const double rho = spectral_radius(g, c);
        if (rho > 0) best = std::max(best, std::log(rho));
    }
    r.entropy_spectral = best;
    return r;
}

std::string GrowthReport::text() const {
    std::ostringstream os;
    char buf[200];
    os << "n\tmap\tsymbolic\tratio\n";
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%d\t%zu\t%s\t%.6f\n", row.n, row.map_count, row.symbolic.str().c_str(),
                      row.ratio);
        os << buf;
    }
    std::snprintf(buf, sizeof buf, "slope symbolic full=%.6f tail=%.6f map full=%.6f tail=%.6f spectral=%.6f%s\n",
                  slope_full, slope_tail, map_slope_full, map_slope_tail, entropy_spectral,
                  empty_graph ? " (empty graph)" : "");
    os << buf;
    return os.str();
}

std::string GrowthReport::json() const {
    nlohmann::ordered_json j;
    j["format"] = "symdyn-growth v1";
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows)
        j["rows"].push_back({{"n", row.n}, {"map", row.map_count}, {"symbolic", row.symbolic.str()}, {"ratio", row.ratio}});
    j["slope_full"] = slope_full;
    j["slope_tail"] = slope_tail;
    j["map_slope_full"] = map_slope_full;
    j["map_slope_tail"] = map_slope_tail;
    if (std::isfinite(entropy_spectral))
        j["entropy_spectral"] = entropy_spectral;
    else
        j["entropy_spectral"] = nullptr;
    j["empty_graph"] = empty_graph;
    return j.dump();
}

HolderFit holder_modulus(const std::vector<std::pair<int, double>>& pairs) {
    HolderFit h;
    std::vector<double> x, y;
    for (const auto& [k, d] : pairs) {
        if (!(d > 0)) continue;
        x.push_back(-static_cast<double>(k));
        y.push_back(std::log(d));
    }
    h.pairs = static_cast<int>(x.size());
    if (h.pairs < 10) {
        h.flagged = true;
        h.note = "fewer than 10 usable pairs";
        return h;
    }
    const LeastSquares f = fit_line(x, y);
    h.exponent = f.slope;
    h.residual = f.residual;
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double tot = 0;
    for (double v : y) tot += (v - mean) * (v - mean);
    const double r2 = tot > 0 ? 1.0 - f.residual * f.residual * static_cast<double>(y.size()) / tot : 0.0;
    if (!(h.exponent > 0) || r2 < 0.5) {
        h.flagged = true;
        h.note = "no exponential decay in coding distance";
    }
    return h;
}

}  // namespace symdyn
