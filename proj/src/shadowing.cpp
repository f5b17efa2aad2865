#include "symdyn/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "symdyn/errors.hpp"

namespace symdyn {

namespace {

struct Interval {
    LogReal a, b;
    LogReal width() const { return (b - a).abs(); }
};

Interval map_interval(const ChartLink& L, const Interval& I) {
    LogReal a = L.eval(I.a), b = L.eval(I.b);
    if (less(b, a)) std::swap(a, b);
    return {a, b};
}

bool inside(const Interval& I, const LogReal& p) { return !abs_less(p, I.a) && !abs_less(p, I.b); }

}  // namespace

ChartLink gpo_link(const Gpo& g, int n) {
    const Chart& from = g.at(n);
    try {
        check_chart_domain(from);
    } catch (const DomainViolation& e) {
        throw EdgeBroken(std::string("chart domain at index ") + std::to_string(n) + ": " + e.what());
    }
    return make_link(from, g.at(n - 1));
}

std::string ShadowResult::serialize() const {
    std::ostringstream os;
    os << point.serialize() << '\n';
    os << "shadow v1 lo=" << lo << " hi=" << hi << " base=" << base << " t0=" << to_string(t0)
       << " error=" << to_string(error_bound) << " bound=" << to_string(formula_bound) << '\n';
    for (int n = lo; n <= hi; ++n)
        os << "coord " << n << " disp=" << to_string(disp_at(n)) << " err=" << to_string(err_at(n)) << '\n';
    return os.str();
}

ShadowResult shadow(const Gpo& g, const LogReal& start) {
    if (g.charts.empty()) throw ConfigError("empty gpo");
    ShadowResult r;
    r.lo = g.lo;
    r.hi = g.hi();
    r.base = std::clamp(0, r.lo, r.hi);
    std::vector<ChartLink> links;  // links[n - lo - 1] : chart n -> chart n-1
    for (int n = r.lo + 1; n <= r.hi; ++n) links.push_back(gpo_link(g, n));
    auto link = [&](int n) -> const ChartLink& { return links[static_cast<std::size_t>(n - r.lo - 1)]; };

    const std::size_t K = g.charts.size();
    r.t.assign(K, {});
    r.err.assign(K, {});
    r.disp.assign(K, {});
    const LogReal ptop = g.at(r.hi).p();
    if (abs_less(ptop, start)) throw ConfigError("start coordinate outside the top chart");
    LogReal t = start;
    Interval J{-ptop, ptop};
    for (int n = r.hi;; --n) {
        r.t[static_cast<std::size_t>(n - r.lo)] = t;
        r.err[static_cast<std::size_t>(n - r.lo)] = J.width();
        if (n == r.lo) break;
        t = link(n).eval(t);
        J = map_interval(link(n), J);
        if (!inside(J, g.at(n - 1).p()))
            throw EdgeBroken("image of the chart box escapes the box at index " + std::to_string(n - 1));
    }
    for (int n = r.lo; n <= r.hi; ++n) r.disp[static_cast<std::size_t>(n - r.lo)] = g.at(n).psi_offset(r.t_at(n));

    for (int top = r.base; top <= r.hi; ++top) {
        const LogReal p = g.at(top).p();
        Interval I{-p, p};
        for (int n = top; n > r.base; --n) I = map_interval(link(n), I);
        r.nested.push_back(I.width());
    }
    r.t0 = r.t_at(r.base);
    r.error_bound = r.err_at(r.base);
    const double chi = g.at(r.base).params.chi;
    r.formula_bound = LogReal::from_log(std::log(2.0) + g.at(r.base).log_p() - chi * (r.hi - r.base) / 2.0);
    r.point = g.at(r.base).center;
    return r;
}

UnstableInterval::UnstableInterval(const Gpo& g, int index) : index_(index) {
    if (index < g.lo || index > g.hi()) throw ConfigError("index outside the gpo");
    for (int n = index; n > g.lo; --n) links_.push_back(gpo_link(g, n));
    p_ = g.at(index).p();
}

std::vector<LogReal> UnstableInterval::backward(const LogReal& t) const {
    std::vector<LogReal> out{t};
    for (const ChartLink& L : links_) out.push_back(L.eval(out.back()));
    return out;
}

OrbitWindow bracket(const ShadowResult& x, const ShadowResult& y, int depth) {
    const OrbitWindow& yw = y.point;
    const int D = std::min(depth, yw.depth());
    std::vector<BranchId> back;
    back.reserve(static_cast<std::size_t>(D));
    for (int k = 1; k <= D; ++k) back.push_back(yw.branch(-k));
    return OrbitWindow::make(x.point.map_ptr(), x.point.x0(), back, x.point.fwd_len());
}

bool InverseReport::all_pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const InverseClause& c) { return c.pass; });
}

bool recurrence_proxy(const Gpo& g) {
    const std::size_t K = g.refs.size();
    auto repeats = [&](std::size_t from, std::size_t to) {
        for (std::size_t i = from; i < to; ++i)
            for (std::size_t j = i + 1; j < to; ++j)
                if (g.refs[i] == g.refs[j]) return true;
        return false;
    };
    return repeats(0, K / 2) && repeats(K / 2, K);
}

InverseReport inverse_check(const Gpo& g1, const Gpo& g2) {
    if (g1.lo != g2.lo || g1.hi() != g2.hi()) throw ConfigError("gpos must share their index range");
    const ShadowResult s1 = shadow(g1), s2 = shadow(g2);
    InverseReport rep;
    for (int n = g1.lo; n <= g1.hi(); ++n) {
        const Chart& x = g1.at(n);
        const Chart& y = g2.at(n);
        const LogReal pt1 = LogReal::from_double(x.x0() - y.x0()) + s1.disp_at(n) - s2.disp_at(n);
        const LogReal thr = s1.err_at(n) + s2.err_at(n);
        if (abs_less(rep.proxy_threshold, thr)) rep.proxy_threshold = thr;
        if (abs_less(rep.worst_gap, pt1)) rep.worst_gap = pt1.abs();
        if (abs_less(thr, pt1))
            throw NotDoubleCoding("shadows differ beyond the combined error bound at index " + std::to_string(n));
    }
    const double eps = g1.at(g1.lo).params.epsilon;
    std::vector<InverseClause> cl(6);
    cl[0].clause = "centers";
    cl[1].clause = "u-ratio";
    cl[2].clause = "Q-ratio";
    cl[3].clause = "p-ratio";
    cl[4].clause = "delta";
    cl[5].clause = "dDelta";
    for (auto& c : cl) c.worst = -std::numeric_limits<double>::infinity();
    auto note = [&](InverseClause& c, double v, int n) {
        if (v > c.worst) {
            c.worst = v;
            c.witness = n;
        }
    };
    const double cbrt_eps = std::cbrt(eps), sqrt_eps = std::sqrt(eps);
    for (int n = g1.lo; n <= g1.hi(); ++n) {
        const Chart& x = g1.at(n);
        const Chart& y = g2.at(n);
        const LogReal d = (LogReal::from_double(x.x0() - y.x0()) + x.offset - y.offset).abs();
        const double lp = x.log_p(), lq = y.log_p();
        if (!d.is_zero()) note(cl[0], d.lg - (std::log(2.0) + std::max(lp, lq)), n);
        else note(cl[0], -std::numeric_limits<double>::max(), n);
        note(cl[1], std::fabs(std::log(x.params.u) - std::log(y.params.u)) - 2.0 * sqrt_eps, n);
        note(cl[2], std::fabs(x.params.logQ - y.params.logQ) - cbrt_eps, n);
        note(cl[3], std::fabs(lp - lq) - cbrt_eps, n);
        const LogReal delta = LogReal::from_double(y.params.u) * d;
        if (!delta.is_zero()) note(cl[4], delta.lg - (std::log(3.0) + lq), n);
        else note(cl[4], -std::numeric_limits<double>::max(), n);
        const double dD = std::fabs(y.params.u / x.params.u - 1.0);
        note(cl[5], dD == 0.0 ? -std::numeric_limits<double>::max() : std::log(dD) - std::log(4.0 * sqrt_eps), n);
    }
    cl[0].pass = cl[0].worst <= 0;
    cl[1].pass = cl[1].worst <= 0;
    cl[2].pass = cl[2].worst <= 0;
    cl[3].pass = cl[3].worst <= 0;
    cl[4].pass = cl[4].worst < 0;
    cl[5].pass = cl[5].worst < 0;
    rep.clauses = cl;
    rep.recurrent1 = recurrence_proxy(g1);
    rep.recurrent2 = recurrence_proxy(g2);
    if (!rep.all_pass())
        rep.diagnostic = std::string("recurrence proxy: first=") + (rep.recurrent1 ? "yes" : "no") +
                         " second=" + (rep.recurrent2 ? "yes" : "no");
    return rep;
}

}  // namespace symdyn
