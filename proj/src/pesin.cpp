#include "symdyn/pesin.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "symdyn/errors.hpp"

namespace symdyn {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double grid_log(GridIndex k, double eps) { return -eps * static_cast<double>(k) / 3.0; }

GridIndex grid_floor(double log_size, double eps) {
    if (log_size >= 0) return 0;
    auto k = static_cast<GridIndex>(std::ceil(-3.0 * log_size / eps));
    while (grid_log(k, eps) > log_size) ++k;
    while (k > 0 && grid_log(k - 1, eps) <= log_size) --k;
    return k;
}

Certificate expansion_certificate(const OrbitWindow& w, double chi, int depth, int horizon, int n_min) {
    Certificate c;
    double fwd = kInf, bwd = kInf;
    const int F = std::min(horizon, w.fwd_len());
    const int N = std::min(depth, w.depth());
    double acc = 0;
    for (int n = 1; n <= F; ++n) {
        const double d = std::fabs(w.df(n - 1));
        if (d == 0.0) { fwd = -kInf; break; }
        acc += std::log(d);
        if (n >= n_min) fwd = std::min(fwd, acc / n);
    }
    acc = 0;
    for (int n = 1; n <= N; ++n) {
        const double d = std::fabs(w.df(-n));
        if (d == 0.0) { bwd = -kInf; break; }
        acc += std::log(d);
        if (n >= n_min) bwd = std::min(bwd, acc / n);
    }
    c.forward_rate = fwd;
    c.backward_rate = bwd;
    c.margin = std::min(fwd, bwd) - chi;
    c.ok = c.margin > 0 && std::isfinite(c.margin);
    return c;
}

UValue compute_u(const OrbitWindow& w, double chi, int depth) {
    const int N = std::min(depth, w.depth());
    double lsum = 0;  // n = 0 term
    double acc = 0, rate = kInf;
    for (int n = 1; n <= N; ++n) {
        const double d = std::fabs(w.df(-n));
        if (d == 0.0) throw TailDiverges("zero derivative in backward window");
        acc += std::log(d);
        if (2 * n >= N) rate = std::min(rate, acc / n);
        lsum = log_add(lsum, 2.0 * n * chi - 2.0 * acc);
    }
    if (N == 0) {
        acc = 0;
        for (int n = 1; n <= w.fwd_len(); ++n) {
            acc += std::log(std::fabs(w.df(n - 1)));
            rate = std::min(rate, acc / n);
        }
    }
    if (!(rate > chi)) throw TailDiverges("expansion rate does not exceed chi");
    UValue r;
    r.log_u2 = lsum;
    r.u = std::exp(0.5 * lsum);
    r.tail_bound = std::exp(2.0 * N * (chi - rate)) / -std::expm1(2.0 * (chi - rate));
    return r;
}

double u_recursion_step(double u, double dfx, double chi) {
    return std::sqrt(1.0 + std::exp(2.0 * chi) * u * u / (dfx * dfx));
}

QValue compute_Q(double u, double u_prev, double rho, double epsilon, double a, double beta) {
    QValue q;
    const double first = -(24.0 / beta) * std::log(u);
    const double second = -(12.0 / beta) * std::log(u_prev) + (72.0 * a / beta) * std::log(rho);
    q.logQtilde = (3.0 / beta) * std::log(epsilon) + std::min(first, second);
    q.index = grid_floor(q.logQtilde, epsilon);
    q.logQ = grid_log(q.index, epsilon);
    return q;
}

DeltaEps delta_eps(double epsilon) {
    DeltaEps d;
    d.n = static_cast<int>(std::floor(-std::log(epsilon) / epsilon)) + 1;
    while (std::exp(-epsilon * d.n) >= epsilon) ++d.n;
    while (d.n > 1 && std::exp(-epsilon * (d.n - 1)) < epsilon) --d.n;
    d.log_delta = -epsilon * d.n;
    d.index = 3 * static_cast<GridIndex>(d.n);
    return d;
}

std::vector<GridIndex> q_greedy_index(const std::vector<GridIndex>& Q_index, double epsilon) {
    const GridIndex di = delta_eps(epsilon).index;
    std::vector<GridIndex> out(Q_index.size());
    for (std::size_t i = 0; i < Q_index.size(); ++i) {
        const GridIndex cap = di + Q_index[i];
        out[i] = i == 0 ? cap : std::max(out[i - 1] - 3, cap);
    }
    return out;
}

std::vector<double> q_greedy(const std::vector<double>& logQ, double epsilon) {
    std::vector<GridIndex> idx;
    idx.reserve(logQ.size());
    for (double l : logQ) idx.push_back(grid_floor(l, epsilon));
    std::vector<double> out;
    for (GridIndex k : q_greedy_index(idx, epsilon)) out.push_back(grid_log(k, epsilon));
    return out;
}

PesinParams pesin_params(const OrbitWindow& w, const PesinConfig& cfg) {
    const MapModel& m = w.map();
    PesinParams p;
    p.chi = cfg.chi;
    p.epsilon = cfg.epsilon;
    p.u = compute_u(w, cfg.chi, cfg.depth).u;
    p.u_prev = compute_u(w.shift(-1), cfg.chi, cfg.depth).u;
    p.u_next = compute_u(w.shift(1), cfg.chi, cfg.depth).u;
    p.rho = std::min({m.singular_distance(w.x(-1)), m.singular_distance(w.x(0)), m.singular_distance(w.x(1))});
    const QValue q = compute_Q(p.u, p.u_prev, p.rho, cfg.epsilon, m.a, m.beta);
    p.logQtilde = q.logQtilde;
    p.logQ = q.logQ;
    p.Q_index = q.index;
    const DeltaEps d = delta_eps(cfg.epsilon);
    p.log_delta_eps = d.log_delta;
    p.q_index = d.index + q.index;
    p.log_q = grid_log(p.q_index, cfg.epsilon);
    return p;
}

LogReal Chart::psi_offset(const LogReal& t) const { return offset + t / LogReal::from_double(params.u); }

std::string Chart::dump() const {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "chart x0=%.17g", x0());
    os << buf << " back=";
    const auto back = center.back_branches();
    const std::size_t n = std::min<std::size_t>(back.size(), 64);
    for (std::size_t i = 0; i < n; ++i) os << (i ? "," : "") << back[i];
    std::snprintf(buf, sizeof buf, " u=%.17g logQ=%.17g log_p=%.17g", params.u, params.logQ, log_p());
    os << buf;
    return os.str();
}

Chart make_chart(const OrbitWindow& w, const PesinConfig& cfg, GridIndex p_index) {
    Chart c;
    c.center = w;
    c.params = pesin_params(w, cfg);
    c.p_index = p_index;
    return c;
}

namespace {

struct Local {
    bool quad;
    double det, C, q0, q1;       // moebius inverse: denominators at y and y + s
    double sig, q2, r0, r1;      // quadratic: sqrt of discriminants
};

Local local(const Branch& br, double y, double sd) {
    Local L{};
    if (br.kind == BranchKind::Moebius) {
        L.quad = false;
        const double A = br.c[3], B = -br.c[1], C = -br.c[2], D = br.c[0];
        L.det = A * D - B * C;
        L.C = C;
        L.q0 = C * y + D;
        L.q1 = C * (y + sd) + D;
    } else {
        L.quad = true;
        const double q2 = br.c[0], q1 = br.c[1], q0 = br.c[2];
        auto disc = [&](double v) { return std::max(0.0, q1 * q1 - 4.0 * q2 * (q0 - v)); };
        L.q2 = q2;
        L.sig = br.side * (q2 < 0 ? -1.0 : 1.0);
        L.r0 = std::sqrt(disc(y));
        L.r1 = std::sqrt(disc(y + sd));
    }
    return L;
}

}  // namespace

LogReal branch_delta(const Branch& br, double y, const LogReal& s) {
    if (s.is_zero()) return {};
    const Local L = local(br, y, s.to_double());
    const double k = L.quad ? 2.0 * L.sig / (L.r0 + L.r1) : L.det / (L.q0 * L.q1);
    return s * LogReal::from_double(k);
}

LogReal branch_ddelta(const Branch& br, double y, const LogReal& s) {
    if (s.is_zero()) return {};
    const double sd = s.to_double();
    const Local L = local(br, y, sd);
    const double k = L.quad ? L.sig * (-4.0 * L.q2) / ((L.r0 + L.r1) * L.r0 * L.r1)
                            : L.det * (-L.C) * (2.0 * L.q0 + L.C * sd) / (L.q0 * L.q0 * L.q1 * L.q1);
    return s * LogReal::from_double(k);
}

LogReal branch_curvature(const Branch& br, double y, const LogReal& s) {
    if (s.is_zero()) return {};
    const Local L = local(br, y, s.to_double());
    const double k = L.quad ? -4.0 * L.q2 * L.sig / (L.r0 * (L.r0 + L.r1) * (L.r0 + L.r1))
                            : -L.C * L.det / (L.q0 * L.q0 * L.q1);
    return s * s * LogReal::from_double(k);
}

LogReal branch_dinv(const Branch& br, double y, const LogReal& off) {
    return LogReal::from_double(br.dinv(y)) + branch_ddelta(br, y, off);
}

LogReal ChartLink::eval(const LogReal& t) const {
    const LogReal tau = t / LogReal::from_double(u_from);
    return LogReal::from_double(u_to) * (c0 + branch_delta(br, x_from, off_from + tau) - off_to);
}

LogReal ChartLink::deriv(const LogReal& t) const {
    const LogReal tau = t / LogReal::from_double(u_from);
    return LogReal::from_double(u_to / u_from) * branch_dinv(br, x_from, off_from + tau);
}

ChartLink make_link(const Chart& from, const Chart& to) {
    ChartLink L;
    L.br = from.center.map().branch(from.center.branch(-1));
    L.x_from = from.x0();
    L.u_from = from.params.u;
    L.off_from = from.offset;
    L.x_to = to.x0();
    L.u_to = to.params.u;
    L.off_to = to.offset;
    L.c0 = LogReal::from_double(L.br.inv(L.x_from) - L.x_to);
    return L;
}

void check_chart_domain(const Chart& c) {
    const MapModel& m = c.center.map();
    const double L = std::log(10.0) + c.params.logQ;
    const double l2 = std::log(2.0);
    const double x0 = c.center.x(0), xm = c.center.x(-1);
    const double r0 = l2 + m.log_radius(x0), rm = l2 + m.log_radius(xm);
    if (!(L < r0 && L < rm))
        throw DomainViolation("Psi(R[10Q]) not inside D_{x0} and E_{x-1}");
    if (!(L - m.a * std::log(m.singular_distance(xm)) < rm))
        throw DomainViolation("g(Psi(R[10Q])) not inside D_{x-1}");
    if (!(L < r0 + m.a * std::log(m.singular_distance(x0))))
        throw DomainViolation("Psi(R[10Q]) not inside g_{x0}(E_{x0})");
}

GDecomposition chart_G(const Chart& from, const Chart& to, int samples, double beta) {
    check_chart_domain(from);
    const ChartLink L = make_link(from, to);
    GDecomposition g;
    const LogReal gp = branch_dinv(L.br, L.x_from, L.off_from);
    const LogReal uf = LogReal::from_double(L.u_from), ut = LogReal::from_double(L.u_to);
    g.A = (ut / uf * gp).to_double();
    g.A_single = (LogReal::from_double(from.params.u_prev) / uf * gp).to_double();
    g.h0 = ut * (L.c0 - L.off_to + branch_delta(L.br, L.x_from, L.off_from));
    g.dh0 = LogReal::from_double(L.u_to - from.params.u_prev) / uf * gp;
    const LogReal T = LogReal::from_log(std::log(10.0) + from.params.logQ);
    const int K = std::max(samples, 1);
    std::vector<LogReal> ts;
    ts.reserve(static_cast<std::size_t>(K) + 1);
    ts.push_back(LogReal::zero());
    for (int k = 0; k < K; ++k) ts.push_back(T * LogReal::from_double(std::cos(kPi * (k + 0.5) / K)));
    g.h_sup = g.h0.abs();
    g.dh_sup = g.dh0.abs();
    g.dG_sup = std::fabs(g.A);
    for (const LogReal& t : ts) {
        const LogReal tau = t / uf;
        const LogReal h = g.h0 + g.dh0 * t + ut * branch_curvature(L.br, L.x_from, tau);
        const LogReal dh = g.dh0 + ut / uf * branch_ddelta(L.br, L.x_from, tau);
        if (abs_less(g.h_sup, h)) g.h_sup = h.abs();
        if (abs_less(g.dh_sup, dh)) g.dh_sup = dh.abs();
        g.dG_sup = std::max(g.dG_sup, std::fabs(L.deriv(t).to_double()));
    }
    auto holder = [&](const LogReal& t1, const LogReal& t2) {
        const LogReal dt = t2 - t1;
        if (dt.is_zero()) return;
        const LogReal num = ut / uf * branch_ddelta(L.br, L.x_from + (t1 / uf).to_double(), dt / uf);
        const LogReal q = num.abs() / dt.abs().pow(beta / 2.0);
        if (abs_less(g.holder_quotient, q)) g.holder_quotient = q.abs();
    };
    for (std::size_t k = 2; k < ts.size(); ++k) holder(ts[k - 1], ts[k]);
    for (int j = 0; j <= 40; ++j) holder(LogReal::zero(), T * LogReal::from_log(-j * std::log(2.0)));
    g.samples = static_cast<int>(ts.size());
    return g;
}

}  // namespace symdyn
