#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symdyn/logreal.hpp"
#include "symdyn/natural_extension.hpp"

namespace symdyn {

struct PesinConfig {
    double chi = 0.5 * 0.6931471805599453;
    double epsilon = 0.1;
    int depth = 40;  // N: terms of the u series and backward certificate range
    int horizon = 40;  // F: forward certificate range
    int n_min = 1;
};

// Sizes live on the grid I_eps = {exp(-eps k / 3) : k >= 0}; larger index means smaller size.
using GridIndex = std::int64_t;
double grid_log(GridIndex k, double eps);
GridIndex grid_floor(double log_size, double eps);  // largest grid point <= exp(log_size)

struct Certificate {
    bool ok = false;
    double margin = 0;       // worst (rate - chi) over the checked range
    double forward_rate = 0;  // worst forward Birkhoff quotient
    double backward_rate = 0; // worst backward quotient
};

Certificate expansion_certificate(const OrbitWindow& w, double chi, int depth, int horizon, int n_min = 1);

struct UValue {
    double u = 1;
    double log_u2 = 0;
    double tail_bound = 0;  // bound on the neglected part of u^2
};

// Throws TailDiverges when the backward rate over the second half of the window does not exceed chi.
UValue compute_u(const OrbitWindow& w, double chi, int depth);
double u_recursion_step(double u, double dfx, double chi);

struct QValue {
    double logQtilde = 0;
    double logQ = 0;
    GridIndex index = 0;
};

QValue compute_Q(double u, double u_prev, double rho, double epsilon, double a, double beta);

struct DeltaEps {
    int n = 0;
    double log_delta = 0;
    GridIndex index = 0;  // 3n
};

DeltaEps delta_eps(double epsilon);

// ln q per index; seeded with ln delta + logQ at the first index.
std::vector<double> q_greedy(const std::vector<double>& logQ, double epsilon);
std::vector<GridIndex> q_greedy_index(const std::vector<GridIndex>& Q_index, double epsilon);

struct PesinParams {
    double chi = 0, epsilon = 0;
    double u = 1, u_prev = 1, u_next = 1;
    double rho = 0;
    double logQtilde = 0, logQ = 0;
    GridIndex Q_index = 0;
    double log_delta_eps = 0;
    double log_q = 0;
    GridIndex q_index = 0;
};

// u at shifts -1, 0, 1, rho, Q and delta for the window's base point.
PesinParams pesin_params(const OrbitWindow& w, const PesinConfig& cfg);

struct Chart {
    OrbitWindow center;
    PesinParams params;
    GridIndex p_index = 0;
    LogReal offset;  // sub-resolution displacement of the chart center

    double log_p() const { return grid_log(p_index, params.epsilon); }
    LogReal p() const { return LogReal::from_log(log_p()); }
    double x0() const { return center.x0(); }
    // Psi(t) - x0 = offset + t / u, exact in log space.
    LogReal psi_offset(const LogReal& t) const;
    std::string dump() const;
};

Chart make_chart(const OrbitWindow& w, const PesinConfig& cfg, GridIndex p_index);

// g(y + s) - g(y), g'(y + s) - g'(y) and g(y + s) - g(y) - g'(y) s for tiny s.
LogReal branch_delta(const Branch& br, double y, const LogReal& s);
LogReal branch_ddelta(const Branch& br, double y, const LogReal& s);
LogReal branch_curvature(const Branch& br, double y, const LogReal& s);
LogReal branch_dinv(const Branch& br, double y, const LogReal& off);  // g'(y + off)

// Psi_to^{-1} o g o Psi_from, with g the inverse branch of `from` sending x_0 to x_{-1}.
struct ChartLink {
    Branch br;
    double x_from = 0, u_from = 1, x_to = 0, u_to = 1;
    LogReal off_from, off_to;
    LogReal c0;  // g(x_from) - x_to

    LogReal eval(const LogReal& t) const;
    LogReal deriv(const LogReal& t) const;
};

ChartLink make_link(const Chart& from, const Chart& to);

struct GDecomposition {
    double A = 0;         // (dG)_0 of this map
    double A_single = 0;  // (dG_xhat)_0 with the chart at f-hat^{-1} of the source center
    LogReal h0, dh0;      // G - A_single t at 0 and its derivative at 0
    LogReal h_sup, dh_sup;
    double dG_sup = 0;
    LogReal holder_quotient;  // sampled Hol_{beta/2}(dG)
    int samples = 0;
};

// Throws DomainViolation when a chart-domain inclusion fails.
GDecomposition chart_G(const Chart& from, const Chart& to, int samples, double beta);
void check_chart_domain(const Chart& c);

}  // namespace symdyn
