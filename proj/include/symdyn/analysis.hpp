#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "symdyn/coarse_grain.hpp"

namespace symdyn {

using BigInt = boost::multiprecision::cpp_int;

struct Digraph {
    std::vector<std::vector<int>> out;
    int size() const { return static_cast<int>(out.size()); }
    static Digraph from(const GpoGraph& g) { return {g.strong_out}; }
};

// Closed paths of length n through v: (A^n)_{vv}.
BigInt loop_count(const Digraph& g, int v, int n);
// tr(A^n) for n = 1 .. n_max.
std::vector<BigInt> closed_path_counts(const Digraph& g, int n_max);
// Oracle by depth-first enumeration.
BigInt loop_count_bruteforce(const Digraph& g, int v, int n);

struct EntropyEstimate {
    double loop_growth = 0;     // (1/n) log loop_count at the largest n with a loop
    int loop_n = 0;
    double spectral = 0;        // log of the Perron root of v's strongly connected component
    int component_size = 0;
    int period = 0;             // gcd of cycle lengths in the component
};

EntropyEstimate gurevich_entropy(const Digraph& g, int v, int n_max = 40);
double spectral_radius(const Digraph& g, const std::vector<int>& component, int iterations = 2000);
std::vector<std::vector<int>> strongly_connected_components(const Digraph& g);
int component_period(const Digraph& g, const std::vector<int>& component);

// Branch words over the first `cap` branches (all if 0); Lyndon words only when primitive is set.
std::vector<std::vector<BranchId>> branch_words(int branches, int n, bool lyndon_only);
// Solutions of f^n(x) = x, deduplicated within 1e-9, with the half-open branch convention.
std::vector<double> map_periodic_points(const MapModel& m, int n, int branch_cap = 0);

struct GrowthRow {
    int n = 0;
    std::size_t map_count = 0;
    BigInt symbolic = 0;
    double ratio = 0;
};

struct GrowthReport {
    std::vector<GrowthRow> rows;
    double slope_full = 0;      // least squares over all n with a nonzero count
    double slope_tail = 0;      // least squares over n >= n_max / 2
    double map_slope_full = 0;
    double map_slope_tail = 0;
    double entropy_spectral = 0;  // largest over components
    bool empty_graph = false;
    std::string text() const;
    std::string json() const;
};

GrowthReport growth_report(const MapModel& m, const Digraph& g, int n_max, int branch_cap = 0);

struct LeastSquares {
    double slope = 0, intercept = 0, residual = 0;
    int points = 0;
};
LeastSquares fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct HolderFit {
    double exponent = 0;
    double residual = 0;
    int pairs = 0;
    bool flagged = false;
    std::string note;
};

// Pairs (k, d-hat) with coding distance e^{-k}.
HolderFit holder_modulus(const std::vector<std::pair<int, double>>& pairs);

}  // namespace symdyn
