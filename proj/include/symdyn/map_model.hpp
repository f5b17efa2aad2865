#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace symdyn {

using BranchId = int;

enum class BranchKind { Moebius, Quadratic };

// One monotone piece of the map. Moebius covers the affine case (c = 0, d = 1).
// Quadratic pieces are q2 x^2 + q1 x + q0 on a domain that avoids the vertex.
struct Branch {
    BranchId id = 0;
    double lo = 0, hi = 0;
    bool lo_closed = true, hi_closed = false;
    BranchKind kind = BranchKind::Moebius;
    double c[4] = {1, 0, 0, 1};
    int side = 1;  // quadratic only: +1 if dom lies right of the vertex

    static Branch affine(BranchId id, double lo, double hi, double slope, double offset);
    static Branch moebius(BranchId id, double lo, double hi, double a, double b, double c, double d);
    static Branch quadratic(BranchId id, double lo, double hi, double q2, double q1, double q0);

    bool contains(double x) const;
    double fwd(double x) const;
    double dfwd(double x) const;
    double d2fwd(double x) const;
    double inv(double y) const;
    double dinv(double y) const;
    double d2inv(double y) const;
    // f(x+s) - f(x) and friends, without cancellation.
    double fwd_delta(double x, double s) const;
    double dfwd_delta(double x, double s) const;
    double inv_delta(double y, double s) const;
    double dinv_delta(double y, double s) const;
    // Closed image interval of the branch domain.
    double img_lo() const;
    double img_hi() const;
};

class MapModel {
public:
    std::string name;
    double lo = 0, hi = 0.5;
    double a = 2, beta = 0.5, kappa = 10;
    double exclusion = 1e-12;
    std::vector<Branch> branches;
    std::vector<double> singular;

    // Lazily enumerated families (Gauss type) override the finite tables.
    std::function<double(double)> lazy_distance;
    std::function<BranchId(double)> lazy_locate;
    std::function<Branch(BranchId)> lazy_branch;
    int enumeration_cap = 0;  // branches considered when enumerating words

    void validate() const;

    double singular_distance(double x) const;
    bool near_singular(double x) const { return singular_distance(x) <= exclusion; }
    BranchId branch_at(double x) const;  // throws SingularPoint
    Branch branch(BranchId id) const;
    int branch_count() const;  // finite count, or enumeration_cap for lazy families
    bool in_domain(double x) const { return x >= lo && x < hi; }

    double f(double x) const { return branch(branch_at(x)).fwd(x); }
    double df(double x) const { return branch(branch_at(x)).dfwd(x); }
    double radius(double x) const;
    double log_radius(double x) const;  // stays finite where radius underflows
};

MapModel builtin_map(const std::string& name);  // throws std::invalid_argument
std::vector<std::string> builtin_names();
MapModel parse_map(const std::string& text);

struct ClauseResult {
    std::string clause;
    bool pass = true;
    double worst = 0;  // required exponent for A2, Hoelder quotient for A3, violations for A1
    double bound = 0;
    double witness = 0;
    double witness_distance = 0;  // d(witness, S)
    std::size_t checked = 0;
};

struct RegularityReport {
    std::string map;
    std::size_t samples = 0;
    std::vector<ClauseResult> clauses;
    bool all_pass() const;
};

RegularityReport verify_regularity(const MapModel& m, std::size_t sample_count, std::uint64_t seed);

}  // namespace symdyn
