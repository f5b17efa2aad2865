#include "symdyn/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "symdyn/errors.hpp"

namespace symdyn {

namespace {

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

struct Mob {
    double a, b, c, d;
    double det() const { return a * d - b * c; }
    double den(double x) const { return c * x + d; }
    double val(double x) const { return (a * x + b) / den(x); }
    double d1(double x) const { const double q = den(x); return det() / (q * q); }
    double d2(double x) const { const double q = den(x); return -2.0 * c * det() / (q * q * q); }
    double delta(double x, double s) const { return det() * s / (den(x) * den(x + s)); }
    double d1_delta(double x, double s) const {
        const double q0 = den(x), q1 = den(x + s);
        return det() * (-c * s) * (2.0 * q0 + c * s) / (q0 * q0 * q1 * q1);
    }
    Mob inverse() const { return {d, -b, -c, a}; }
};

Mob mob_of(const Branch& br) { return {br.c[0], br.c[1], br.c[2], br.c[3]}; }

}  // namespace

Branch Branch::affine(BranchId id, double lo, double hi, double slope, double offset) {
    return moebius(id, lo, hi, slope, offset, 0.0, 1.0);
}

Branch Branch::moebius(BranchId id, double lo, double hi, double a, double b, double c, double d) {
    Branch br;
    br.id = id;
    br.lo = lo;
    br.hi = hi;
    br.kind = BranchKind::Moebius;
    br.c[0] = a; br.c[1] = b; br.c[2] = c; br.c[3] = d;
    return br;
}

Branch Branch::quadratic(BranchId id, double lo, double hi, double q2, double q1, double q0) {
    Branch br;
    br.id = id;
    br.lo = lo;
    br.hi = hi;
    br.kind = BranchKind::Quadratic;
    br.c[0] = q2; br.c[1] = q1; br.c[2] = q0; br.c[3] = 0;
    const double vertex = -q1 / (2.0 * q2);
    br.side = 0.5 * (lo + hi) >= vertex ? 1 : -1;
    return br;
}

bool Branch::contains(double x) const {
    const bool lo_ok = lo_closed ? x >= lo : x > lo;
    const bool hi_ok = hi_closed ? x <= hi : x < hi;
    return lo_ok && hi_ok;
}

double Branch::fwd(double x) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).val(x);
    return (c[0] * x + c[1]) * x + c[2];
}

double Branch::dfwd(double x) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).d1(x);
    return 2.0 * c[0] * x + c[1];
}

double Branch::d2fwd(double x) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).d2(x);
    return 2.0 * c[0];
}

double Branch::fwd_delta(double x, double s) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).delta(x, s);
    return s * (2.0 * c[0] * x + c[1] + c[0] * s);
}

double Branch::dfwd_delta(double x, double s) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).d1_delta(x, s);
    return 2.0 * c[0] * s;
}

namespace {
double disc(const Branch& br, double y) {
    const double q2 = br.c[0], q1 = br.c[1], q0 = br.c[2];
    return std::max(0.0, q1 * q1 - 4.0 * q2 * (q0 - y));
}
}  // namespace

double Branch::inv(double y) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).inverse().val(y);
    const double q2 = c[0], q1 = c[1];
    return -q1 / (2.0 * q2) + side * std::sqrt(disc(*this, y)) / (2.0 * std::fabs(q2));
}

double Branch::dinv(double y) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).inverse().d1(y);
    return side * sgn(c[0]) / std::sqrt(disc(*this, y));
}

double Branch::d2inv(double y) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).inverse().d2(y);
    const double D = disc(*this, y);
    return -2.0 * side * std::fabs(c[0]) / (D * std::sqrt(D));
}

double Branch::inv_delta(double y, double s) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).inverse().delta(y, s);
    const double r0 = std::sqrt(disc(*this, y)), r1 = std::sqrt(disc(*this, y + s));
    return 2.0 * side * sgn(c[0]) * s / (r0 + r1);
}

double Branch::dinv_delta(double y, double s) const {
    if (kind == BranchKind::Moebius) return mob_of(*this).inverse().d1_delta(y, s);
    const double r0 = std::sqrt(disc(*this, y)), r1 = std::sqrt(disc(*this, y + s));
    return side * sgn(c[0]) * (-4.0 * c[0] * s) / ((r0 + r1) * r0 * r1);
}

double Branch::img_lo() const { return std::min(fwd(lo), fwd(hi)); }
double Branch::img_hi() const { return std::max(fwd(lo), fwd(hi)); }

void MapModel::validate() const {
    if (!(hi > lo)) throw std::invalid_argument("empty domain");
    if (hi - lo >= 1.0) throw std::invalid_argument("domain diameter must be < 1");
    if (!(a > 1.0)) throw std::invalid_argument("constant a must exceed 1");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (!(kappa > 1.0)) throw std::invalid_argument("kappa must exceed 1");
    if (!lazy_branch && branches.empty()) throw std::invalid_argument("map has no branches");
}

double MapModel::singular_distance(double x) const {
    if (lazy_distance) return lazy_distance(x);
    double best = std::numeric_limits<double>::infinity();
    for (double s : singular) best = std::min(best, std::fabs(x - s));
    return best;
}

BranchId MapModel::branch_at(double x) const {
    if (!(x >= lo && x < hi)) throw SingularPoint("point outside domain: " + std::to_string(x));
    if (near_singular(x)) throw SingularPoint("point within exclusion radius of the singular set");
    if (lazy_locate) return lazy_locate(x);
    for (const auto& br : branches)
        if (br.contains(x)) return br.id;
    throw SingularPoint("no branch contains point");
}

Branch MapModel::branch(BranchId id) const {
    if (lazy_branch) return lazy_branch(id);
    if (id < 0 || id >= static_cast<int>(branches.size())) throw std::out_of_range("branch id");
    return branches[static_cast<std::size_t>(id)];
}

int MapModel::branch_count() const {
    if (lazy_branch) return enumeration_cap;
    return static_cast<int>(branches.size());
}

double MapModel::log_radius(double x) const {
    const double dx = singular_distance(x);
    const double dfx = singular_distance(f(x));
    return std::log(0.5) + std::min({a * std::log(dx), a * std::log(dfx), 0.0});
}

double MapModel::radius(double x) const { return std::exp(log_radius(x)); }

namespace {

MapModel make_doubling() {
    MapModel m;
    m.name = "doubling";
    m.a = 1.5; m.beta = 0.5; m.kappa = 2.0;
    m.branches = {Branch::affine(0, 0.0, 0.25, 2.0, 0.0), Branch::affine(1, 0.25, 0.5, 2.0, -0.5)};
    m.singular = {0.0, 0.25};
    return m;
}

MapModel make_tent() {
    MapModel m;
    m.name = "tent";
    m.a = 1.5; m.beta = 0.5; m.kappa = 2.0;
    m.branches = {Branch::affine(0, 0.0, 0.25, 2.0, 0.0), Branch::affine(1, 0.25, 0.5, -2.0, 1.0)};
    m.singular = {0.25};
    return m;
}

MapModel make_quadratic() {
    MapModel m;
    m.name = "quadratic";
    m.a = 6.0; m.beta = 0.5; m.kappa = 2.0;
    m.branches = {Branch::quadratic(0, 0.0, 0.25, -8.0, 4.0, 0.0),
                  Branch::quadratic(1, 0.25, 0.5, -8.0, 4.0, 0.0)};
    m.singular = {0.25};
    return m;
}

// x -> (1/(2x) mod 1)/2 on (0, 1/2); branch n-1 lives on (1/(2(n+1)), 1/(2n)].
Branch gauss_branch(BranchId id) {
    const double n = id + 1.0;
    Branch br = Branch::moebius(id, 1.0 / (2.0 * (n + 1.0)), 1.0 / (2.0 * n), -n / 2.0, 0.25, 1.0, 0.0);
    br.lo_closed = false;
    br.hi_closed = true;
    return br;
}

MapModel make_gauss() {
    MapModel m;
    m.name = "gauss";
    m.a = 4.0; m.beta = 0.5; m.kappa = 2.0;
    m.enumeration_cap = 64;
    m.singular = {0.0};
    m.lazy_distance = [](double x) {
        double best = std::fabs(x);
        if (x > 0) {
            const double k = 1.0 / (2.0 * x);
            if (k < 1e15) {
                for (double n : {std::floor(k), std::ceil(k)})
                    if (n >= 1) best = std::min(best, std::fabs(x - 1.0 / (2.0 * n)));
            }
        }
        return best;
    };
    m.lazy_locate = [](double x) -> BranchId {
        const double k = 1.0 / (2.0 * x);
        if (k >= 2e9) throw SingularPoint("gauss branch index overflow");
        BranchId id = static_cast<BranchId>(std::floor(k)) - 1;
        if (id < 0) id = 0;
        if (!gauss_branch(id).contains(x) && id > 0 && gauss_branch(id - 1).contains(x)) --id;
        if (!gauss_branch(id).contains(x) && gauss_branch(id + 1).contains(x)) ++id;
        return id;
    };
    m.lazy_branch = gauss_branch;
    return m;
}

}  // namespace

std::vector<std::string> builtin_names() { return {"doubling", "tent", "quadratic", "gauss"}; }

MapModel builtin_map(const std::string& name) {
    MapModel m;
    if (name == "doubling") m = make_doubling();
    else if (name == "tent") m = make_tent();
    else if (name == "quadratic") m = make_quadratic();
    else if (name == "gauss") m = make_gauss();
    else throw std::invalid_argument("unknown map: " + name);
    m.validate();
    return m;
}

MapModel parse_map(const std::string& text) {
    MapModel m;
    m.name = "custom";
    std::istringstream in(text);
    std::string line;
    bool in_branch = false;
    Branch cur;
    std::string kind;
    std::vector<double> coeffs;
    auto flush = [&]() {
        if (!in_branch) return;
        const BranchId id = static_cast<BranchId>(m.branches.size());
        Branch br;
        if (kind == "affine" && coeffs.size() == 2)
            br = Branch::affine(id, cur.lo, cur.hi, coeffs[0], coeffs[1]);
        else if (kind == "moebius" && coeffs.size() == 4)
            br = Branch::moebius(id, cur.lo, cur.hi, coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
        else if (kind == "quadratic" && coeffs.size() == 3)
            br = Branch::quadratic(id, cur.lo, cur.hi, coeffs[0], coeffs[1], coeffs[2]);
        else
            throw std::invalid_argument("bad branch description: kind '" + kind + "' with " +
                                        std::to_string(coeffs.size()) + " coefficients");
        m.branches.push_back(br);
        kind.clear();
        coeffs.clear();
    };
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        if (key == "[branch]") {
            flush();
            in_branch = true;
            cur = Branch{};
            continue;
        }
        std::string eq;
        ls >> eq;
        if (eq != "=") throw std::invalid_argument("expected 'key = value' in: " + line);
        std::vector<double> vals;
        std::string word;
        std::vector<std::string> words;
        while (ls >> word) words.push_back(word);
        auto nums = [&]() {
            std::vector<double> out;
            for (auto& w : words) out.push_back(std::stod(w));
            return out;
        };
        if (in_branch) {
            if (key == "dom") {
                vals = nums();
                if (vals.size() != 2) throw std::invalid_argument("dom needs two endpoints");
                cur.lo = vals[0];
                cur.hi = vals[1];
            } else if (key == "kind") {
                kind = words.empty() ? "" : words[0];
            } else if (key == "coeffs") {
                coeffs = nums();
            } else {
                throw std::invalid_argument("unknown branch key: " + key);
            }
            continue;
        }
        if (key == "name") m.name = words.empty() ? "custom" : words[0];
        else if (key == "domain") {
            vals = nums();
            if (vals.size() != 2) throw std::invalid_argument("domain needs two endpoints");
            m.lo = vals[0];
            m.hi = vals[1];
        } else if (key == "a") m.a = nums().at(0);
        else if (key == "beta") m.beta = nums().at(0);
        else if (key == "kappa") m.kappa = nums().at(0);
        else if (key == "exclusion") m.exclusion = nums().at(0);
        else if (key == "singular") m.singular = nums();
        else throw std::invalid_argument("unknown key: " + key);
    }
    flush();
    m.validate();
    return m;
}

bool RegularityReport::all_pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

namespace {

double sample_point(const MapModel& m, std::mt19937_64& rng, bool near) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    if (!near) return m.lo + (m.hi - m.lo) * U(rng);
    double s;
    if (m.lazy_distance) {
        std::uniform_int_distribution<int> N(1, 40);
        s = 1.0 / (2.0 * N(rng));
    } else {
        std::uniform_int_distribution<std::size_t> I(0, m.singular.size() - 1);
        s = m.singular[I(rng)];
    }
    const double off = std::pow(10.0, -1.0 - 9.0 * U(rng));
    return U(rng) < 0.5 ? s - off : s + off;
}

void note(ClauseResult& c, double value, double x, double dx) {
    ++c.checked;
    if (value > c.worst) {
        c.worst = value;
        c.witness = x;
        c.witness_distance = dx;
    }
}

}  // namespace

RegularityReport verify_regularity(const MapModel& m, std::size_t sample_count, std::uint64_t seed) {
    RegularityReport rep;
    rep.map = m.name;
    ClauseResult a1{"A1"}, a2fl{"A2-df-lower"}, a2fu{"A2-df-upper"}, a2gl{"A2-dg-lower"},
        a2gu{"A2-dg-upper"}, a3f{"A3-df"}, a3g{"A3-dg"};
    a1.bound = 0;
    a2fl.bound = a2fu.bound = a2gl.bound = a2gu.bound = m.a;
    a3f.bound = a3g.bound = m.kappa;
    if (sample_count == 0) return rep;

    std::mt19937_64 rng(seed);
    constexpr int kGrid = 9;
    std::size_t drawn = 0, attempts = 0;
    while (drawn < sample_count && attempts < 100 * sample_count) {
        ++attempts;
        const double x = sample_point(m, rng, attempts % 2 == 0);
        if (!m.in_domain(x) || m.near_singular(x)) continue;
        const Branch br = m.branch(m.branch_at(x));
        const double fx = br.fwd(x);
        if (!m.in_domain(fx) || m.near_singular(fx)) continue;
        ++drawn;
        const double dx = m.singular_distance(x);
        const double r = m.radius(x);
        const double ldx = std::log(dx);

        const double dlo = std::max(m.lo, x - 2 * r), dhi = std::min(m.hi, x + 2 * r);
        const double elo = std::max(m.lo, fx - 2 * r), ehi = std::min(m.hi, fx + 2 * r);
        // Open balls: an endpoint landing on the branch boundary up to rounding is fine.
        constexpr double kUlps = 8 * std::numeric_limits<double>::epsilon();
        const bool d_ok = dlo >= br.lo - kUlps && dhi <= br.hi + kUlps;
        const bool e_ok = elo >= br.img_lo() - kUlps && ehi <= br.img_hi() + kUlps;
        note(a1, (d_ok && e_ok) ? 0.0 : 1.0, x, dx);

        double ys[kGrid], zs[kGrid];
        for (int k = 0; k < kGrid; ++k) {
            const double t = (k + 0.5) / kGrid;
            ys[k] = std::clamp(dlo + (dhi - dlo) * t, br.lo, br.hi);
            zs[k] = std::clamp(elo + (ehi - elo) * t, br.img_lo(), br.img_hi());
        }
        for (int k = 0; k < kGrid; ++k) {
            // Smallest exponent a for which d^a <= |D| <= d^-a holds at this sample.
            if (br.contains(ys[k])) {
                const double l = std::log(std::fabs(br.dfwd(ys[k])));
                note(a2fl, l / ldx, x, dx);
                note(a2fu, l / -ldx, x, dx);
            }
            const double l = std::log(std::fabs(br.dinv(zs[k])));
            note(a2gl, l / ldx, x, dx);
            note(a2gu, l / -ldx, x, dx);
        }
        for (int i = 0; i < kGrid; ++i) {
            for (int j = i + 1; j < kGrid; ++j) {
                const double sy = ys[j] - ys[i], sz = zs[j] - zs[i];
                if (sy > 0 && br.contains(ys[i]) && br.contains(ys[j]))
                    note(a3f, std::fabs(br.dfwd_delta(ys[i], sy)) / std::pow(sy, m.beta), x, dx);
                if (sz > 0) note(a3g, std::fabs(br.dinv_delta(zs[i], sz)) / std::pow(sz, m.beta), x, dx);
            }
        }
    }
    rep.samples = drawn;
    a1.pass = a1.worst == 0.0;
    for (auto* c : {&a2fl, &a2fu, &a2gl, &a2gu}) c->pass = c->worst <= m.a;
    a3f.pass = a3f.worst <= m.kappa;
    a3g.pass = a3g.worst <= m.kappa;
    rep.clauses = {a1, a2fl, a2fu, a2gl, a2gu, a3f, a3g};
    return rep;
}

}  // namespace symdyn
