#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include "doctest.h"
#include "symdyn/errors.hpp"
#include "symdyn/pesin.hpp"

using namespace symdyn;

namespace {
MapPtr map_of(const char* name) { return std::make_shared<const MapModel>(builtin_map(name)); }
const double kLn2 = std::log(2.0);
}  // namespace

TEST_CASE("expansion certificate examples") {
    const MapPtr m = map_of("doubling");
    std::mt19937_64 rng(1);
    const OrbitWindow w = random_window(m, rng, 45, 40);
    const Certificate c = expansion_certificate(w, 0.5 * kLn2, 40, 40);
    CHECK(c.ok);
    CHECK(c.margin == doctest::Approx(0.5 * kLn2).epsilon(1e-12));
    CHECK_FALSE(expansion_certificate(w, 2 * kLn2, 40, 40).ok);
}

TEST_CASE("u for the doubling map") {
    const MapPtr m = map_of("doubling");
    std::mt19937_64 rng(2);
    const OrbitWindow w = random_window(m, rng, 45, 40);
    const UValue u = compute_u(w, 0.5 * kLn2, 40);
    CHECK(std::fabs(u.u - std::sqrt(2.0)) <= 2 * std::ldexp(1.0, -40));
    CHECK(u.tail_bound <= 2 * std::ldexp(1.0, -40) * 1.0000001);

    // Ratio 2^-0.2 per step: a short window sits well inside its tail bound, a long one converges.
    const UValue u9 = compute_u(w, 0.9 * kLn2, 40);
    const double want = std::sqrt(1.0 / (1.0 - std::pow(2.0, -0.2)));
    CHECK(std::fabs(u9.u * u9.u - want * want) <= u9.tail_bound);
    const OrbitWindow deep = random_window(m, rng, 420, 40);
    const UValue u9d = compute_u(deep, 0.9 * kLn2, 400);
    CHECK(u9d.u == doctest::Approx(want).epsilon(1e-9));

    const UValue u0 = compute_u(w, 0.5 * kLn2, 0);
    CHECK(u0.u == 1.0);
    CHECK(u0.tail_bound > 0);

    CHECK_THROWS_AS(compute_u(w, kLn2, 40), TailDiverges);
}

TEST_CASE("u recursion examples") {
    CHECK(u_recursion_step(std::sqrt(2.0), 2, 0.5 * kLn2) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(u_recursion_step(1, 2, 0.5 * kLn2) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));
    CHECK(u_recursion_step(1, 1e200, 0.5 * kLn2) == 1.0);
}

TEST_CASE("u recursion against independent series") {
    std::mt19937_64 rng(3);
    for (const char* name : {"doubling", "tent", "quadratic", "gauss"}) {
        const MapPtr m = map_of(name);
        const double chi = 0.5 * kLn2;
        for (int trial = 0; trial < 40; ++trial) {
            const OrbitWindow w = random_window(m, rng, 90, 40);
            UValue base;
            try {
                base = compute_u(w, chi, 40);
            } catch (const TailDiverges&) {
                continue;
            }
            double u = base.u;
            double bound = base.tail_bound;
            for (int k = 1; k <= 10; ++k) {
                const double d = w.df(k - 1);
                u = u_recursion_step(u, d, chi);
                bound *= std::exp(2 * chi) / (d * d);
                UValue direct;
                try {
                    direct = compute_u(w.shift(k), chi, 40 + k);
                } catch (const TailDiverges&) {
                    break;
                }
                // Same truncation: agreement to rounding.
                CHECK(u == doctest::Approx(direct.u).epsilon(1e-12));
                // Independent depth-40 truncation: within the propagated tail bound.
                const UValue indep = compute_u(w.shift(k), chi, 40);
                CHECK(std::fabs(u * u - indep.u * indep.u) <= bound + indep.tail_bound + 1e-12);
            }
        }
    }
}

TEST_CASE("seed error contraction") {
    const double chi = 0.5 * kLn2;
    std::mt19937_64 rng(4);
    const OrbitWindow w = random_window(map_of("quadratic"), rng, 30, 30);
    double a = 1.7, b = 1.7 * 1.01;
    double gap = b - a;
    for (int k = 0; k < 30; ++k) {
        const double d = w.df(k);
        if (std::exp(2 * chi) / (d * d) >= 1) break;
        a = u_recursion_step(a, d, chi);
        b = u_recursion_step(b, d, chi);
        CHECK(std::fabs(b - a) < gap);
        gap = std::fabs(b - a);
    }
}

TEST_CASE("Q examples") {
    using boost::multiprecision::cpp_dec_float_50;
    const QValue q = compute_Q(std::sqrt(2.0), std::sqrt(2.0), 0.1, 0.1, 1.0, 0.5);
    // Oracle: 50-digit re-evaluation of the formula.
    const cpp_dec_float_50 u = sqrt(cpp_dec_float_50(2)), rho("0.1"), eps("0.1");
    const cpp_dec_float_50 first = -48 * log(u), second = -24 * log(u) + 144 * log(rho);
    const cpp_dec_float_50 qt = 6 * log(eps) + (first < second ? first : second);
    CHECK(q.logQtilde == doctest::Approx(qt.convert_to<double>()).epsilon(1e-14));
    CHECK(std::fabs(q.logQtilde + 353.706) < 1e-3);
    CHECK(q.index == 10612);
    CHECK(q.logQ == doctest::Approx(-10612 * 0.1 / 3).epsilon(1e-14));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double eps = 0.01 + 0.5 * U(rng);
        const QValue r = compute_Q(1 + 5 * U(rng), 1 + 5 * U(rng), 1e-6 + 0.4 * U(rng), eps, 0.5 + 3 * U(rng),
                                   0.2 + 0.8 * U(rng));
        CHECK(r.logQ <= r.logQtilde);
        CHECK(r.logQtilde - r.logQ < eps / 3);
    }
    // u Q^{beta/24} <= eps^{1/8} for the doubling parameters.
    const QValue d = compute_Q(std::sqrt(2.0), std::sqrt(2.0), 1.0 / 12, 0.1, 1.5, 0.5);
    CHECK(std::log(std::sqrt(2.0)) + 0.5 / 24 * d.logQ <= std::log(0.1) / 8);
}

TEST_CASE("delta_eps examples") {
    const DeltaEps d = delta_eps(0.1);
    CHECK(d.n == 24);
    CHECK(d.index == 72);
    CHECK(d.log_delta == doctest::Approx(-2.4));
    const double e = std::exp(-1.0);
    CHECK(delta_eps(e).n == 3);
    CHECK(delta_eps(e).log_delta == doctest::Approx(-3 * e));
    for (double eps = 0.01; eps < 1; eps += 0.0137) {
        const DeltaEps x = delta_eps(eps);
        // Oracle: direct enumeration of n.
        int n = 1;
        while (!(std::exp(-eps * n) < eps && eps <= std::exp(-eps * (n - 1)))) ++n;
        CHECK(x.n == n);
        CHECK(x.log_delta < std::log(eps));
    }
}

TEST_CASE("q greedy examples") {
    const double eps = 0.1;
    const double ld = delta_eps(eps).log_delta;
    std::vector<double> constant(10, -50.0 * eps / 3);
    for (double v : q_greedy(constant, eps)) CHECK(v == doctest::Approx(ld - 50.0 * eps / 3));

    std::vector<double> dip(20, -30.0 * eps / 3);
    dip[5] = -300.0 * eps / 3;
    const auto out = q_greedy(dip, eps);
    CHECK(out[5] == doctest::Approx(ld + dip[5]));
    for (int k = 6; k < 20; ++k) {
        const double want = std::min(out[k - 1] + eps, ld + dip[k]);
        CHECK(out[k] == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(out[6] == doctest::Approx(out[5] + eps));
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> I(0, 600);
    std::vector<GridIndex> Q(50);
    for (auto& q : Q) q = I(rng);
    const auto qi = q_greedy_index(Q, eps);
    for (std::size_t i = 0; i < Q.size(); ++i) CHECK(qi[i] >= Q[i] + 72);
}

TEST_CASE("chart maps") {
    const PesinConfig cfg;
    const MapPtr d = map_of("doubling");
    const OrbitWindow w = OrbitWindow::periodic_from_word(d, {0, 1}, 40);
    const Chart from = make_chart(w, cfg, 0);
    CHECK(from.params.log_q <= from.params.log_delta_eps + from.params.logQ);
    const Chart from_p = make_chart(w, cfg, from.params.q_index);
    const Chart to = make_chart(w.shift(-1), cfg, from.params.q_index);
    const GDecomposition g = chart_G(from_p, to, 200, 0.5);
    CHECK(g.A == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g.A < std::exp(-cfg.chi));
    CHECK(g.h0.is_zero());
    CHECK(g.dh0.is_zero());
    CHECK((g.h_sup.is_zero() || g.h_sup.lg < std::log(1e-12)));

    std::mt19937_64 rng(8);
    const MapPtr q = map_of("quadratic");
    int tested = 0;
    while (tested < 30) {
        const OrbitWindow v = random_window(q, rng, 90, 40);
        if (!expansion_certificate(v, cfg.chi, 80, 40).ok) continue;
        Chart a, b;
        try {
            a = make_chart(v, cfg, 0);
            a.p_index = a.params.q_index;
            b = make_chart(v.shift(-1), cfg, a.p_index);
        } catch (const TailDiverges&) {
            continue;
        }
        const GDecomposition r = chart_G(a, b, 1000, q->beta);
        CHECK(r.dG_sup < std::exp(-cfg.chi / 2));
        CHECK(std::fabs(r.A - r.A_single) <= 1e-12);
        ++tested;
    }
}

TEST_CASE("Q is periodic along periodic orbits") {
    const PesinConfig cfg;
    for (const char* name : {"doubling", "tent", "quadratic", "gauss"}) {
        const MapPtr m = map_of(name);
        const OrbitWindow w = OrbitWindow::periodic_from_word(m, {0, 1, 1}, 40);
        for (int k = 0; k < 3; ++k) {
            const PesinParams a = pesin_params(w.shift(k), cfg), b = pesin_params(w.shift(k + 3), cfg);
            CHECK(a.logQ == b.logQ);
            CHECK(a.u == b.u);
        }
    }
}

TEST_CASE("grid helpers") {
    CHECK(grid_floor(0.0, 0.1) == 0);
    for (double l = -0.01; l > -100; l *= 1.37) {
        const GridIndex k = grid_floor(l, 0.1);
        CHECK(grid_log(k, 0.1) <= l);
        CHECK(grid_log(k - 1, 0.1) > l);
    }
}
