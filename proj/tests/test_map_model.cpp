#include <cmath>
#include <random>

#include "doctest.h"
#include "symdyn/errors.hpp"
#include "symdyn/map_model.hpp"

using namespace symdyn;

TEST_CASE("singular distance examples") {
    const MapModel d = builtin_map("doubling");
    CHECK(d.singular_distance(1.0 / 6) == doctest::Approx(1.0 / 12).epsilon(1e-15));
    CHECK(d.singular_distance(0.25) == 0.0);
    CHECK(d.singular_distance(0.0) == 0.0);

    const MapModel g = builtin_map("gauss");
    // Just below the endpoint 1/6 = 1/(2*3) of a Gauss branch.
    CHECK(g.singular_distance(1.0 / 6 - 1e-7) == doctest::Approx(1e-7).epsilon(1e-6));
    CHECK(g.singular_distance(1.0 / 6) == 0.0);
    // Oracle: scan of the first 10^4 singular points.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(1e-3, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double x = U(rng);
        double best = x;
        for (int n = 1; n <= 10000; ++n) best = std::min(best, std::fabs(x - 1.0 / (2.0 * n)));
        CHECK(g.singular_distance(x) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("branch lookup") {
    const MapModel d = builtin_map("doubling");
    CHECK(d.branch_at(0.1) == 0);
    CHECK(d.branch_at(0.3) == 1);
    CHECK_THROWS_AS(d.branch_at(0.25), SingularPoint);
    CHECK_THROWS_AS(d.branch_at(0.25 + 1e-13), SingularPoint);
}

TEST_CASE("branches invert and differentiate consistently") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (const auto& name : builtin_names()) {
        const MapModel m = builtin_map(name);
        const int nb = std::min(m.branch_count(), 12);
        for (int b = 0; b < nb; ++b) {
            const Branch br = m.branch(b);
            for (int i = 0; i < 200; ++i) {
                const double x = br.lo + (br.hi - br.lo) * (0.001 + 0.998 * U(rng));
                if (m.near_singular(x)) continue;
                CHECK(std::fabs(br.inv(br.fwd(x)) - x) < 1e-10);
                CHECK(br.dinv(br.fwd(x)) * br.dfwd(x) == doctest::Approx(1.0).epsilon(1e-9));
            }
            // Strict monotonicity on a grid.
            double prev = br.fwd(br.lo + (br.hi - br.lo) * 1e-3);
            const int s = br.dfwd(0.5 * (br.lo + br.hi)) > 0 ? 1 : -1;
            for (int k = 2; k < 100; ++k) {
                const double y = br.fwd(br.lo + (br.hi - br.lo) * k / 100.0);
                CHECK(s * (y - prev) > 0);
                prev = y;
            }
        }
    }
}

TEST_CASE("every non-singular point lies in exactly one branch") {
    std::mt19937_64 rng(11);
    for (const auto& name : builtin_names()) {
        const MapModel m = builtin_map(name);
        std::uniform_real_distribution<double> U(m.lo, m.hi);
        const int nb = std::min(m.branch_count(), 64);
        for (int i = 0; i < 500; ++i) {
            const double x = U(rng);
            if (m.near_singular(x) || x < 1.0 / (2.0 * (nb + 1))) continue;
            int hits = 0;
            for (int b = 0; b < nb; ++b) hits += m.branch(b).contains(x);
            CHECK(hits == 1);
            CHECK(m.branch(m.branch_at(x)).contains(x));
        }
    }
}

TEST_CASE("built-in regularity at 10^4 samples") {
    for (const auto& name : builtin_names()) {
        const RegularityReport r = verify_regularity(builtin_map(name), 10000, 1);
        CHECK_MESSAGE(r.all_pass(), name);
        CHECK(r.samples == 10000);
    }
}

TEST_CASE("regularity examples") {
    MapModel d = builtin_map("doubling");
    d.a = 1;
    d.beta = 0.5;
    d.kappa = 2;
    const RegularityReport r = verify_regularity(d, 2000, 4);
    CHECK(r.all_pass());
    for (const auto& c : r.clauses)
        if (c.clause.rfind("A3", 0) == 0) CHECK(c.worst == 0.0);

    MapModel q = builtin_map("quadratic");
    q.a = 0.05;
    CHECK_FALSE(verify_regularity(q, 2000, 4).all_pass());

    const RegularityReport empty = verify_regularity(d, 0, 1);
    CHECK(empty.samples == 0);
    CHECK(empty.all_pass());
}

TEST_CASE("map files") {
    const MapModel m = parse_map(R"(# doubling on [0, 0.5)
name = file_doubling
domain = 0 0.5
a = 1.5
beta = 0.5
kappa = 2
singular = 0 0.25
[branch]
dom = 0 0.25
kind = affine
coeffs = 2 0
[branch]
dom = 0.25 0.5
kind = affine
coeffs = 2 -0.5
)");
    CHECK(m.name == "file_doubling");
    CHECK(m.branch_count() == 2);
    CHECK(m.f(0.3) == doctest::Approx(0.1));
    CHECK(verify_regularity(m, 1000, 2).all_pass());
    CHECK_THROWS(parse_map("domain = 0 2\n[branch]\ndom = 0 2\nkind = affine\ncoeffs = 2 0\n"));
    CHECK_THROWS(parse_map("colour = blue\n"));
    CHECK_THROWS_AS(builtin_map("nosuchmap"), std::invalid_argument);
}
