#include <cmath>
#include <random>

#include "doctest.h"
#include "symdyn/errors.hpp"
#include "symdyn/natural_extension.hpp"

using namespace symdyn;

namespace {
MapPtr map_of(const char* name) { return std::make_shared<const MapModel>(builtin_map(name)); }
}  // namespace

TEST_CASE("shift examples") {
    const MapPtr m = map_of("doubling");
    // 1/6 has preimage 1/3 under branch 1 (2/3 - 0.5 = 1/6).
    const OrbitWindow w = OrbitWindow::make(m, 1.0 / 6, {1, 0, 1, 0, 1, 0}, 4);
    CHECK(w.x(-1) == doctest::Approx(1.0 / 3));
    CHECK(w.shift(0).same_cache(w));
    CHECK(w.shift(1).x0() == doctest::Approx(1.0 / 3));
    const OrbitWindow back = w.shift(1).shift(-1);
    CHECK(back.agrees(w, -5, 4));
    CHECK(w.shift(3).depth() == 9);
    CHECK_THROWS_AS(w.shift(-3, 4), WindowExhausted);
    CHECK_THROWS_AS(w.shift(-7), WindowExhausted);
}

TEST_CASE("window invariants on random windows") {
    std::mt19937_64 rng(5);
    for (const char* name : {"doubling", "tent", "quadratic", "gauss"}) {
        const MapPtr m = map_of(name);
        for (int i = 0; i < 20; ++i) {
            const OrbitWindow w = random_window(m, rng, 30, 10);
            for (int n = -w.depth() + 1; n <= 10; ++n) {
                CHECK(std::fabs(m->f(w.x(n - 1)) - w.x(n)) < 1e-10);
                CHECK_FALSE(m->near_singular(w.x(n)));
            }
            CHECK(w.recomputed().same_cache(w));
            const OrbitWindow r = OrbitWindow::deserialize(m, w.serialize());
            CHECK(r.agrees(w, -w.depth(), w.fwd_len()));
            // theta_0 o f-hat = f o theta_0
            CHECK(w.shift(1).x0() == doctest::Approx(m->f(w.x0())).epsilon(1e-10));
        }
    }
}

TEST_CASE("hat distance examples") {
    const MapPtr m = map_of("doubling");
    const std::vector<BranchId> word{0, 1, 1, 0, 1, 0, 0, 1};
    const OrbitWindow a = OrbitWindow::make(m, 0.1, word, 2);
    const OrbitWindow b = OrbitWindow::make(m, 0.11, word, 2);
    CHECK(hat_distance(a, a, 8).value == 0.0);
    CHECK(hat_distance(a, b, 8).value == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(hat_distance(a, b, 0).value == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(hat_distance(a, b, 8).truncation == doctest::Approx(std::ldexp(0.5, -8)));
}

TEST_CASE("cocycle examples and identity") {
    const MapPtr m = map_of("doubling");
    const OrbitWindow w = OrbitWindow::make(m, 0.1, {0, 1, 1, 0}, 5);
    CHECK(cocycle(w, 0).to_double() == 1.0);
    CHECK(cocycle(w, 3).to_double() == doctest::Approx(8.0));
    CHECK(cocycle(w, -2).to_double() == doctest::Approx(0.25));

    std::mt19937_64 rng(9);
    for (const char* name : {"tent", "quadratic", "gauss"}) {
        const MapPtr q = map_of(name);
        const OrbitWindow v = random_window(q, rng, 30, 20);
        for (int n = -10; n <= 10; n += 3)
            for (int k = -8; k <= 8; k += 4) {
                const LogReal lhs = cocycle(v, n + k);
                const LogReal rhs = cocycle(v.shift(n), k) * cocycle(v, n);
                CHECK(lhs.sign == rhs.sign);
                CHECK(lhs.lg == doctest::Approx(rhs.lg).epsilon(1e-9));
            }
    }
}

TEST_CASE("periodic windows") {
    const MapPtr m = map_of("doubling");
    const OrbitWindow w = OrbitWindow::periodic_from_word(m, {0, 1}, 10);
    CHECK(w.period() == 2);
    CHECK(w.x0() == doctest::Approx(1.0 / 6));
    CHECK(w.x(1) == doctest::Approx(1.0 / 3));
    CHECK(w.shift(2).agrees(w, -20, 20));
    // g(x_{n+1}) == x_n exactly.
    for (int n = -4; n < 4; ++n) CHECK(m->branch(w.branch(n)).inv(w.x(n + 1)) == w.x(n));
}
