#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "symdyn/errors.hpp"
#include "symdyn/markov_refine.hpp"
#include "symdyn/sampling.hpp"

using namespace symdyn;

namespace {

MapPtr map_of(const char* name) { return std::make_shared<const MapModel>(builtin_map(name)); }

GpoGraph relevant_graph(const char* name, int period) {
    auto A = std::make_shared<const Alphabet>(build_alphabet(periodic_library(map_of(name), period), AlphabetOptions{}));
    return prune_relevant(build_graph(A, false));
}

SamplePoint point(std::mt19937_64& rng, int window) {
    std::uniform_int_distribution<int> X(1, 9), B(0, 1);
    SamplePoint p;
    p.window = window;
    for (int n = -window; n <= window; ++n) {
        p.x.push_back(0.05 * X(rng));
        p.disp.push_back(LogReal::zero());
        p.br.push_back(B(rng));
    }
    return p;
}

// Hand-made cover: random points, random rectangles whose reach covers their members.
Cover synthetic_cover(std::mt19937_64& rng, int points, int rects) {
    Cover c;
    c.table.key_depth = 1;
    for (int i = 0; i < points; ++i) c.table.insert(point(rng, 2), {i});
    const int P = static_cast<int>(c.table.pts.size());
    std::uniform_int_distribution<int> pick(0, P - 1), size(1, std::max(1, P / 2));
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int r = 0; r < rects; ++r) {
        Rectangle z;
        z.vertex = r;
        z.center = 0.25;
        const bool wide = U(rng) < 0.5;
        z.reach = LogReal::from_double(wide ? 1.0 : 0.1 + 1e-9);
        std::set<int> members;
        const int k = size(rng);
        for (int tries = 0; static_cast<int>(members.size()) < k && tries < 50; ++tries) {
            const int q = pick(rng);
            if (wide || std::fabs(c.table.pts[static_cast<std::size_t>(q)].xs(0) - 0.25) <= 0.1) members.insert(q);
        }
        if (members.empty()) continue;
        z.points.assign(members.begin(), members.end());
        c.rects.push_back(z);
    }
    return c;
}

}  // namespace

TEST_CASE("refinement oracle on synthetic covers") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const Cover c = synthetic_cover(rng, 6 + trial % 20, 2 + trial % 7);
        const auto cells = refine(c);
        CHECK(partition_of(cells) == refine_bruteforce(c));
        // Finer than the cover: each cell sits inside its rectangle.
        for (const auto& cell : cells)
            for (int p : cell.members) {
                const auto& pts = c.rects[static_cast<std::size_t>(cell.rect)].points;
                CHECK(std::binary_search(pts.begin(), pts.end(), p));
            }
    }
}

TEST_CASE("refinement examples") {
    CHECK(refine(Cover{}).empty());
    std::mt19937_64 rng(3);
    Cover c;
    c.table.key_depth = 1;
    for (int i = 0; i < 8; ++i) c.table.insert(point(rng, 2), {i});
    const int P = static_cast<int>(c.table.pts.size());
    for (int r = 0; r < 2; ++r) {
        Rectangle z;
        z.center = 0.25;
        z.reach = LogReal::one();
        for (int q = r; q < P; q += 2) z.points.push_back(q);
        c.rects.push_back(z);
    }
    const auto cells = refine(c);
    CHECK(cells.size() == 2);
    CHECK(audits(c, cells, hat_graph(c, cells)).intersection_histogram == std::map<int, int>{{1, 2}});
    // Nested rectangles: the inner one splits the outer by fibre classes.
    Rectangle all;
    all.center = 0.25;
    all.reach = LogReal::one();
    for (int q = 0; q < P; ++q) all.points.push_back(q);
    c.rects.push_back(all);
    CHECK(partition_of(refine(c)) == refine_bruteforce(c));
}

TEST_CASE("fibres") {
    std::mt19937_64 rng(4);
    const Cover c = synthetic_cover(rng, 30, 1);
    const Rectangle& z = c.rects[0];
    for (int p : z.points) {
        const Fibres f = fibres(c, 0, p);
        for (int q : z.points) {
            const bool s = std::find(f.ws.begin(), f.ws.end(), q) != f.ws.end();
            CHECK(s == (c.table.pts[static_cast<std::size_t>(q)].xs(0) == c.table.pts[static_cast<std::size_t>(p)].xs(0)));
            const bool u = std::find(f.wu.begin(), f.wu.end(), q) != f.wu.end();
            CHECK(u == c.table.same_past(p, q));
        }
        // W^s fibres coincide or are disjoint.
        for (int q : f.ws) CHECK(fibres(c, 0, q).ws == f.ws);
    }
}

TEST_CASE("cover of a single cycle") {
    const GpoGraph g = relevant_graph("doubling", 2);
    REQUIRE(g.size() == 2);
    CoverOptions opt;
    CHECK(build_cover(g, CoverOptions{0, 12, 1}).rects.empty());
    const Cover c = build_cover(g, opt);
    REQUIRE(c.rects.size() == 2);
    for (const auto& r : c.rects) CHECK(r.points.size() == 1);
    const auto cells = refine(c);
    CHECK(cells.size() == 2);
    const TmsGraph t = hat_graph(c, cells);
    CHECK(t.graph.out[0] == std::vector<int>{1});
    CHECK(t.graph.out[1] == std::vector<int>{0});

    const std::vector<int> path{0, 1, 0, 1, 0};
    const HatPi h = hat_pi(c, cells, t, g, path, 2);
    const SamplePoint& P = c.table.pts[static_cast<std::size_t>(h.point)];
    CHECK((P.xs(0) == doctest::Approx(1.0 / 6) || P.xs(0) == doctest::Approx(1.0 / 3)));
    CHECK(h.sample_diameter.back().is_zero());
    CHECK_THROWS_AS(hat_pi(c, cells, t, g, {0, 0, 0, 0, 0}, 2), std::invalid_argument);
    CHECK_THROWS_AS(hat_pi(c, cells, t, g, {0, 1, 0}, 2), std::invalid_argument);
}

TEST_CASE("fixed point cell has a self-loop") {
    const GpoGraph g = relevant_graph("tent", 1);
    REQUIRE(g.size() == 1);
    const Cover c = build_cover(g, CoverOptions{});
    const auto cells = refine(c);
    REQUIRE(cells.size() == 1);
    const TmsGraph t = hat_graph(c, cells);
    CHECK(t.graph.out[0] == std::vector<int>{0});
    const HatPi h = hat_pi(c, cells, t, g, {0, 0, 0, 0, 0, 0, 0}, 3);
    CHECK(c.table.pts[static_cast<std::size_t>(h.point)].xs(0) == 0.0);
    CHECK(h.sample_diameter.back().is_zero());
}

TEST_CASE("doubling fixture") {
    const GpoGraph g = relevant_graph("doubling", 7);
    const Cover c = build_cover(g, CoverOptions{});
    CHECK(c.diagnostics.empty());
    for (const auto& r : c.rects)
        for (int p : r.points) {
            const SamplePoint& P = c.table.pts[static_cast<std::size_t>(p)];
            const Chart ch = g.chart(r.vertex);
            CHECK(P.xs(0) == ch.x0());
            CHECK_FALSE(abs_less(ch.p(), P.ds(0) * LogReal::from_double(ch.params.u)));
        }
    const auto cells = refine(c);
    CHECK(partition_of(cells) == refine_bruteforce(c));
    const TmsGraph t = hat_graph(c, cells);
    const AuditReport a = audits(c, cells, t);
    CHECK(a.markov_checks > 0);
    CHECK(a.markov_failures == 0);
    CHECK(a.max_hat_preimages <= a.max_sigma_preimages);
    const std::string part = export_partition(c, cells, t);
    CHECK(part.rfind("# symdyn-partition v1", 0) == 0);
}
