#include <cmath>
#include <random>

#include "doctest.h"
#include "symdyn/errors.hpp"
#include "symdyn/sampling.hpp"

using namespace symdyn;

namespace {

MapPtr map_of(const char* name) { return std::make_shared<const MapModel>(builtin_map(name)); }

const double kEps = 0.1;

ChartView view(double x0, double u, GridIndex p) { return {x0, LogReal::zero(), u, p}; }

// Graph over dummy centers, for the pruning examples.
GpoGraph toy_graph(int n, const std::vector<std::pair<int, int>>& edges) {
    auto A = std::make_shared<Alphabet>();
    A->centers.resize(static_cast<std::size_t>(n));
    GpoGraph g;
    g.alpha = A;
    for (int v = 0; v < n; ++v) {
        g.vertices.push_back({v, 0});
        g.ids[{v, 0}] = v;
    }
    g.strong_out.assign(static_cast<std::size_t>(n), {});
    for (auto [a, b] : edges) g.strong_out[static_cast<std::size_t>(a)].push_back(b);
    return g;
}

std::vector<int> centers_of(const GpoGraph& g) {
    std::vector<int> out;
    for (const auto& v : g.vertices) out.push_back(v.center);
    return out;
}

}  // namespace

TEST_CASE("overlap examples") {
    const ChartView a = view(0.2, 1.5, 30);
    CHECK(overlap_test(a, a, kEps));
    CHECK_FALSE(overlap_test(a, view(0.2, 1.5, 36), kEps));  // ratio e^{2 eps}
    CHECK(overlap_test(a, view(0.2, 1.5, 33), kEps));        // ratio e^{eps}
    // Distance exactly (p1 p2)^4: strict inequality fails.
    ChartView b = a;
    b.offset = LogReal::from_log(8 * grid_log(30, kEps));
    CHECK_FALSE(overlap_test(a, b, kEps));
    b.offset = LogReal::from_log(8 * grid_log(30, kEps) - 1e-9);
    CHECK(overlap_test(a, b, kEps));
}

TEST_CASE("overlap symmetry, u control and scaling") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> P(45, 90), D(-4, 4);
    int passing = 0;
    for (int i = 0; i < 20000; ++i) {
        const GridIndex p1 = P(rng), p2 = std::max<GridIndex>(0, p1 + D(rng));
        const double thr = std::exp(4 * (grid_log(p1, kEps) + grid_log(p2, kEps)));
        const double u1 = 1 + 3 * U(rng);
        const double du = thr * (2 * U(rng) - 1) * 0.6;
        const double u2 = 1 / (1 / u1 + du);
        const ChartView a = view(0.2, u1, p1), b = view(0.2 + thr * (2 * U(rng) - 1) * 0.6, u2, p2);
        const bool ab = overlap_test(a, b, kEps);
        CHECK(ab == overlap_test(b, a, kEps));
        if (!ab) continue;
        ++passing;
        // u1 / u2 = e^{+-(p1 p2)^3}
        CHECK(std::fabs(std::log(u1 / u2)) <= std::exp(3 * (grid_log(p1, kEps) + grid_log(p2, kEps))));
        // Scaling both sizes by the same grid factor c > 1 keeps the overlap.
        for (GridIndex c = 1; c <= std::min(p1, p2); ++c) {
            ChartView a2 = a, b2 = b;
            a2.p_index -= c;
            b2.p_index -= c;
            CHECK(overlap_test(a2, b2, kEps));
        }
    }
    CHECK(passing > 1000);
}

TEST_CASE("alphabet examples") {
    const MapPtr m = map_of("doubling");
    AlphabetOptions opt;
    CHECK(build_alphabet({}, opt).centers.empty());

    const OrbitWindow w = OrbitWindow::periodic_from_word(m, {0, 1}, 60);
    const Alphabet two = build_alphabet({{w, {}}, {w.shift(1), {}}}, opt);
    CHECK(two.centers.size() == 2);
    CHECK(two.centers[0].gamma.x[1] != two.centers[1].gamma.x[1]);
    const Alphabet dup = build_alphabet({{w, {}}, {w.shift(1), {}}, {w, {}}, {w.shift(2), {}}}, opt);
    CHECK(dup.centers.size() == 2);
    CHECK(dup.samples_seen == 4u * 20u);
}

TEST_CASE("prune examples") {
    const GpoGraph cycle = toy_graph(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(prune_relevant(cycle).size() == 3);
    // 3 -> 4 -> 0 dangles into the cycle; 5 hangs off it.
    const GpoGraph tail = toy_graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 0}, {1, 5}});
    const GpoGraph pr = prune_relevant(tail);
    CHECK(centers_of(pr) == std::vector<int>{0, 1, 2});
    CHECK(pr.strong_edge_count() == 3);
    CHECK(prune_relevant(toy_graph(0, {})).size() == 0);
}

TEST_CASE("graph over a periodic library") {
    const MapPtr m = map_of("doubling");
    AlphabetOptions opt;
    const auto lib = periodic_library(m, 5);
    auto A = std::make_shared<const Alphabet>(build_alphabet(lib, opt));
    const GpoGraph g = build_graph(A, true);

    SUBCASE("strong edges are weak edges") {
        CHECK(g.strong_edge_count() > 0);
        for (std::size_t v = 0; v < g.size(); ++v)
            for (int w : g.strong_out[v]) {
                const auto& wk = g.weak_out[v];
                CHECK(std::find(wk.begin(), wk.end(), w) != wk.end());
            }
    }
    SUBCASE("discreteness through the bin index") {
        double top = -1e300, bottom = 1e300;
        for (std::size_t v = 0; v < g.size(); ++v) {
            top = std::max(top, g.log_p(static_cast<int>(v)));
            bottom = std::min(bottom, g.log_p(static_cast<int>(v)));
        }
        for (int k = 0; k <= 40; ++k) {
            const double t = top + 1 - (top + 1 - bottom) * k / 40.0;
            std::vector<int> scan;
            for (std::size_t v = 0; v < g.size(); ++v)
                if (g.log_p(static_cast<int>(v)) > t) scan.push_back(static_cast<int>(v));
            CHECK(g.above(t) == scan);
        }
    }
    SUBCASE("relevant part is the periodic cycles") {
        const GpoGraph r = prune_relevant(g);
        // 2^n - 2 symbolic points of period dividing n, summed over primitive orbits: 2+6+12+30 = 50.
        CHECK(r.size() == 50);
        for (std::size_t v = 0; v < r.size(); ++v) CHECK(r.strong_out[v].size() == 1);
    }
    SUBCASE("export formats") {
        const std::string txt = export_graph(g);
        CHECK(txt.rfind("# symdyn-graph v1 map=doubling", 0) == 0);
        CHECK(export_dot(prune_relevant(g)).find("digraph") != std::string::npos);
    }
}

TEST_CASE("sufficiency encoding") {
    const MapPtr m = map_of("doubling");
    AlphabetOptions opt;
    const OrbitWindow w = OrbitWindow::periodic_from_word(m, {0, 1, 1}, 60);
    const Alphabet A = build_alphabet({{w, {}}}, opt);
    const Gpo g = sufficiency_encode(w, A);
    CHECK(g.broken.empty());
    CHECK(g.charts.size() == 20u);
    for (std::size_t i = 0; i + 3 < g.refs.size(); ++i) CHECK(g.refs[i] == g.refs[i + 3]);
    for (std::size_t i = 0; i + 1 < g.charts.size(); ++i) {
        CHECK(edge_test(g.charts[i], g.charts[i + 1], true));
        CHECK(edge_test(g.charts[i], g.charts[i + 1], false));
        Chart off = g.charts[i + 1];
        off.p_index += 1;
        CHECK_FALSE(edge_test(g.charts[i], off, true));
        CHECK(edge_test(g.charts[i], off, false));
    }
    // Same chart at both ends of an edge: the predecessor window does not match.
    CHECK_FALSE(edge_test(g.charts[0], g.charts[0], false));

    const OrbitWindow other = OrbitWindow::periodic_from_word(m, {0, 0, 1}, 60);
    CHECK_THROWS_AS(sufficiency_encode(other, A), NoNetVertex);
}

TEST_CASE("sufficiency on certified random samples") {
    for (const char* name : {"doubling", "tent", "quadratic", "gauss"}) {
        const MapPtr m = map_of(name);
        AlphabetOptions opt;
        const auto samples = certified_samples(m, 15, 3, opt);
        REQUIRE(samples.size() == 15u);
        const Alphabet A = build_alphabet(samples, opt);
        for (const auto& s : samples) {
            const Gpo g = sufficiency_encode(s.w, A);
            CHECK(g.broken.empty());
        }
    }
}

TEST_CASE("twin offsets stay in the same net cell") {
    const MapPtr m = map_of("quadratic");
    AlphabetOptions opt;
    const auto lib = periodic_library(m, 4);
    const auto twins = with_twins(lib, opt);
    CHECK(twins.size() == 2 * lib.size());
    const Alphabet A = build_alphabet(twins, opt);
    const Alphabet B = build_alphabet(lib, opt);
    CHECK(A.centers.size() == B.centers.size());
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const Gpo g = sufficiency_encode(lib[i].w, A, twins[2 * i + 1].top_offset);
        CHECK(g.broken.empty());
    }
}

TEST_CASE("canonical sample order") {
    const MapPtr m = map_of("tent");
    AlphabetOptions opt;
    auto a = periodic_library(m, 4);
    auto b = a;
    std::reverse(b.begin(), b.end());
    sort_canonical(a);
    sort_canonical(b);
    CHECK(export_graph(build_graph(std::make_shared<const Alphabet>(build_alphabet(a, opt)), false)) ==
          export_graph(build_graph(std::make_shared<const Alphabet>(build_alphabet(b, opt)), false)));
}
