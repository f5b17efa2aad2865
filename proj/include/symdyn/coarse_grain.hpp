#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "symdyn/pesin.hpp"

namespace symdyn {

struct BinKey {
    std::array<int, 3> k{};  // e^{-k-1} <= d(x_i, S) < e^{-k}
    std::array<int, 3> l{};  // e^l <= u_i < e^{l+1}
    std::array<int, 3> a{};  // cover cell of x_i
    int m = 0;               // e^{-m-1} <= Q < e^{-m}
    int j = 0;               // e^{-j-2} <= p <= e^{-j+2}
    auto operator<=>(const BinKey&) const = default;
    std::string str() const;
};

// Coordinates, offsets and u values at shifts -1, 0, 1 plus Q.
struct GammaData {
    std::array<double, 3> x{};
    std::array<LogReal, 3> off{};
    std::array<double, 3> u{};
    GridIndex Q_index = 0;
};

// Minimal description of an eps-chart used by the overlap relation.
struct ChartView {
    double x0 = 0;
    LogReal offset;
    double u = 1;
    GridIndex p_index = 0;
};

ChartView view_of(const Chart& c);
bool overlap_test(const ChartView& a, const ChartView& b, double eps);
bool overlap_test(const Chart& a, const Chart& b);
// v = Psi_y^q -> w = Psi_x^p.
bool edge_test(const Chart& v, const Chart& w, bool strong);

// An orbit contributing indices [lo, hi]; the chart centers along it may carry a
// sub-resolution displacement, given at index hi and transported by inverse branches.
struct OrbitSample {
    OrbitWindow w;
    LogReal top_offset;
};

// Offsets at indices lo-1 .. hi+1 (vector index n - lo + 1).
std::vector<LogReal> orbit_offsets(const OrbitWindow& w, int lo, int hi, const LogReal& top_offset);

struct Center {
    OrbitWindow w;
    LogReal offset;
    GammaData gamma;
    PesinParams params;
    BinKey key;
    GridIndex p_min_index = 0;  // largest admissible size
    GridIndex p_max_index = 0;  // smallest admissible size
};

struct Alphabet {
    PesinConfig cfg;
    int cover_level = 6;
    int lo = 0, hi = 0;
    std::vector<Center> centers;
    std::map<BinKey, std::vector<int>> groups;  // key -> center ids (net order)
    std::vector<double> cover_centers;
    std::size_t samples_seen = 0;

    Chart chart(int center, GridIndex p_index) const;
    int cover_cell(double x) const;
};

struct AlphabetOptions {
    PesinConfig cfg;
    int lo = 1;
    int hi = 20;
    int cover_level = 6;
};

// Greedy sizes p_n along an orbit (window-truncated min over the past), as grid indices.
std::vector<GridIndex> orbit_sizes(const OrbitWindow& w, int lo, int hi, const PesinConfig& cfg);
BinKey bin_key(const MapModel& m, const GammaData& g, const PesinParams& p, GridIndex p_index, const Alphabet& alpha);
GammaData gamma_data(const OrbitWindow& w, const PesinParams& p, const LogReal& off_m1, const LogReal& off0,
                     const LogReal& off1);
// Net conditions (a) and (b).
bool net_close(const GammaData& a, const GammaData& b, int j, double eps);

Alphabet build_alphabet(const std::vector<OrbitSample>& samples, const AlphabetOptions& opt);

struct VertexRef {
    int center = 0;
    GridIndex p_index = 0;
    bool operator==(const VertexRef&) const = default;
};

struct GpoGraph {
    std::shared_ptr<const Alphabet> alpha;
    std::vector<VertexRef> vertices;
    std::vector<std::vector<int>> strong_out;
    std::vector<std::vector<int>> weak_out;  // filled only when requested
    bool has_weak = false;
    std::map<BinKey, std::vector<int>> bin_index;
    std::map<std::pair<int, GridIndex>, int> ids;

    std::size_t size() const { return vertices.size(); }
    Chart chart(int v) const { return alpha->chart(vertices[v].center, vertices[v].p_index); }
    double log_p(int v) const { return grid_log(vertices[v].p_index, alpha->cfg.epsilon); }
    std::size_t strong_edge_count() const;
    std::size_t weak_edge_count() const;
    int find(const VertexRef& r) const;
    // Vertices with log p > t, enumerated through bin_index.
    std::vector<int> above(double t) const;
};

GpoGraph build_graph(std::shared_ptr<const Alphabet> alpha, bool with_weak);
GpoGraph prune_relevant(const GpoGraph& g);

struct Gpo {
    int lo = 0;  // index of the first chart
    std::vector<Chart> charts;
    std::vector<VertexRef> refs;
    std::vector<bool> strong;     // strong[i]: edge charts[i] -> charts[i+1] verified strong
    std::vector<int> broken;      // indices i whose edge failed
    int hi() const { return lo + static_cast<int>(charts.size()) - 1; }
    const Chart& at(int n) const { return charts[static_cast<std::size_t>(n - lo)]; }
};

// Throws NoNetVertex when an index finds no net representative.
Gpo sufficiency_encode(const OrbitWindow& w, const Alphabet& alpha, const LogReal& top_offset = LogReal::zero());

std::string export_graph(const GpoGraph& g);
std::string export_dot(const GpoGraph& g);

}  // namespace symdyn
