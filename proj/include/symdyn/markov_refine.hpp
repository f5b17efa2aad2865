#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "symdyn/analysis.hpp"
#include "symdyn/shadowing.hpp"

namespace symdyn {

// A sampled natural-extension point: coordinates (chart center + displacement) and branches
// on [-window, window]. Identity uses the zeroth coordinate and `key_depth` backward branches.
struct SamplePoint {
    int window = 0;
    std::vector<double> x;
    std::vector<LogReal> disp;
    std::vector<BranchId> br;
    std::vector<std::vector<int>> codings;  // vertex paths that shadow this point

    double xs(int n) const { return x[static_cast<std::size_t>(n + window)]; }
    const LogReal& ds(int n) const { return disp[static_cast<std::size_t>(n + window)]; }
    BranchId bs(int n) const { return br[static_cast<std::size_t>(n + window)]; }
};

struct PointKey {
    double x = 0;
    int dsign = 0;
    double dlg = 0;
    std::vector<BranchId> back;
    auto operator<=>(const PointKey&) const = default;
};

struct PointTable {
    int key_depth = 0;
    std::vector<SamplePoint> pts;
    std::map<PointKey, int> index;

    // Key of f-hat^k of point i, if the window covers it.
    bool shifted_key(int i, int k, PointKey& out) const;
    int find_shift(int i, int k) const;  // -1 when unavailable or unsampled
    int insert(SamplePoint p, const std::vector<int>& coding);
    bool same_zeroth(int a, int b) const;
    bool same_past(int a, int b) const;
};

struct Rectangle {
    int vertex = 0;     // graph vertex id
    double center = 0;  // chart center
    LogReal reach;      // 100 p / u: half-width of the enlarged chart interval
    std::vector<int> points;  // sorted ids into the point table
};

struct Cover {
    PointTable table;
    std::vector<Rectangle> rects;
    std::vector<std::string> diagnostics;
};

struct CoverOptions {
    int paths_per_vertex = 2;
    int window = 12;
    std::uint64_t seed = 1;
};

Cover build_cover(const GpoGraph& g, const CoverOptions& opt);

struct Fibres {
    std::vector<int> ws;  // points of the rectangle with the same zeroth coordinate
    std::vector<int> wu;  // same past, zeroth coordinate inside the enlarged chart interval
};

Fibres fibres(const Cover& c, int rect, int point);

enum class Sig : std::uint8_t { su, s0, u0, none };
const char* sig_name(Sig s);

struct RefinedCell {
    int id = 0;
    std::vector<int> members;
    std::vector<std::tuple<int, int, Sig>> signature;  // (i, j, class)
    int rect = 0;  // smallest rectangle containing the cell
};

// Rectangle pairs with a common sampled point, i included.
std::vector<std::vector<int>> intersecting(const Cover& c);
std::vector<RefinedCell> refine(const Cover& c);
// Same partition by direct enumeration, as sorted member lists.
std::vector<std::vector<int>> refine_bruteforce(const Cover& c);
std::vector<std::vector<int>> partition_of(const std::vector<RefinedCell>& cells);

struct TmsGraph {
    Digraph graph;
    std::vector<int> cell_of;  // point id -> cell id
};

TmsGraph hat_graph(const Cover& c, const std::vector<RefinedCell>& cells);

struct HatPi {
    int point = -1;                        // a member of the deepest cylinder
    std::vector<std::size_t> members;      // cylinder sizes per depth
    std::vector<LogReal> sample_diameter;  // spread of zeroth coordinates per depth
    std::vector<LogReal> envelope;         // nested chart interval width per depth
};

// path[depth + l] is the cell at time l, l in [-depth, depth]. Throws std::invalid_argument on an
// inadmissible path and EmptyCylinder when the sampled cylinder dies.
HatPi hat_pi(const Cover& c, const std::vector<RefinedCell>& cells, const TmsGraph& t, const GpoGraph& g,
             const std::vector<int>& path, int depth);

struct AuditReport {
    std::map<int, int> intersection_histogram;  // #{j : Z_i meets Z_j} -> count of i
    int max_cells_in_rect = 0;
    int max_rects_over_cell = 0;
    int max_sigma_preimages = 0;  // distinct vertex codings per point
    int max_hat_preimages = 0;    // distinct cell paths per point
    std::size_t markov_checks = 0;
    std::size_t markov_failures = 0;
    std::string text() const;
};

AuditReport audits(const Cover& c, const std::vector<RefinedCell>& cells, const TmsGraph& t);

std::string export_partition(const Cover& c, const std::vector<RefinedCell>& cells, const TmsGraph& t);

}  // namespace symdyn
