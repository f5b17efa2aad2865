#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "symdyn/logreal.hpp"
#include "symdyn/map_model.hpp"

namespace symdyn {

using MapPtr = std::shared_ptr<const MapModel>;

// Generating data of a window. Non-periodic windows are generated by an anchor point
// and a backward branch word; periodic windows by one period of an exact cycle.
struct WindowData {
    MapPtr map;
    double anchor = 0;
    std::vector<BranchId> anchor_back;  // branch of x_{-1}, x_{-2}, ... relative to the anchor
    int horizon = 0;                    // forward iterates cached past the anchor
    std::vector<double> pts;            // x_{-depth .. horizon}
    std::vector<double> dfs;            // df at x_{-depth .. horizon-1}
    std::vector<BranchId> brs;          // branch of x_{-depth .. horizon-1}
    std::vector<double> cycle;          // periodic mode when non-empty
    std::vector<double> cycle_df;
    std::vector<BranchId> cycle_br;

    int depth() const { return static_cast<int>(anchor_back.size()); }
};

class OrbitWindow {
public:
    static constexpr int kPeriodicDepth = 1 << 20;

    OrbitWindow() = default;
    // Throws SingularPoint if a cached point falls within the exclusion radius.
    static OrbitWindow make(MapPtr map, double x0, const std::vector<BranchId>& back, int fwd_len);
    // Built from the top: x_{F} = x_top, earlier points by inverse branches, origin at index 0.
    // Every cached point is then the exact inverse-branch image of its successor.
    static OrbitWindow backward_built(MapPtr map, double x_top, const std::vector<BranchId>& back, int fwd_len);
    // cycle[i+1] = f(cycle[i]) (cyclically); points are taken as given.
    static OrbitWindow periodic(MapPtr map, const std::vector<double>& cycle, int fwd_len);
    // Periodic window with forward branch word `word`; the cycle is a floating-point fixed point
    // of the composed inverse branches, so g(x_{n+1}) == x_n holds exactly.
    static OrbitWindow periodic_from_word(MapPtr map, const std::vector<BranchId>& word, int fwd_len);

    const MapModel& map() const { return *d_->map; }
    MapPtr map_ptr() const { return d_->map; }
    bool is_periodic() const { return !d_->cycle.empty(); }
    int period() const { return static_cast<int>(d_->cycle.size()); }

    double x0() const { return x(0); }
    double x(int n) const;
    double df(int n) const;
    BranchId branch(int n) const;  // branch containing x_n
    int depth() const;             // available backward depth N
    int fwd_len() const { return fwd_len_; }
    int origin() const { return origin_; }
    std::vector<BranchId> back_branches() const;  // branches of x_{-1}, ..., x_{-N}

    // f-hat^k; forward horizon is kept at fwd_len by iterating f.
    OrbitWindow shift(int k, int min_depth = 0) const;
    // Rebuilds the cache from the generating data.
    OrbitWindow recomputed() const;
    bool same_cache(const OrbitWindow& o) const;

    std::string serialize() const;
    static OrbitWindow deserialize(MapPtr map, const std::string& record);

    // Exact identity of the represented natural-extension coordinates on [lo, hi].
    bool agrees(const OrbitWindow& o, int lo, int hi) const;

private:
    std::shared_ptr<const WindowData> d_;
    int origin_ = 0;
    int fwd_len_ = 0;
};

struct HatDistance {
    double value = 0;       // max over 0 >= n >= -depth of 2^n |x_n - y_n|
    double truncation = 0;  // 2^-depth * diam(M): bound on the neglected tail
};

HatDistance hat_distance(const OrbitWindow& a, const OrbitWindow& b, int depth);

// df-hat^(n) at the window as (sign, log|.|).
LogReal cocycle(const OrbitWindow& w, int n);

// Random window built backward from a uniform top point x_F, with a uniform admissible
// backward word; the result has backward depth `depth` and horizon `fwd_len`.
// Rejects draws whose cached points approach the singular set.
OrbitWindow random_window(MapPtr map, std::mt19937_64& rng, int depth, int fwd_len);

}  // namespace symdyn
