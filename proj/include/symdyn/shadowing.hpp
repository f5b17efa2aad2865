#pragma once

#include <string>
#include <vector>

#include "symdyn/coarse_grain.hpp"

namespace symdyn {

struct ShadowResult {
    int lo = 0, hi = 0;
    int base = 0;               // index playing the role of 0
    LogReal t0;                 // chart coordinate at base
    std::vector<LogReal> t;     // chart coordinate per index
    std::vector<LogReal> disp;  // shadowed coordinate minus chart center, per index
    std::vector<LogReal> err;   // width of the set of points consistent with the gpo, per index
    std::vector<LogReal> nested;  // |I_k| at base for k = 0 .. hi - base
    LogReal error_bound;        // err at base
    LogReal formula_bound;      // 2 p_base e^{-chi (hi - base) / 2}
    OrbitWindow point;          // chart center window at base; the shadowed point is point + disp

    const LogReal& t_at(int n) const { return t[static_cast<std::size_t>(n - lo)]; }
    const LogReal& disp_at(int n) const { return disp[static_cast<std::size_t>(n - lo)]; }
    const LogReal& err_at(int n) const { return err[static_cast<std::size_t>(n - lo)]; }
    std::string serialize() const;
};

// G from chart n to chart n-1; throws EdgeBroken when the chart domain conditions fail.
ChartLink gpo_link(const Gpo& g, int n);

// Throws EdgeBroken when the nested-interval property fails. `start` is the top chart coordinate.
ShadowResult shadow(const Gpo& g, const LogReal& start = LogReal::zero());

class UnstableInterval {
public:
    UnstableInterval(const Gpo& g, int index);
    LogReal half_width() const { return p_; }
    int index() const { return index_; }
    // Chart coordinates t_index, t_{index-1}, ..., t_lo obtained from t by t_{n-1} = G(t_n).
    std::vector<LogReal> backward(const LogReal& t) const;

private:
    std::vector<ChartLink> links_;
    LogReal p_;
    int index_ = 0;
};

// Forward data of x, backward branch word of y (truncated to depth), based at x's zeroth coordinate.
OrbitWindow bracket(const ShadowResult& x, const ShadowResult& y, int depth = 64);

struct InverseClause {
    std::string clause;
    bool pass = true;
    double worst = 0;   // log-ratio to the bound; pass iff < 0 (<= 0 for non-strict clauses)
    int witness = 0;    // index of the worst case
};

struct InverseReport {
    LogReal proxy_threshold;  // largest combined error bound used to accept the double coding
    LogReal worst_gap;        // largest observed shadow disagreement
    std::vector<InverseClause> clauses;
    bool recurrent1 = false, recurrent2 = false;
    std::string diagnostic;
    bool all_pass() const;
};

// Repeated vertex in each half of the coding window.
bool recurrence_proxy(const Gpo& g);

// Throws NotDoubleCoding when the shadows disagree beyond the combined error bounds.
InverseReport inverse_check(const Gpo& g1, const Gpo& g2);

}  // namespace symdyn
