#include "symdyn/natural_extension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "symdyn/errors.hpp"

namespace symdyn {

namespace {

int pmod(int a, int p) {
    const int r = a % p;
    return r < 0 ? r + p : r;
}

void fill_forward(WindowData& d, int from_index, int to_horizon) {
    const MapModel& m = *d.map;
    const int depth = d.depth();
    d.pts.resize(static_cast<std::size_t>(depth + to_horizon + 1));
    d.dfs.resize(static_cast<std::size_t>(depth + to_horizon));
    d.brs.resize(static_cast<std::size_t>(depth + to_horizon));
    for (int n = from_index; n < to_horizon; ++n) {
        const auto i = static_cast<std::size_t>(n + depth);
        const Branch br = m.branch(m.branch_at(d.pts[i]));
        d.brs[i] = br.id;
        d.dfs[i] = br.dfwd(d.pts[i]);
        d.pts[i + 1] = br.fwd(d.pts[i]);
        if (!m.in_domain(d.pts[i + 1]) || m.near_singular(d.pts[i + 1]))
            throw SingularPoint("forward iterate approaches the singular set");
    }
    d.horizon = to_horizon;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    char buf[40];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", v[i]);
        out += buf;
    }
    return out;
}

}  // namespace

OrbitWindow OrbitWindow::make(MapPtr map, double x0, const std::vector<BranchId>& back, int fwd_len) {
    if (fwd_len < 0) throw std::invalid_argument("negative forward horizon");
    const MapModel& m = *map;
    auto d = std::make_shared<WindowData>();
    d->map = map;
    d->anchor = x0;
    d->anchor_back = back;
    const int depth = d->depth();
    d->pts.assign(static_cast<std::size_t>(depth + 1), 0.0);
    d->dfs.assign(static_cast<std::size_t>(depth), 0.0);
    d->brs.assign(static_cast<std::size_t>(depth), 0);
    if (!m.in_domain(x0) || m.near_singular(x0)) throw SingularPoint("window base point is singular");
    d->pts[static_cast<std::size_t>(depth)] = x0;
    for (int k = 1; k <= depth; ++k) {
        const auto i = static_cast<std::size_t>(depth - k);
        const Branch br = m.branch(back[static_cast<std::size_t>(k - 1)]);
        const double y = d->pts[i + 1];
        if (y < br.img_lo() || y > br.img_hi()) throw SingularPoint("branch word not admissible");
        const double xp = br.inv(y);
        if (!br.contains(xp) || !m.in_domain(xp) || m.near_singular(xp))
            throw SingularPoint("backward point approaches the singular set");
        d->pts[i] = xp;
        d->brs[i] = br.id;
        d->dfs[i] = br.dfwd(xp);
    }
    fill_forward(*d, 0, fwd_len);
    OrbitWindow w;
    w.d_ = std::move(d);
    w.fwd_len_ = fwd_len;
    return w;
}

OrbitWindow OrbitWindow::backward_built(MapPtr map, double x_top, const std::vector<BranchId>& back,
                                        int fwd_len) {
    if (static_cast<int>(back.size()) < fwd_len) throw WindowExhausted("branch word shorter than horizon");
    OrbitWindow w = make(std::move(map), x_top, back, 0);
    w.origin_ = -fwd_len;
    w.fwd_len_ = fwd_len;
    return w;
}

OrbitWindow OrbitWindow::periodic_from_word(MapPtr map, const std::vector<BranchId>& word, int fwd_len) {
    const MapModel& m = *map;
    const std::size_t p = word.size();
    if (p == 0) throw std::invalid_argument("empty word");
    std::vector<Branch> brs;
    for (BranchId b : word) brs.push_back(m.branch(b));
    // x_0 in dom(word[0]); x_p = x_0. Iterate x_0 <- g_{w0} o ... o g_{w_{p-1}}(x_0).
    auto pull = [&](double z) {
        for (std::size_t k = p; k-- > 0;) {
            const Branch& br = brs[k];
            z = br.inv(std::clamp(z, br.img_lo(), br.img_hi()));
        }
        return z;
    };
    double z = 0.5 * (brs[0].lo + brs[0].hi);
    for (int it = 0; it < 4000; ++it) {
        const double nz = pull(z);
        if (nz == z) break;
        z = nz;
    }
    std::vector<double> cycle(p);
    cycle[0] = z;
    double y = z;
    for (std::size_t k = p; k-- > 1;) {
        y = brs[k].inv(y);
        cycle[k] = y;
    }
    if (brs[0].inv(cycle.size() > 1 ? cycle[1] : z) != z)
        throw SingularPoint("no exact floating-point cycle for branch word");
    OrbitWindow w = periodic(std::move(map), cycle, fwd_len);
    for (std::size_t k = 0; k < p; ++k)
        if (w.d_->cycle_br[k] != word[k]) throw SingularPoint("cycle point left its branch");
    return w;
}

OrbitWindow OrbitWindow::periodic(MapPtr map, const std::vector<double>& cycle, int fwd_len) {
    if (cycle.empty()) throw std::invalid_argument("empty cycle");
    const MapModel& m = *map;
    auto d = std::make_shared<WindowData>();
    d->map = map;
    d->cycle = cycle;
    d->anchor = cycle[0];
    for (double c : cycle) {
        if (!m.in_domain(c) || m.near_singular(c)) throw SingularPoint("cycle point is singular");
        const Branch br = m.branch(m.branch_at(c));
        d->cycle_br.push_back(br.id);
        d->cycle_df.push_back(br.dfwd(c));
    }
    OrbitWindow w;
    w.d_ = std::move(d);
    w.fwd_len_ = fwd_len;
    return w;
}

double OrbitWindow::x(int n) const {
    if (is_periodic()) return d_->cycle[static_cast<std::size_t>(pmod(origin_ + n, period()))];
    const int i = origin_ + n + d_->depth();
    if (i < 0 || i >= static_cast<int>(d_->pts.size())) throw std::out_of_range("window index");
    return d_->pts[static_cast<std::size_t>(i)];
}

double OrbitWindow::df(int n) const {
    if (is_periodic()) return d_->cycle_df[static_cast<std::size_t>(pmod(origin_ + n, period()))];
    const int i = origin_ + n + d_->depth();
    if (i < 0 || i >= static_cast<int>(d_->dfs.size())) throw std::out_of_range("window index");
    return d_->dfs[static_cast<std::size_t>(i)];
}

BranchId OrbitWindow::branch(int n) const {
    if (is_periodic()) return d_->cycle_br[static_cast<std::size_t>(pmod(origin_ + n, period()))];
    const int i = origin_ + n + d_->depth();
    if (i < 0 || i >= static_cast<int>(d_->brs.size())) throw std::out_of_range("window index");
    return d_->brs[static_cast<std::size_t>(i)];
}

int OrbitWindow::depth() const {
    if (is_periodic()) return kPeriodicDepth;
    return d_->depth() + origin_;
}

std::vector<BranchId> OrbitWindow::back_branches() const {
    const int n = is_periodic() ? period() : depth();
    std::vector<BranchId> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 1; k <= n; ++k) out.push_back(branch(-k));
    return out;
}

OrbitWindow OrbitWindow::shift(int k, int min_depth) const {
    if (k == 0) return *this;
    OrbitWindow w = *this;
    w.origin_ = origin_ + k;
    if (is_periodic()) {
        w.origin_ = pmod(w.origin_, period());
        return w;
    }
    if (w.depth() < min_depth || w.depth() < 0)
        throw WindowExhausted("shift by " + std::to_string(k) + " leaves backward depth " +
                              std::to_string(w.depth()));
    const int need = w.origin_ + fwd_len_;
    if (need > d_->horizon) {
        auto d = std::make_shared<WindowData>(*d_);
        fill_forward(*d, d_->horizon, need);
        w.d_ = std::move(d);
    }
    return w;
}

OrbitWindow OrbitWindow::recomputed() const {
    OrbitWindow w = is_periodic() ? periodic(d_->map, d_->cycle, fwd_len_)
                                  : make(d_->map, d_->anchor, d_->anchor_back, d_->horizon);
    w.origin_ = origin_;
    w.fwd_len_ = fwd_len_;
    return w;
}

bool OrbitWindow::same_cache(const OrbitWindow& o) const {
    return d_->pts == o.d_->pts && d_->dfs == o.d_->dfs && d_->brs == o.d_->brs &&
           d_->cycle == o.d_->cycle && origin_ == o.origin_;
}

bool OrbitWindow::agrees(const OrbitWindow& o, int lo, int hi) const {
    for (int n = lo; n <= hi; ++n)
        if (x(n) != o.x(n)) return false;
    return true;
}

std::string OrbitWindow::serialize() const {
    std::ostringstream os;
    char buf[40];
    os << "window v1";
    if (is_periodic()) {
        os << " cycle=" << join(d_->cycle);
    } else {
        std::snprintf(buf, sizeof buf, "%.17g", d_->anchor);
        os << " anchor=" << buf << " back=";
        for (std::size_t i = 0; i < d_->anchor_back.size(); ++i) os << (i ? "," : "") << d_->anchor_back[i];
        os << " horizon=" << d_->horizon;
    }
    os << " origin=" << origin_ << " F=" << fwd_len_;
    return os.str();
}

OrbitWindow OrbitWindow::deserialize(MapPtr map, const std::string& record) {
    std::istringstream in(record);
    std::string tok;
    in >> tok;
    if (tok != "window") throw std::invalid_argument("not a window record");
    in >> tok;
    if (tok != "v1") throw std::invalid_argument("unsupported window record version");
    std::vector<double> cycle;
    std::vector<BranchId> back;
    double anchor = 0;
    int horizon = 0, origin = 0, F = 0;
    bool has_cycle = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(s);
        while (std::getline(ss, cur, ',')) if (!cur.empty()) out.push_back(cur);
        return out;
    };
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad field: " + tok);
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "cycle") {
            has_cycle = true;
            for (auto& s : split(val)) cycle.push_back(std::stod(s));
        } else if (key == "anchor") anchor = std::stod(val);
        else if (key == "back") { for (auto& s : split(val)) back.push_back(std::stoi(s)); }
        else if (key == "horizon") horizon = std::stoi(val);
        else if (key == "origin") origin = std::stoi(val);
        else if (key == "F") F = std::stoi(val);
        else throw std::invalid_argument("unknown field: " + key);
    }
    OrbitWindow w = has_cycle ? periodic(map, cycle, F) : make(map, anchor, back, horizon);
    w.fwd_len_ = F;
    w.origin_ = has_cycle ? pmod(origin, w.period()) : origin;
    return w;
}

HatDistance hat_distance(const OrbitWindow& a, const OrbitWindow& b, int depth) {
    HatDistance h;
    for (int n = 0; n >= -depth; --n)
        h.value = std::max(h.value, std::ldexp(std::fabs(a.x(n) - b.x(n)), n));
    h.truncation = std::ldexp(a.map().hi - a.map().lo, -depth);
    return h;
}

LogReal cocycle(const OrbitWindow& w, int n) {
    int sign = 1;
    double lg = 0;
    if (n >= 0) {
        for (int k = 0; k < n; ++k) {
            const double d = w.df(k);
            if (d == 0.0) return LogReal::zero();
            sign *= d < 0 ? -1 : 1;
            lg += std::log(std::fabs(d));
        }
    } else {
        for (int k = -1; k >= n; --k) {
            const double d = w.df(k);
            sign *= d < 0 ? -1 : 1;
            lg -= std::log(std::fabs(d));
        }
    }
    return LogReal::from_log(lg, sign);
}

OrbitWindow random_window(MapPtr map, std::mt19937_64& rng, int depth, int fwd_len) {
    const MapModel& m = *map;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int nb = std::min(m.branch_count(), 16);
    depth += fwd_len;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        const double x0 = m.lo + (m.hi - m.lo) * U(rng);
        if (m.near_singular(x0)) continue;
        std::vector<BranchId> back;
        double y = x0;
        bool ok = true;
        for (int k = 0; k < depth && ok; ++k) {
            std::vector<BranchId> choices;
            for (int b = 0; b < nb; ++b) {
                const Branch br = m.branch(b);
                if (y < br.img_lo() || y > br.img_hi()) continue;
                const double xp = br.inv(y);
                if (br.contains(xp) && m.in_domain(xp) && !m.near_singular(xp)) choices.push_back(b);
            }
            if (choices.empty()) { ok = false; break; }
            std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
            const BranchId b = choices[pick(rng)];
            back.push_back(b);
            y = m.branch(b).inv(y);
        }
        if (!ok) continue;
        try {
            return OrbitWindow::backward_built(map, x0, back, fwd_len);
        } catch (const SingularPoint&) {
            continue;
        }
    }
    throw SingularPoint("could not draw a regular window");
}

}  // namespace symdyn
