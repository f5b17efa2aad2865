#pragma once

#include <cmath>
#include <limits>
#include <string>

namespace symdyn {

// Signed real stored as (sign, log|x|). Zero has sign 0 and lg = -inf.
struct LogReal {
    int sign = 0;
    double lg = -std::numeric_limits<double>::infinity();

    static LogReal zero() { return {}; }
    static LogReal one() { return {1, 0.0}; }
    static LogReal from_log(double lg, int sign = 1) {
        if (sign == 0 || lg == -std::numeric_limits<double>::infinity()) return {};
        return {sign, lg};
    }
    static LogReal from_double(double x) {
        if (x == 0.0 || std::isnan(x)) return {};
        return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
    }

    bool is_zero() const { return sign == 0; }
    double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(lg); }
    double log_abs() const { return lg; }
    LogReal abs() const { return sign == 0 ? LogReal{} : LogReal{1, lg}; }
    LogReal operator-() const { return {-sign, lg}; }

    LogReal operator*(const LogReal& o) const {
        if (sign == 0 || o.sign == 0) return {};
        return {sign * o.sign, lg + o.lg};
    }
    LogReal operator/(const LogReal& o) const {
        if (sign == 0) return {};
        return {sign * o.sign, lg - o.lg};
    }
    LogReal operator+(const LogReal& o) const {
        if (sign == 0) return o;
        if (o.sign == 0) return *this;
        const double hi = std::max(lg, o.lg);
        const double lo = std::min(lg, o.lg);
        const int hs = lg >= o.lg ? sign : o.sign;
        if (sign == o.sign) return {sign, hi + std::log1p(std::exp(lo - hi))};
        if (lo == hi) return {};
        return {hs, hi + std::log1p(-std::exp(lo - hi))};
    }
    LogReal operator-(const LogReal& o) const { return *this + (-o); }

    LogReal pow(double e) const {
        if (sign == 0) return {};
        return {1, lg * e};
    }
};

// |a| < |b| style comparisons on magnitudes.
inline bool abs_less(const LogReal& a, const LogReal& b) {
    if (b.sign == 0) return false;
    if (a.sign == 0) return true;
    return a.lg < b.lg;
}

inline bool less(const LogReal& a, const LogReal& b) {
    if (a.sign != b.sign) return a.sign < b.sign;
    if (a.sign == 0) return false;
    return a.sign > 0 ? a.lg < b.lg : a.lg > b.lg;
}

// log(e^x + e^y)
inline double log_add(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity()) return y;
    if (y == -std::numeric_limits<double>::infinity()) return x;
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

std::string to_string(const LogReal& x);

}  // namespace symdyn
