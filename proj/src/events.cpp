#include "cbench/events.hpp"

#include "cbench/errors.hpp"
#include "cbench/rational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cbench {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

EventSet::EventSet(std::vector<HalfOpenInterval> pieces) {
    for (const auto& p : pieces) {
        if (std::isnan(p.lo) || std::isnan(p.hi)) throw ParameterError("EventSet: NaN endpoint");
    }
    std::erase_if(pieces, [](const HalfOpenInterval& p) { return !(p.lo < p.hi); });
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.lo < b.lo; });
    for (const auto& p : pieces) {
        if (!pieces_.empty() && p.lo <= pieces_.back().hi) {
            pieces_.back().hi = std::max(pieces_.back().hi, p.hi);
        } else {
            pieces_.push_back(p);
        }
    }
}

EventSet EventSet::whole_line() { return EventSet({{-kInf, kInf}}); }

EventSet EventSet::at_most(double x) { return EventSet({{-kInf, x}}); }

bool EventSet::contains(double y) const noexcept {
    return std::any_of(pieces_.begin(), pieces_.end(), [y](const auto& p) { return p.lo < y && y <= p.hi; });
}

bool EventSet::covers(double lo, double hi) const noexcept {
    if (lo == hi) return contains(lo);
    return std::any_of(pieces_.begin(), pieces_.end(), [&](const auto& p) { return p.lo <= lo && hi <= p.hi; });
}

bool EventSet::meets(double lo, double hi) const noexcept {
    if (lo == hi) return contains(lo);
    return std::any_of(pieces_.begin(), pieces_.end(),
                       [&](const auto& p) { return std::max(lo, p.lo) < std::min(hi, p.hi); });
}

EventSet EventSet::complement() const {
    std::vector<HalfOpenInterval> out;
    double cursor = -kInf;
    for (const auto& p : pieces_) {
        if (cursor < p.lo) out.push_back({cursor, p.lo});
        cursor = p.hi;
    }
    if (cursor < kInf) out.push_back({cursor, kInf});
    return EventSet(std::move(out));
}

EventSet EventSet::intersect(const EventSet& other) const {
    std::vector<HalfOpenInterval> out;
    for (const auto& a : pieces_) {
        for (const auto& b : other.pieces_) {
            const double lo = std::max(a.lo, b.lo);
            const double hi = std::min(a.hi, b.hi);
            if (lo < hi) out.push_back({lo, hi});
        }
    }
    return EventSet(std::move(out));
}

double EventSet::probability(const std::function<double(double)>& cdf) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
        const double upper = p.hi == kInf ? 1.0 : cdf(p.hi);
        const double lower = p.lo == -kInf ? 0.0 : cdf(p.lo);
        total += upper - lower;
    }
    return std::clamp(total, 0.0, 1.0);
}

// Rational

namespace {

__extension__ using Wide = __int128;

Wide wide_gcd(Wide a, Wide b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        const Wide t = a % b;
        a = b;
        b = t;
    }
    return a;
}

Rational reduce(Wide num, Wide den) {
    if (den == 0) throw DomainError("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const Wide g = wide_gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    constexpr Wide lim = std::numeric_limits<std::int64_t>::max();
    if (num > lim || num < -lim || den > lim) throw std::overflow_error("Rational: result out of 64-bit range");
    return Rational(static_cast<std::int64_t>(num), static_cast<std::int64_t>(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw DomainError("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g > 1 ? num / g : num;
    den_ = g > 1 ? den / g : den;
}

std::string Rational::str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

Rational operator+(const Rational& a, const Rational& b) {
    return reduce(Wide{a.num_} * b.den_ + Wide{b.num_} * a.den_, Wide{a.den_} * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
    return reduce(Wide{a.num_} * b.den_ - Wide{b.num_} * a.den_, Wide{a.den_} * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
    return reduce(Wide{a.num_} * b.num_, Wide{a.den_} * b.den_);
}

bool operator<(const Rational& a, const Rational& b) { return Wide{a.num_} * b.den_ < Wide{b.num_} * a.den_; }

}  // namespace cbench
