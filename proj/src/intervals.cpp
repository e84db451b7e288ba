#include "cauchy_im/intervals.hpp"

#include "cauchy_im/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cauchy_im {

IntervalSet::IntervalSet(std::vector<Interval> parts) {
    for (const auto& p : parts) {
        if (std::isnan(p.lower) || std::isnan(p.upper) || p.lower > p.upper) {
            throw DomainError("IntervalSet: malformed interval");
        }
    }
    std::sort(parts.begin(), parts.end(), [](const Interval& x, const Interval& y) { return x.lower < y.lower; });
    for (const auto& p : parts) {
        if (!parts_.empty() && p.lower <= parts_.back().upper) {
            parts_.back().upper = std::max(parts_.back().upper, p.upper);
        } else {
            parts_.push_back(p);
        }
    }
}

bool IntervalSet::contains(double x) const noexcept {
    return std::any_of(parts_.begin(), parts_.end(), [x](const Interval& p) { return p.contains(x); });
}

Interval IntervalSet::hull() const {
    if (parts_.empty()) {
        throw DomainError("hull of an empty IntervalSet");
    }
    return {parts_.front().lower, parts_.back().upper};
}

IntervalSet IntervalSet::complement(const Interval& universe) const {
    std::vector<Interval> out;
    double cursor = universe.lower;
    bool cursor_covered = false;
    for (const auto& p : intersect(universe).parts_) {
        if (p.lower > cursor) {
            out.push_back({cursor, p.lower});
        }
        cursor = p.upper;
        cursor_covered = true;
    }
    if (cursor < universe.upper || !cursor_covered) {
        out.push_back({cursor, universe.upper});
    }
    return IntervalSet(std::move(out));
}

IntervalSet IntervalSet::intersect(const Interval& window) const {
    std::vector<Interval> out;
    for (const auto& p : parts_) {
        const double lo = std::max(p.lower, window.lower);
        const double hi = std::min(p.upper, window.upper);
        if (lo <= hi) {
            out.push_back({lo, hi});
        }
    }
    return IntervalSet(std::move(out));
}

bool IntervalSet::intersects(const IntervalSet& other) const noexcept {
    for (const auto& p : parts_) {
        for (const auto& q : other.parts_) {
            if (std::max(p.lower, q.lower) <= std::min(p.upper, q.upper)) {
                return true;
            }
        }
    }
    return false;
}

bool IntervalSet::subset_of(const IntervalSet& other) const noexcept {
    return std::all_of(parts_.begin(), parts_.end(), [&](const Interval& p) {
        return std::any_of(other.parts_.begin(), other.parts_.end(),
                           [&](const Interval& q) { return q.lower <= p.lower && p.upper <= q.upper; });
    });
}

}  // namespace cauchy_im
