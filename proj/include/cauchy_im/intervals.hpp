#pragma once

#include <limits>
#include <vector>

namespace cauchy_im {

/// Closed interval; endpoints may be infinite.
struct Interval {
    double lower;
    double upper;

    bool contains(double x) const noexcept { return lower <= x && x <= upper; }
    double width() const noexcept { return upper - lower; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint closed intervals, kept sorted and merged.
class IntervalSet {
public:
    IntervalSet() = default;
    explicit IntervalSet(std::vector<Interval> parts);

    static IntervalSet all() { return IntervalSet({{-kInf, kInf}}); }
    static IntervalSet point(double x) { return IntervalSet({{x, x}}); }

    const std::vector<Interval>& parts() const noexcept { return parts_; }
    bool empty() const noexcept { return parts_.empty(); }
    bool contains(double x) const noexcept;
    /// Smallest interval containing the set. Requires a non-empty set.
    Interval hull() const;

    /// Complement relative to `universe`, keeping shared boundary points (closure).
    IntervalSet complement(const Interval& universe) const;
    IntervalSet intersect(const Interval& window) const;
    bool intersects(const IntervalSet& other) const noexcept;
    bool subset_of(const IntervalSet& other) const noexcept;

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

    static constexpr double kInf = std::numeric_limits<double>::infinity();

private:
    std::vector<Interval> parts_;
};

}  // namespace cauchy_im
