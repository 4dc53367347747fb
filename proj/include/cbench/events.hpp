#pragma once

#include <functional>
#include <vector>

namespace cbench {

/// Left-open, right-closed interval (lo, hi]; lo may be −∞ and hi may be +∞ (then (lo, ∞)).
struct HalfOpenInterval {
    double lo;
    double hi;
    friend bool operator==(const HalfOpenInterval&, const HalfOpenInterval&) = default;
};

/// Finite disjoint union of (lo, hi] intervals. The family is closed under complement, which
/// makes it the natural event algebra for order-statistic cells (y_(k), y_(k+1)].
class EventSet {
public:
    EventSet() = default;
    /// Drops empty pieces, sorts, and merges overlapping or touching pieces.
    explicit EventSet(std::vector<HalfOpenInterval> pieces);

    static EventSet whole_line();
    static EventSet empty_set() { return {}; }
    /// (−∞, x].
    static EventSet at_most(double x);

    [[nodiscard]] const std::vector<HalfOpenInterval>& pieces() const noexcept { return pieces_; }
    [[nodiscard]] bool empty() const noexcept { return pieces_.empty(); }
    [[nodiscard]] bool contains(double y) const noexcept;
    /// True iff (lo, hi] ⊆ this set. A degenerate cell lo == hi is read as the point {lo}.
    [[nodiscard]] bool covers(double lo, double hi) const noexcept;
    /// True iff (lo, hi] meets this set. A degenerate cell lo == hi is read as the point {lo}.
    [[nodiscard]] bool meets(double lo, double hi) const noexcept;

    [[nodiscard]] EventSet complement() const;
    [[nodiscard]] EventSet intersect(const EventSet& other) const;

    /// Probability of the set under a right-continuous distribution function.
    [[nodiscard]] double probability(const std::function<double(double)>& cdf) const;

    friend bool operator==(const EventSet&, const EventSet&) = default;

private:
    std::vector<HalfOpenInterval> pieces_;
};

}  // namespace cbench
