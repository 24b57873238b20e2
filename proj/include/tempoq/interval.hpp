#ifndef TEMPOQ_INTERVAL_HPP
#define TEMPOQ_INTERVAL_HPP

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace tempoq {

/// Durations and timestamps are integer counts of a base time unit
/// (seconds in the healthcare scenario).
using Duration = std::int64_t;

/// A point on the non-negative time line, or infinity. Infinity compares
/// greater than every finite value and may only be used as an upper bound.
class TimePoint {
 public:
  constexpr TimePoint() = default;
  explicit TimePoint(std::int64_t ticks);

  static constexpr TimePoint infinity() {
    TimePoint t;
    t.ticks_ = kInfinityTicks;
    return t;
  }

  bool is_infinite() const { return ticks_ == kInfinityTicks; }

  /// Finite tick count; throws for the infinite point.
  std::int64_t ticks() const;

  friend constexpr auto operator<=>(TimePoint a, TimePoint b) = default;

  std::string to_string() const;

 private:
  static constexpr std::int64_t kInfinityTicks =
      std::numeric_limits<std::int64_t>::max();
  std::int64_t ticks_ = 0;
};

/// Interval endpoints live on a doubled integer grid ("positions"):
/// position 2t is the point t, position 2t+1 is the open segment (t, t+1).
/// Every set produced by the engine has integer endpoints, so the grid
/// represents them exactly and set operations reduce to integer sweeps.
inline constexpr std::int64_t kPosInfinity =
    std::numeric_limits<std::int64_t>::max();

/// Closed, non-empty span on the position grid. lo >= 0, lo <= hi,
/// hi may be kPosInfinity.
struct PosSpan {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  friend bool operator==(const PosSpan&, const PosSpan&) = default;
};

/// A single non-empty time interval with open/closed endpoint flags.
/// An infinite upper bound is normalized to closed ([t, inf]).
class Interval {
 public:
  Interval(TimePoint lower, bool lower_closed, TimePoint upper,
           bool upper_closed);

  static Interval closed(std::int64_t lo, std::int64_t hi);
  static Interval point(std::int64_t t);
  static Interval at_least(std::int64_t lo);  // [lo, inf]
  static Interval from_span(PosSpan span);

  TimePoint lower() const { return lower_; }
  TimePoint upper() const { return upper_; }
  bool lower_closed() const { return lower_closed_; }
  bool upper_closed() const { return upper_closed_; }

  PosSpan span() const;
  bool contains(TimePoint t) const;

  std::string to_string() const;

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  TimePoint lower_;
  TimePoint upper_;
  bool lower_closed_ = true;
  bool upper_closed_ = true;
};

/// True iff the set union of a and b is itself an interval: they overlap
/// or touch at a point contained in at least one of them.
bool adjacent(const Interval& a, const Interval& b);

/// Normalized finite union of disjoint, non-adjacent intervals sorted by
/// lower bound. The empty sequence is the empty set. Immutable value type.
class FragmentedInterval {
 public:
  FragmentedInterval() = default;
  FragmentedInterval(Interval part);  // NOLINT: deliberate implicit lift
  explicit FragmentedInterval(const std::vector<Interval>& parts);

  static FragmentedInterval universe();  // [0, inf]
  static FragmentedInterval from_positions(std::vector<PosSpan> spans);
  static FragmentedInterval from_string(std::string_view text);

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  std::vector<PosSpan> positions() const;
  bool contains(TimePoint t) const;
  bool contains_position(std::int64_t pos) const;

  /// Lower bound value of the first part; throws on the empty set.
  TimePoint min_lower() const;

  std::string to_string() const;

  friend bool operator==(const FragmentedInterval&,
                         const FragmentedInterval&) = default;

 private:
  std::vector<Interval> parts_;
};

FragmentedInterval intersect(const FragmentedInterval& a,
                             const FragmentedInterval& b);
FragmentedInterval union_of(const FragmentedInterval& a,
                            const FragmentedInterval& b);
/// Set difference a \ b. Removing an interior closed interval yields
/// half-open remainders.
FragmentedInterval difference(const FragmentedInterval& a,
                              const FragmentedInterval& b);

/// Sorted coalesced sweep over arbitrary spans; shared by the set ops.
std::vector<PosSpan> normalize_spans(std::vector<PosSpan> spans);

}  // namespace tempoq

#endif  // TEMPOQ_INTERVAL_HPP
