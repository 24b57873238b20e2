#include "tempoq/interval.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace tempoq {

namespace {

std::int64_t parse_int(std::string_view text, std::size_t& pos) {
  std::size_t start = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    ++pos;
  }
  if (pos == start) {
    throw std::invalid_argument("interval: expected number at offset " +
                                std::to_string(start));
  }
  return std::stoll(std::string(text.substr(start, pos - start)));
}

void skip_ws(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) {
    ++pos;
  }
}

}  // namespace

TimePoint::TimePoint(std::int64_t ticks) : ticks_(ticks) {
  if (ticks < 0) {
    throw std::invalid_argument("TimePoint: value must be non-negative");
  }
}

std::int64_t TimePoint::ticks() const {
  if (is_infinite()) {
    throw std::logic_error("TimePoint: infinite point has no tick count");
  }
  return ticks_;
}

std::string TimePoint::to_string() const {
  return is_infinite() ? "inf" : std::to_string(ticks_);
}

Interval::Interval(TimePoint lower, bool lower_closed, TimePoint upper,
                   bool upper_closed)
    : lower_(lower),
      upper_(upper),
      lower_closed_(lower_closed),
      upper_closed_(upper_closed) {
  if (lower.is_infinite()) {
    throw std::invalid_argument("Interval: lower bound must be finite");
  }
  if (upper.is_infinite()) {
    upper_closed_ = true;  // [t, inf]
    return;
  }
  bool non_empty = lower < upper || (lower == upper && lower_closed && upper_closed);
  if (!non_empty) {
    throw std::invalid_argument("Interval: empty interval");
  }
}

Interval Interval::closed(std::int64_t lo, std::int64_t hi) {
  return Interval(TimePoint(lo), true, TimePoint(hi), true);
}

Interval Interval::point(std::int64_t t) { return closed(t, t); }

Interval Interval::at_least(std::int64_t lo) {
  return Interval(TimePoint(lo), true, TimePoint::infinity(), true);
}

Interval Interval::from_span(PosSpan span) {
  if (span.lo < 0 || span.lo > span.hi) {
    throw std::invalid_argument("Interval: malformed position span");
  }
  TimePoint lower(span.lo % 2 == 0 ? span.lo / 2 : (span.lo - 1) / 2);
  bool lower_closed = span.lo % 2 == 0;
  if (span.hi == kPosInfinity) {
    return Interval(lower, lower_closed, TimePoint::infinity(), true);
  }
  TimePoint upper(span.hi % 2 == 0 ? span.hi / 2 : (span.hi + 1) / 2);
  bool upper_closed = span.hi % 2 == 0;
  return Interval(lower, lower_closed, upper, upper_closed);
}

PosSpan Interval::span() const {
  PosSpan s;
  s.lo = 2 * lower_.ticks() + (lower_closed_ ? 0 : 1);
  s.hi = upper_.is_infinite() ? kPosInfinity
                              : 2 * upper_.ticks() - (upper_closed_ ? 0 : 1);
  return s;
}

bool Interval::contains(TimePoint t) const {
  if (t.is_infinite()) {
    return upper_.is_infinite();
  }
  PosSpan s = span();
  std::int64_t p = 2 * t.ticks();
  return s.lo <= p && p <= s.hi;
}

std::string Interval::to_string() const {
  std::string out;
  out += lower_closed_ ? '[' : '(';
  out += lower_.to_string();
  out += ',';
  out += upper_.to_string();
  out += upper_.is_infinite() || upper_closed_ ? ']' : ')';
  return out;
}

bool adjacent(const Interval& a, const Interval& b) {
  PosSpan x = a.span();
  PosSpan y = b.span();
  if (x.lo > y.lo) {
    std::swap(x, y);
  }
  if (x.hi == kPosInfinity) {
    return true;
  }
  return y.lo <= x.hi + 1;
}

std::vector<PosSpan> normalize_spans(std::vector<PosSpan> spans) {
  std::erase_if(spans, [](const PosSpan& s) { return s.lo > s.hi; });
  std::sort(spans.begin(), spans.end(), [](const PosSpan& a, const PosSpan& b) {
    return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
  });
  std::vector<PosSpan> out;
  for (const PosSpan& s : spans) {
    if (!out.empty() && (out.back().hi == kPosInfinity ||
                         s.lo <= out.back().hi + 1)) {
      out.back().hi = std::max(out.back().hi, s.hi);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

FragmentedInterval::FragmentedInterval(Interval part) : parts_{part} {}

FragmentedInterval::FragmentedInterval(const std::vector<Interval>& parts) {
  std::vector<PosSpan> spans;
  spans.reserve(parts.size());
  for (const Interval& p : parts) {
    spans.push_back(p.span());
  }
  *this = from_positions(std::move(spans));
}

FragmentedInterval FragmentedInterval::universe() {
  return FragmentedInterval(Interval::at_least(0));
}

FragmentedInterval FragmentedInterval::from_positions(
    std::vector<PosSpan> spans) {
  FragmentedInterval out;
  for (const PosSpan& s : normalize_spans(std::move(spans))) {
    out.parts_.push_back(Interval::from_span(s));
  }
  return out;
}

std::vector<PosSpan> FragmentedInterval::positions() const {
  std::vector<PosSpan> out;
  out.reserve(parts_.size());
  for (const Interval& p : parts_) {
    out.push_back(p.span());
  }
  return out;
}

bool FragmentedInterval::contains(TimePoint t) const {
  if (t.is_infinite()) {
    return !parts_.empty() && parts_.back().upper().is_infinite();
  }
  return contains_position(2 * t.ticks());
}

bool FragmentedInterval::contains_position(std::int64_t pos) const {
  for (const Interval& p : parts_) {
    PosSpan s = p.span();
    if (pos < s.lo) {
      return false;
    }
    if (pos <= s.hi) {
      return true;
    }
  }
  return false;
}

TimePoint FragmentedInterval::min_lower() const {
  if (parts_.empty()) {
    throw std::logic_error("FragmentedInterval: empty set has no lower bound");
  }
  return parts_.front().lower();
}

std::string FragmentedInterval::to_string() const {
  if (parts_.empty()) {
    return "{}";
  }
  std::string out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i > 0) {
      out += " ∪ ";
    }
    out += parts_[i].to_string();
  }
  return out;
}

FragmentedInterval FragmentedInterval::from_string(std::string_view text) {
  std::size_t pos = 0;
  skip_ws(text, pos);
  if (pos + 2 <= text.size() && text.substr(pos, 2) == "{}") {
    pos += 2;
    skip_ws(text, pos);
    if (pos != text.size()) {
      throw std::invalid_argument("interval: trailing characters");
    }
    return FragmentedInterval();
  }
  std::vector<Interval> parts;
  while (true) {
    skip_ws(text, pos);
    if (pos >= text.size() || (text[pos] != '[' && text[pos] != '(')) {
      throw std::invalid_argument("interval: expected '[' or '(' at offset " +
                                  std::to_string(pos));
    }
    bool lower_closed = text[pos] == '[';
    ++pos;
    skip_ws(text, pos);
    std::int64_t lo = parse_int(text, pos);
    skip_ws(text, pos);
    if (pos >= text.size() || text[pos] != ',') {
      throw std::invalid_argument("interval: expected ','");
    }
    ++pos;
    skip_ws(text, pos);
    TimePoint upper;
    if (pos + 3 <= text.size() && text.substr(pos, 3) == "inf") {
      upper = TimePoint::infinity();
      pos += 3;
    } else {
      upper = TimePoint(parse_int(text, pos));
    }
    skip_ws(text, pos);
    if (pos >= text.size() || (text[pos] != ']' && text[pos] != ')')) {
      throw std::invalid_argument("interval: expected ']' or ')'");
    }
    bool upper_closed = text[pos] == ']';
    ++pos;
    parts.emplace_back(TimePoint(lo), lower_closed, upper, upper_closed);
    skip_ws(text, pos);
    if (pos == text.size()) {
      break;
    }
    // UTF-8 union sign, three bytes.
    if (text.substr(pos, 3) == "∪") {
      pos += 3;
      continue;
    }
    throw std::invalid_argument("interval: expected union separator at offset " +
                                std::to_string(pos));
  }
  return FragmentedInterval(parts);
}

FragmentedInterval intersect(const FragmentedInterval& a,
                             const FragmentedInterval& b) {
  std::vector<PosSpan> xs = a.positions();
  std::vector<PosSpan> ys = b.positions();
  std::vector<PosSpan> out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < xs.size() && j < ys.size()) {
    PosSpan s{std::max(xs[i].lo, ys[j].lo), std::min(xs[i].hi, ys[j].hi)};
    if (s.lo <= s.hi) {
      out.push_back(s);
    }
    if (xs[i].hi <= ys[j].hi) {
      ++i;
    } else {
      ++j;
    }
  }
  return FragmentedInterval::from_positions(std::move(out));
}

FragmentedInterval union_of(const FragmentedInterval& a,
                            const FragmentedInterval& b) {
  std::vector<PosSpan> spans = a.positions();
  std::vector<PosSpan> ys = b.positions();
  spans.insert(spans.end(), ys.begin(), ys.end());
  return FragmentedInterval::from_positions(std::move(spans));
}

FragmentedInterval difference(const FragmentedInterval& a,
                              const FragmentedInterval& b) {
  std::vector<PosSpan> out;
  std::vector<PosSpan> ys = b.positions();
  for (const PosSpan& x : a.positions()) {
    std::int64_t cur = x.lo;
    bool exhausted = false;
    for (const PosSpan& y : ys) {
      if (y.hi < cur) {
        continue;
      }
      if (y.lo > x.hi) {
        break;
      }
      if (y.lo > cur) {
        out.push_back(PosSpan{cur, y.lo - 1});
      }
      if (y.hi == kPosInfinity || y.hi >= x.hi) {
        exhausted = true;
        break;
      }
      cur = std::max(cur, y.hi + 1);
      if (cur > x.hi) {
        exhausted = true;
        break;
      }
    }
    if (!exhausted && cur <= x.hi) {
      out.push_back(PosSpan{cur, x.hi});
    }
  }
  return FragmentedInterval::from_positions(std::move(out));
}

}  // namespace tempoq
