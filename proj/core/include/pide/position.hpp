#pragma once

#include <compare>
#include <cstddef>

namespace pide {

/// A location in a decoded document. Offsets count symbols, not bytes.
struct Position {
  std::size_t offset = 0;
  std::size_t line = 1;    // 1-based
  std::size_t column = 1;  // 1-based, in symbols

  friend bool operator==(const Position&, const Position&) = default;
  friend auto operator<=>(const Position& a, const Position& b) { return a.offset <=> b.offset; }
};

/// Half-open symbol range [start, stop).
struct Range {
  Position start;
  Position stop;

  [[nodiscard]] std::size_t length() const { return stop.offset - start.offset; }
  [[nodiscard]] bool empty() const { return stop.offset == start.offset; }
  [[nodiscard]] bool contains(std::size_t offset) const {
    return start.offset <= offset && offset < stop.offset;
  }
  [[nodiscard]] bool contains(const Range& other) const {
    return start.offset <= other.start.offset && other.stop.offset <= stop.offset;
  }
  [[nodiscard]] bool overlaps(const Range& other) const {
    return start.offset < other.stop.offset && other.start.offset < stop.offset;
  }

  friend bool operator==(const Range&, const Range&) = default;
};

}  // namespace pide
