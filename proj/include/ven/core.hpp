/**
 * @file core.hpp
 * @brief Identifier types and the error hierarchy shared by every ven module.
 */

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace ven {

/**
 * @brief Dense index wrapped in a tag type so junctions, arcs and routes
 * cannot be mixed up.
 */
template <typename Tag>
struct StrongId {
  std::uint32_t value{0};

  constexpr StrongId() = default;
  constexpr explicit StrongId(std::uint32_t v) : value(v) {}

  friend constexpr auto operator<=>(StrongId, StrongId) = default;
};

using JunctionId = StrongId<struct JunctionTag>;
using ArcId = StrongId<struct ArcTag>;
using RouteId = StrongId<struct RouteTag>;

inline constexpr std::uint32_t to_index(JunctionId id) { return id.value; }
inline constexpr std::uint32_t to_index(ArcId id) { return id.value; }
inline constexpr std::uint32_t to_index(RouteId id) { return id.value; }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed graph or route structure (disconnected arcs, loops, bad ids).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Internal data disagreeing with itself, e.g. a plan above its capacity.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Enumeration exceeded its configured safety cap.
class SizeOverflowError : public Error {
 public:
  SizeOverflowError(const std::string& what, std::size_t cap) : Error(what), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

/// Numerical failure inside the LP solver.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Scenario file violation, carrying the 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ven

template <typename Tag>
struct std::hash<ven::StrongId<Tag>> {
  std::size_t operator()(ven::StrongId<Tag> id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
