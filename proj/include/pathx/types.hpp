#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pathx {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using PathId = std::int32_t;

inline constexpr NodeId kNoNode = -1;
inline constexpr EdgeId kNoEdge = -1;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A required file is absent or unreadable.
class MissingFileError : public Error {
 public:
  using Error::Error;
};

/// An id read from a dataset file does not resolve.
class DanglingIdError : public Error {
 public:
  using Error::Error;
};

/// A trajectory step has no corresponding graph edge.
class MissingEdgeError : public Error {
 public:
  using Error::Error;
};

/// Malformed file or message content.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Shape mismatch between related containers.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the documented domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathx
