#pragma once

#include <stdexcept>
#include <string>

namespace secopt {

/// Invalid numeric parameter (out of range, violated precondition).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point outside the problem domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Hard-pair construction failed (e.g. base functions never cross).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Stateful object driven out of order (feed before propose).
class ProtocolOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed caller input (empty query list, unparsable transcript).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adversary ball centers overlap.
class PackingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation not supported for this instance (e.g. sign oracle with d > 1).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace detail
}  // namespace secopt
