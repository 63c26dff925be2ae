#pragma once

#include <stdexcept>
#include <string>

namespace wisq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A region or point escapes the domain it must live in.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The random atom profile vanished after moment projection; retry with another seed.
class DegenerateProfile : public Error {
 public:
  using Error::Error;
};

/// A verification suite refused to run because a hypothesis does not hold.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace wisq
