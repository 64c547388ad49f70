#pragma once

#include <stdexcept>
#include <string>

namespace cardan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument values (empty key, density out of range, negative budget, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Array shapes that do not agree, or windows that fall outside an image.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A message does not fit into the writable slots of a grille.
class CapacityError : public Error {
 public:
  CapacityError(std::size_t requested, std::size_t available)
      : Error("message of " + std::to_string(requested) + " bits exceeds capacity of " +
              std::to_string(available) + " bits"),
        requested_(requested),
        available_(available) {}

  std::size_t requested() const noexcept { return requested_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::size_t requested_;
  std::size_t available_;
};

/// Unreadable, lossy, truncated or corrupted files and documents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Loss or gradient became NaN/Inf.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cardan
