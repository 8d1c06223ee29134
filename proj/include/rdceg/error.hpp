#pragma once

#include <stdexcept>
#include <string>

namespace rdceg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trees and graphs: cycles, self-loops, pruning that empties the root.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A staging, clustering or position partition that does not fit the tree.
class StagingError : public Error {
 public:
  using Error::Error;
};

// Invalid numeric arguments (negative times, nonpositive parameters).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Bad user input: configs, hyperstages, query literals.  The CLI maps this to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A data record that cannot be replayed on the tree.  `line` is 1-based, 0 when unknown.
class DataError : public Error {
 public:
  DataError(const std::string& what, long line = 0)
      : Error{line > 0 ? "line " + std::to_string(line) + ": " + what : what}, line_{line} {}
  auto line() const -> long { return line_; }

 private:
  long line_;
};

}  // namespace rdceg
