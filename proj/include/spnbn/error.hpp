#pragma once

#include <stdexcept>
#include <string>

namespace spnbn {

// Input/contract violations (bad files, bad arguments, invalid models).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A check that the toolkit itself guarantees failed; indicates a bug.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spnbn
