#pragma once

#include <stdexcept>
#include <string>

namespace cql {

// Data or contract violation surfaced to callers; the CLI maps these to exit
// code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Identical value-vectors carrying both training labels. The tree refuses to
// fit such inputs; callers choose how to resolve (the learner drops the
// offending negatives).
class LabelConflictError : public Error {
 public:
  LabelConflictError(const std::string& msg, std::size_t conflicts)
      : Error(msg), conflicts_(conflicts) {}
  std::size_t conflicts() const { return conflicts_; }

 private:
  std::size_t conflicts_;
};

// No reliable negatives could be produced, so no two-class tree can be fit.
class EmptyNegativesError : public Error {
 public:
  explicit EmptyNegativesError(const std::string& msg) : Error(msg) {}
};

}  // namespace cql
