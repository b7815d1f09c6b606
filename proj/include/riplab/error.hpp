#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace riplab {

// Every failure the library reports carries one of these codes; the name of
// the code is the first token of what().
enum class Errc {
  NotIrreducible,
  NotReversible,
  BadDiagonal,
  BadInput,
  Overflow,
  OutOfRange,
  EmptySite,
  SameSite,
  BadParameter,
  SolverDiverged,
  BadSets,
  HorizonExceeded,
  ScaleNotApplicable,
  BadSpec,
  BadWeights,
  ParseError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace riplab
