#include "riplab/error.hpp"

namespace riplab {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NotIrreducible: return "NotIrreducible";
    case Errc::NotReversible: return "NotReversible";
    case Errc::BadDiagonal: return "BadDiagonal";
    case Errc::BadInput: return "BadInput";
    case Errc::Overflow: return "Overflow";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::EmptySite: return "EmptySite";
    case Errc::SameSite: return "SameSite";
    case Errc::BadParameter: return "BadParameter";
    case Errc::SolverDiverged: return "SolverDiverged";
    case Errc::BadSets: return "BadSets";
    case Errc::HorizonExceeded: return "HorizonExceeded";
    case Errc::ScaleNotApplicable: return "ScaleNotApplicable";
    case Errc::BadSpec: return "BadSpec";
    case Errc::BadWeights: return "BadWeights";
    case Errc::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace riplab
