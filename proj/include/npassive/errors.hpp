#pragma once

#include <stdexcept>
#include <string>

namespace npassive {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range input.
struct InvalidInput : Error {
  using Error::Error;
};

// Occupation-vector enumeration would exceed the configured cap.
struct SizeGuardError : Error {
  using Error::Error;
};

// S(rho) < ln d0: no Gibbs state shares the entropy.
struct NoGibbsCounterpart : Error {
  using Error::Error;
};

// The state is outside the class a bound or lemma assumes.
struct HypothesisViolation : Error {
  using Error::Error;
};

// N <= R: the inverse bound carries no information.
struct VacuousBound : Error {
  using Error::Error;
};

// A rigorous bound was exceeded beyond tolerance.
struct BoundFalsified : Error {
  using Error::Error;
};

}  // namespace npassive
