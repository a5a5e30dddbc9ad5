#pragma once

#include <stdexcept>
#include <string>

namespace stableop {

/// Error taxonomy shared by the library and the CLI.  Every failure mode that
/// callers are expected to handle maps onto one of these types; anything else
/// escaping the library is a bug.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spectral measure violates the ellipticity lower bound (support concentrated
/// on a hyperplane, or total mass numerically zero).
struct DegenerateMeasure : Error {
  using Error::Error;
};

/// Order s outside (0,1), or an operation that additionally restricts s
/// (e.g. first-moment requirements) called with an inadmissible order.
struct InvalidOrder : Error {
  using Error::Error;
};

/// Requested grid cannot represent the kernel/field to the required fidelity.
struct ResolutionError : Error {
  using Error::Error;
};

/// Adaptive radial quadrature could not certify the requested tolerance
/// within its evaluation budget.
struct QuadratureBudgetExceeded : Error {
  using Error::Error;
};

/// Collocation matrix factorization failed or is numerically singular.
struct SingularSystem : Error {
  using Error::Error;
};

/// Geometric query outside the supported region (e.g. boundary band touching
/// the unresolved collar next to the boundary).
struct DomainError : Error {
  using Error::Error;
};

/// Malformed configuration input (JSON schema violations, bad CLI arguments).
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace stableop
