#pragma once

#include <stdexcept>
#include <string>

namespace ubd {

// Failure categories carried by every ubd exception so callers and tests
// can dispatch on the kind without parsing messages.
enum class ErrorKind {
    Domain,          // argument outside the physical domain (e.g. p <= 0)
    State,           // inconsistent conservative/primitive state
    Boundary,        // boundary closure has no admissible solution
    Integration,     // time integrator failed (step underflow etc.)
    Reconstruction,  // backward solve violated a profile invariant
    Observability,   // measurement horizon too short for the requested estimate
    Characteristic,  // characteristic line degenerate (vG <= 0, collision)
    Prediction,      // forward prediction violated a profile invariant
    TargetInfeasible,// target trajectory solve failed after retries
    Ordering,        // non-monotone timestamps
    Underdetermined, // not enough independent data for a fit
    Validation       // configuration / input file invalid
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::State: return "state";
        case ErrorKind::Boundary: return "boundary";
        case ErrorKind::Integration: return "integration";
        case ErrorKind::Reconstruction: return "reconstruction";
        case ErrorKind::Observability: return "observability";
        case ErrorKind::Characteristic: return "characteristic";
        case ErrorKind::Prediction: return "prediction";
        case ErrorKind::TargetInfeasible: return "target-infeasible";
        case ErrorKind::Ordering: return "ordering";
        case ErrorKind::Underdetermined: return "underdetermined";
        case ErrorKind::Validation: return "validation";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace ubd
