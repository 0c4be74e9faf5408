#ifndef TMOTIVE_ERRORS_HPP
#define TMOTIVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tmotive {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Division where the divisor has no certified nonzero digit.
struct DivisionByZeroAtPrecision : Error {
    explicit DivisionByZeroAtPrecision(const std::string& msg) : Error(msg) {}
};

// A decision (pivot choice, equality, certificate) would depend on digits
// beyond the stored precision.
struct InsufficientPrecision : Error {
    explicit InsufficientPrecision(const std::string& msg) : Error(msg) {}
};

// Series tail could not be certified below the requested precision.
struct TailNotConvergent : Error {
    explicit TailNotConvergent(const std::string& msg) : Error(msg) {}
};

// Newton polygon of an additive series has no segment of the requested slope.
struct NoSuchSlope : Error {
    explicit NoSuchSlope(const std::string& msg) : Error(msg) {}
};

// Fixed-point refinement failed to contract.
struct ContractionFailure : Error {
    explicit ContractionFailure(const std::string& msg) : Error(msg) {}
};

// Argument lies outside the certified convergence region of a logarithm.
struct OutsideLogDomain : Error {
    explicit OutsideLogDomain(const std::string& msg) : Error(msg) {}
};

// Argument lies outside the certified contraction neighbourhood.
struct OutsideNeighborhood : Error {
    explicit OutsideNeighborhood(const std::string& msg) : Error(msg) {}
};

// A parameter that must be nonzero (at precision) is zero.
struct ZeroParameter : Error {
    explicit ZeroParameter(const std::string& msg) : Error(msg) {}
};

// The head block of a basis is not invertible at precision.
struct SingularHead : Error {
    explicit SingularHead(const std::string& msg) : Error(msg) {}
};

// Input matrices do not have one of the supported shapes.
struct ShapeError : Error {
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// The bounded semilinear solver met an equation form outside its catalogue.
struct SolverIncomplete : Error {
    explicit SolverIncomplete(const std::string& msg) : Error(msg) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& msg) : Error(msg) {}
};

} // namespace tmotive

#endif
