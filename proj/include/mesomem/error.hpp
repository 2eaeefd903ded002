#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mesomem {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A physical parameter is outside the admissible domain (e.g. c*sqrt(eps) >= 1).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Two fields that must live on the same grid do not.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// nu . theta <= 0 at a curve node.
class TransversalityError : public Error {
public:
    TransversalityError(std::size_t node, double alignment)
        : Error("transversality violated at node " + std::to_string(node) +
                " (nu.theta = " + std::to_string(alignment) + ")"),
          node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// The stacked mass exceeds the focal capacity of a ray (negative discriminant).
class RayOverrun : public Error {
public:
    using Error::Error;
};

/// Input curve has zero length, repeated points or too few samples.
class DegenerateCurve : public Error {
public:
    using Error::Error;
};

/// An iterative method produced a non-finite value or left its admissible region.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A perturbed curve lost immersion (|gamma'| <= 0 somewhere).
class ImmersionError : public Error {
public:
    using Error::Error;
};

/// Malformed input file or shape specification.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace mesomem
