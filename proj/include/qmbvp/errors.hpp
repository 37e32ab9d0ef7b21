#pragma once

#include <stdexcept>
#include <string>

namespace qmbvp {

/// Dimension or grid mismatch between operands.
class ShapeError : public std::invalid_argument {
public:
    explicit ShapeError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// An IVP trajectory exceeded the blow-up threshold.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(const std::string& msg, int node, double time)
        : std::runtime_error(msg), first_bad_node(node), first_bad_time(time) {}
    int first_bad_node;
    double first_bad_time;
};

/// Iterates of the monotone sweep escaped the divergence guard.
class UnboundedBelowError : public std::runtime_error {
public:
    explicit UnboundedBelowError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A caller-supplied object violates a documented precondition.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& msg) : std::invalid_argument(msg) {}
};

}  // namespace qmbvp
