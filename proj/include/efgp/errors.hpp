#pragma once

#include <stdexcept>
#include <string>

namespace efgp {

/// A requested size exceeds a configured memory cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A theorem hypothesis does not hold for the given parameters; the message
/// names the failing inequality.
class HypothesisError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace efgp
