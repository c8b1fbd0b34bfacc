#pragma once
#include <stdexcept>
#include <string>

namespace fracheat {

// Parameters outside the model's admissible range (CLI exit code 2).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A computation that could not reach its tolerance (CLI exit code 1).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace fracheat
