#pragma once

#include <stdexcept>
#include <string>

namespace simlik {

struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BudgetExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteObjective : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularJ2 : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BoundaryTooClose : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct EmptyDataset : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IntractableMarginal : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace simlik
