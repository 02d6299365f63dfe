#pragma once

#include <functional>
#include <vector>

#include "simlik/models.hpp"

namespace simlik {

struct OptimizerConfig {
    enum class Method { golden_section, nelder_mead };

    Method method = Method::golden_section;
    double x_tol = 1e-8;
    double f_tol = 1e-10;
    int max_iter = 10000;
    int multistart_count = 5;

    bool valid() const {
        return x_tol > 0 && f_tol > 0 && max_iter >= 1 && multistart_count >= 1;
    }
};

struct IterationRecord {
    int iteration = 0;
    double best_value = 0.0;
};

struct MaximizeResult {
    Vec argmax;
    double value = 0.0;
    std::vector<IterationRecord> trace;  // best-so-far, non-decreasing
};

using Objective = std::function<double(const Vec&)>;

/// Deterministic maximization over a compact box. Golden section for 1D,
/// Nelder-Mead with multistarts otherwise. Objectives must be deterministic;
/// stochastic callers freeze their draws first.
MaximizeResult maximize(const Objective& objective, const Box& box, const OptimizerConfig& cfg);

}  // namespace simlik
