#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace distfit {

struct SimplexOptions {
    std::size_t max_evaluations = 20000;
    // Stop when 2|f_worst - f_best| <= tolerance * (|f_worst| + |f_best|) + 1e-300.
    double tolerance = 1e-9;
};

struct SimplexResult {
    std::vector<double> point;
    double value;
    std::size_t evaluations;
    bool converged;
};

using Objective = std::function<double(std::span<const double>)>;

// Derivative-free minimization. NaN objective values count as +inf, so an
// objective may return +inf to mark infeasible points.
SimplexResult nelder_mead(const Objective& objective, std::vector<double> start, std::span<const double> steps,
                          const SimplexOptions& options = {});

}  // namespace distfit
