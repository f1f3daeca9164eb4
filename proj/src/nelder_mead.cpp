#include "distfit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "distfit/error.hpp"

namespace distfit {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Vertex {
    std::vector<double> x;
    double f;
};

}  // namespace

SimplexResult nelder_mead(const Objective& objective, std::vector<double> start, std::span<const double> steps,
                          const SimplexOptions& options) {
    const std::size_t dim = start.size();
    if (dim == 0) throw DomainError("nelder_mead: empty start point");
    if (steps.size() != dim) throw DomainError("nelder_mead: step vector length mismatch");

    std::size_t evaluations = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evaluations;
        const double f = objective(x);
        return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
    };

    std::vector<Vertex> simplex;
    simplex.reserve(dim + 1);
    simplex.push_back({start, eval(start)});
    for (std::size_t i = 0; i < dim; ++i) {
        auto x = start;
        x[i] += steps[i];
        simplex.push_back({x, eval(x)});
    }

    // Stable ordering keeps runs bit-reproducible when values tie.
    std::vector<std::size_t> order(dim + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return simplex[a].f < simplex[b].f; });
        std::vector<Vertex> sorted;
        sorted.reserve(simplex.size());
        for (std::size_t i : order) sorted.push_back(std::move(simplex[i]));
        simplex = std::move(sorted);
    };

    auto point_along = [&](const std::vector<double>& centroid, const std::vector<double>& through, double t) {
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = centroid[j] + t * (through[j] - centroid[j]);
        return x;
    };

    bool converged = false;
    sort_simplex();
    while (evaluations < options.max_evaluations) {
        const double f_best = simplex.front().f;
        const double f_worst = simplex.back().f;
        if (std::isfinite(f_worst) &&
            2.0 * std::fabs(f_worst - f_best) <= options.tolerance * (std::fabs(f_worst) + std::fabs(f_best)) + 1e-300) {
            converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].x[j];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        Vertex& worst = simplex.back();
        const double f_second = simplex[dim - 1].f;

        auto reflected = point_along(centroid, worst.x, -kReflect);
        const double f_r = eval(reflected);

        if (f_r < f_best) {
            auto expanded = point_along(centroid, worst.x, -kReflect * kExpand);
            const double f_e = eval(expanded);
            if (f_e < f_r) {
                worst = {std::move(expanded), f_e};
            } else {
                worst = {std::move(reflected), f_r};
            }
        } else if (f_r < f_second) {
            worst = {std::move(reflected), f_r};
        } else {
            bool accepted = false;
            if (f_r < worst.f) {
                auto outside = point_along(centroid, worst.x, -kReflect * kContract);
                const double f_oc = eval(outside);
                if (f_oc <= f_r) {
                    worst = {std::move(outside), f_oc};
                    accepted = true;
                }
            } else {
                auto inside = point_along(centroid, worst.x, kContract);
                const double f_ic = eval(inside);
                if (f_ic < worst.f) {
                    worst = {std::move(inside), f_ic};
                    accepted = true;
                }
            }
            if (!accepted) {
                const auto& best = simplex.front().x;
                for (std::size_t i = 1; i <= dim; ++i) {
                    for (std::size_t j = 0; j < dim; ++j) {
                        simplex[i].x[j] = best[j] + kShrink * (simplex[i].x[j] - best[j]);
                    }
                    simplex[i].f = eval(simplex[i].x);
                }
            }
        }
        sort_simplex();
    }

    return {simplex.front().x, simplex.front().f, evaluations, converged};
}

}  // namespace distfit
