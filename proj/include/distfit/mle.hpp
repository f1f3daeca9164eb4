#pragma once

// Maximum-likelihood fitting. Lognormal_2P has a closed form; every other
// family is fitted by simplex search on an unconstrained reparameterization
// (log of positive parameters, raw locations), starting from a moment or
// log-moment initializer and restarted from jittered copies of the best point.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distfit/dataset.hpp"
#include "distfit/distzoo.hpp"

namespace distfit {

struct FitConfig {
    std::size_t max_evaluations = 20000;  // per simplex run
    double tolerance = 1e-9;              // relative spread of -loglik over the simplex
    std::size_t restarts = 5;             // jittered runs after the initial one
};

// Throws DomainError when the configuration is unusable.
void validate(const FitConfig& cfg);

struct FitResult {
    FamilyId family;
    ParamVector params;
    double loglik;
    bool converged;
    std::size_t evaluations;
    // Location parameter ended at min(sample) - 1e-6 * |min(sample)|.
    bool location_capped = false;
};

// Largest admissible location for shifted families.
double location_cap(std::span<const double> xs);

// Starting point of the simplex search for a family.
ParamVector initial_parameters(FamilyId family, std::span<const double> xs);

// Closed form for Lognormal_2P (divisor n), simplex search otherwise.
// Throws FitError when the sample is smaller than parameter_count + 1 and
// DomainError when the estimate is degenerate (e.g. a constant sample).
FitResult fit(FamilyId family, const AbundanceSample& sample, const FitConfig& cfg = {});
FitResult fit(FamilyId family, std::span<const double> xs, const FitConfig& cfg = {});

// Simplex search for any family, including Lognormal_2P.
FitResult fit_simplex(FamilyId family, std::span<const double> xs, const FitConfig& cfg = {});

struct FitCell {
    enum class Status { fitted, skipped, failed };
    Status status;
    std::optional<FitResult> result;  // set when status == fitted
    std::string message;              // reason when skipped or failed

    bool usable() const noexcept { return status == Status::fitted && result && result->converged; }
};

// Fits indexed by (family, sample label).
class FitGrid {
public:
    FitGrid() = default;
    FitGrid(std::vector<FamilyId> families, std::vector<std::string> labels);

    const std::vector<FamilyId>& families() const noexcept { return families_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return cells_.size(); }
    bool empty() const noexcept { return cells_.empty(); }

    bool contains(FamilyId family, std::string_view label) const noexcept;
    const FitCell& at(FamilyId family, std::string_view label) const;
    FitCell& at(FamilyId family, std::string_view label);
    const FitCell& cell(std::size_t family_index, std::size_t label_index) const;
    FitCell& cell(std::size_t family_index, std::size_t label_index);

private:
    std::size_t index_of(FamilyId family, std::string_view label) const;

    std::vector<FamilyId> families_;
    std::vector<std::string> labels_;
    std::vector<FitCell> cells_;  // family-major
};

// Fits every family to every sample. Per-cell failures are recorded in the
// grid; the result does not depend on max_threads (0 = hardware concurrency).
FitGrid fit_all(const Corpus& corpus, std::span<const FamilyId> families, const FitConfig& cfg = {},
                unsigned max_threads = 0);

}  // namespace distfit
