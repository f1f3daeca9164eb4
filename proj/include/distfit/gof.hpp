#pragma once

// Goodness of fit: Kolmogorov-Smirnov, Anderson-Darling and equal-probability
// chi-square tests against a fully specified (fitted) model, combination of
// p-values, and assembly of the per-family comparison table.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "distfit/dataset.hpp"
#include "distfit/distzoo.hpp"
#include "distfit/mle.hpp"

namespace distfit {

enum class TestKind { KS, AD, CS };

std::string_view test_name(TestKind kind) noexcept;

struct TestResult {
    TestKind kind;
    double statistic = 0.0;
    double pvalue = 1.0;
    std::size_t df = 0;     // chi-square only
    bool excluded = false;  // chi-square only: sample below cs_min_sample
};

struct CombinedTest {
    double statistic = 0.0;
    std::size_t k = 0;
    double pvalue = 1.0;
};

// --- null distributions -----------------------------------------------------

// P(D_n >= d) for the one-sample Kolmogorov statistic under a fully specified
// continuous null. Exact (Marsaglia-Tsang-Wang) for n <= 140, asymptotic
// Kolmogorov series in sqrt(n) d beyond.
double kolmogorov_pvalue(std::size_t n, double d);
// Exact P(D_n < d) for any n.
double kolmogorov_cdf_exact(std::size_t n, double d);
// Limiting upper tail Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
double kolmogorov_limit_pvalue(double lambda);

// Upper tail of the limiting distribution of A^2 (case 0).
double anderson_darling_pvalue(double a2);

// Upper tail of a chi-square with df degrees of freedom.
double chi_square_pvalue(double statistic, double df);

// --- statistics from fitted CDF values --------------------------------------

// Statistics take F(x) evaluated at the observations, in any order.
double ks_statistic(std::span<const double> cdf_values);
double ad_statistic(std::span<const double> cdf_values);

inline constexpr std::size_t cs_min_sample = 10;
// round(1 + log2 n).
std::size_t sturges_bins(std::size_t n);
// Observed counts in k equal-probability bins of the model CDF.
std::vector<std::size_t> equal_probability_counts(std::span<const double> cdf_values, std::size_t k);

// --- tests -----------------------------------------------------------------

// Each test throws FitError for a non-converged fit.
TestResult ks_test(std::span<const double> xs, const FitResult& model);
TestResult ad_test(std::span<const double> xs, const FitResult& model);
TestResult cs_test(std::span<const double> xs, const FitResult& model);
TestResult ks_test(const AbundanceSample& s, const FitResult& model);
TestResult ad_test(const AbundanceSample& s, const FitResult& model);
TestResult cs_test(const AbundanceSample& s, const FitResult& model);

// Same tests against any parameter vector, without the convergence check.
TestResult ks_test(std::span<const double> xs, const ParamVector& model);
TestResult ad_test(std::span<const double> xs, const ParamVector& model);
TestResult cs_test(std::span<const double> xs, const ParamVector& model);

// Parametric-bootstrap p-value for K-S or A-D, accounting for estimated
// parameters: the fitted model is resampled and refitted `replicates` times.
// Off by default in the pipeline.
double bootstrap_pvalue(TestKind kind, std::span<const double> xs, const FitResult& model, const FitConfig& cfg,
                        std::size_t replicates, std::uint64_t seed);

// --- combination -----------------------------------------------------------

enum class CombineRule {
    neg_log_sum_k_df,     // S = sum -ln p against chi-square(k)   (default)
    standard_fisher_2k,   // S = -2 sum ln p against chi-square(2k)
};

// Throws DomainError for an empty list, p outside [0, 1], or p == 0.
CombinedTest fisher_combine(std::span<const double> ps, CombineRule rule = CombineRule::neg_log_sum_k_df);

// --- comparison table -----------------------------------------------------

// Mass at or below zero summed over samples. `domain_zero` marks families
// whose support excludes zero by definition; it sorts before any number.
struct SumCdf0 {
    bool domain_zero = true;
    double value = 0.0;

    bool operator==(const SumCdf0&) const = default;
};

struct AggregateRow {
    FamilyId family;
    CombinedTest cs, ks, ad;
    CombinedTest fcs;
    SumCdf0 sum_cdf0;
    double sum_cdf100 = 0.0;
    std::size_t rank = 0;
    bool rejected = false;
};

inline constexpr double rejection_level = 0.01;

struct AggregateOptions {
    CombineRule rule = CombineRule::neg_log_sum_k_df;
    // 0 keeps the fully specified null; > 0 switches K-S and A-D p-values to
    // the parametric bootstrap with this many replicates.
    std::size_t bootstrap_replicates = 0;
    FitConfig bootstrap_fit = {};
};

// Throws ValidationError listing every missing or non-converged cell.
AggregateRow aggregate(FamilyId family, const Corpus& corpus, const FitGrid& fits,
                       const AggregateOptions& options = {});

// Orders rows and assigns ranks 1..N. Non-rejected rows come first; within each
// group: SumCDF0 (domain token before numbers, then ascending), SumCDF100
// ascending, p_FCS descending. Ties keep input order.
std::vector<AggregateRow> rank_rows(std::vector<AggregateRow> rows);

struct PooledTest {
    FitResult fit;
    TestResult ks, ad, cs;
    CombinedTest combined;  // over the non-excluded tests
};

PooledTest pooled_test(const AbundanceSample& s, FamilyId family, const FitConfig& cfg = {});

}  // namespace distfit
