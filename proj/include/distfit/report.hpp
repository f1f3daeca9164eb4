#pragma once

// Tab-separated reports and plot data, plus readers for the tabular formats.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "distfit/gof.hpp"
#include "distfit/mle.hpp"
#include "distfit/stats.hpp"

namespace distfit {

// fixed: 4 decimals for parameters and p-values, 2 for statistics, 4
// significant digits in the summary table. full: shortest round-trip text.
enum class Precision { fixed, full };

Precision parse_precision(std::string_view name);

// Columns: Family, Sample, N, Params, LogLik, Converged, Evaluations,
// LocationCapped, Status, Message. Params is `name=value` joined by ';'.
std::string fits_tsv(const FitGrid& grid, const Corpus& corpus, Precision precision = Precision::fixed);

struct FitRecord {
    FamilyId family;
    std::string sample;
    std::size_t n = 0;
    std::vector<double> params;  // empty unless fitted
    double loglik = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
    bool location_capped = false;
    std::string status;
    std::string message;
};

std::vector<FitRecord> parse_fits_tsv(std::string_view text);

inline constexpr std::string_view table2_header =
    "Dist\tC-S\tp_CS\tK-S\tp_KS\tA-D\tp_AD\tF-C-S\tp_FCS\tSumCDF0\tSumCDF100\tRank\tRejected";

// Rows are written in the given order; '#' footnotes follow the table.
std::string table2_tsv(const std::vector<AggregateRow>& rows, Precision precision = Precision::fixed);

// Combined k values are not part of the text form and come back as 0.
std::vector<AggregateRow> parse_table2_tsv(std::string_view text);

inline constexpr std::string_view table3_header =
    "Label\tSigma\tMu\tMean\tStDev\tlnSk\tlnKE\tFI\tH.5\tH1\tH2\tH3";

std::string table3_tsv(const std::vector<SummaryRow>& rows, Precision precision = Precision::fixed);
std::vector<SummaryRow> parse_table3_tsv(std::string_view text);

// `points` log-spaced abscissae over [lo, hi], endpoints exact.
std::vector<double> log_grid(double lo, double hi, std::size_t points);

// CSV `x,pdf` of the fitted density on log_grid(0.01, 100, points).
std::string curve_csv(const ParamVector& model, std::size_t points = 200, Precision precision = Precision::full);

}  // namespace distfit
