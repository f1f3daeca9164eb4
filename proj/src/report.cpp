#include "distfit/report.hpp"

#include <cmath>
#include <sstream>

#include "distfit/error.hpp"
#include "text_util.hpp"

namespace distfit {

namespace {

std::string param_text(double v, Precision p) {
    return p == Precision::full ? detail::format_shortest(v) : detail::format_fixed(v, 4);
}
std::string stat_text(double v, Precision p) {
    return p == Precision::full ? detail::format_shortest(v) : detail::format_fixed(v, 2);
}
std::string summary_text(double v, Precision p) {
    return p == Precision::full ? detail::format_shortest(v) : detail::format_significant(v, 4);
}

std::vector<std::string_view> data_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    for (std::string_view line : detail::split(text, '\n')) {
        if (line.empty() || line.front() == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string_view> tab_fields(std::string_view line) { return detail::split(line, '\t'); }

double number(std::string_view field, std::size_t line) {
    double v = 0.0;
    if (!detail::parse_double(field, v)) throw ParseError(line, "invalid number '" + std::string(field) + "'");
    return v;
}

std::size_t count(std::string_view field, std::size_t line) {
    std::size_t v = 0;
    if (!detail::parse_size(field, v)) throw ParseError(line, "invalid count '" + std::string(field) + "'");
    return v;
}

bool flag(std::string_view field, std::size_t line) {
    if (field == "true") return true;
    if (field == "false") return false;
    throw ParseError(line, "expected true or false, got '" + std::string(field) + "'");
}

FamilyId family_field(std::string_view field, std::size_t line) {
    const auto f = parse_family(field);
    if (!f) throw ParseError(line, "unknown family '" + std::string(field) + "'");
    return *f;
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header) {
    if (lines.empty() || lines.front() != header) throw ParseError(1, "expected header '" + std::string(header) + "'");
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

const char* status_text(FitCell::Status s) {
    switch (s) {
        case FitCell::Status::fitted:
            return "fitted";
        case FitCell::Status::skipped:
            return "skipped";
        case FitCell::Status::failed:
            return "failed";
    }
    return "?";
}

}  // namespace

Precision parse_precision(std::string_view name) {
    if (name == "fixed") return Precision::fixed;
    if (name == "full") return Precision::full;
    throw ValidationError("unknown precision '" + std::string(name) + "' (expected fixed or full)");
}

std::string fits_tsv(const FitGrid& grid, const Corpus& corpus, Precision precision) {
    std::string out = "Family\tSample\tN\tParams\tLogLik\tConverged\tEvaluations\tLocationCapped\tStatus\tMessage\n";
    for (std::size_t f = 0; f < grid.families().size(); ++f) {
        const FamilyId family = grid.families()[f];
        const auto names = parameter_names(family);
        for (std::size_t s = 0; s < grid.labels().size(); ++s) {
            const std::string& label = grid.labels()[s];
            const FitCell& cell = grid.cell(f, s);
            const std::size_t n = corpus.contains(label) ? corpus.at(label).size() : 0;
            out += std::string(family_name(family)) + "\t" + label + "\t" + std::to_string(n) + "\t";
            if (cell.result) {
                const FitResult& r = *cell.result;
                for (std::size_t i = 0; i < r.params.size(); ++i) {
                    if (i) out += ';';
                    out += std::string(names[i]) + "=" + param_text(r.params[i], precision);
                }
                out += "\t" + param_text(r.loglik, precision) + "\t" + bool_text(r.converged) + "\t" +
                       std::to_string(r.evaluations) + "\t" + bool_text(r.location_capped);
            } else {
                out += "-\tnan\tfalse\t0\tfalse";
            }
            std::string message = cell.message;
            for (char& c : message) {
                if (c == '\t' || c == '\n') c = ' ';
            }
            out += std::string("\t") + status_text(cell.status) + "\t" + message + "\n";
        }
    }
    return out;
}

std::vector<FitRecord> parse_fits_tsv(std::string_view text) {
    const auto lines = data_lines(text);
    if (lines.empty() || !lines.front().starts_with("Family\tSample\tN\tParams")) {
        throw ParseError(1, "expected fits header");
    }
    std::vector<FitRecord> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = tab_fields(lines[i]);
        if (f.size() < 9) throw ParseError(i + 1, "expected at least 9 fields");
        FitRecord r;
        r.family = family_field(f[0], i + 1);
        r.sample = std::string(f[1]);
        r.n = count(f[2], i + 1);
        if (f[3] != "-") {
            for (std::string_view kv : detail::split(f[3], ';')) {
                const auto eq = kv.find('=');
                if (eq == std::string_view::npos) throw ParseError(i + 1, "expected name=value");
                r.params.push_back(number(kv.substr(eq + 1), i + 1));
            }
            r.loglik = number(f[4], i + 1);
        }
        r.converged = flag(f[5], i + 1);
        r.evaluations = count(f[6], i + 1);
        r.location_capped = flag(f[7], i + 1);
        r.status = std::string(f[8]);
        if (f.size() > 9) r.message = std::string(f[9]);
        out.push_back(std::move(r));
    }
    return out;
}

std::string table2_tsv(const std::vector<AggregateRow>& rows, Precision precision) {
    std::string out(table2_header);
    out += '\n';
    for (const auto& r : rows) {
        out += std::string(family_name(r.family));
        for (const CombinedTest* c : {&r.cs, &r.ks, &r.ad, &r.fcs}) {
            out += "\t" + stat_text(c->statistic, precision) + "\t" + param_text(c->pvalue, precision);
        }
        std::string cdf0 = r.sum_cdf0.domain_zero ? "0" : param_text(r.sum_cdf0.value, precision);
        if (!r.sum_cdf0.domain_zero && cdf0 == "0") cdf0 = "0.0";
        out += "\t" + cdf0;
        out += "\t" + param_text(r.sum_cdf100, precision);
        out += "\t" + std::to_string(r.rank) + "\t" + bool_text(r.rejected) + "\n";
    }
    out += "# Rejected: combined p_FCS below " + detail::format_shortest(rejection_level) + ".\n";
    out += "# SumCDF0 0 marks a family whose support excludes zero by definition; it ranks before any number.\n";
    out += "# Weibull_2P is judged by the same p_FCS rule as every other family; no extra rejection is applied.\n";
    return out;
}

std::vector<AggregateRow> parse_table2_tsv(std::string_view text) {
    const auto lines = data_lines(text);
    expect_header(lines, table2_header);
    std::vector<AggregateRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = tab_fields(lines[i]);
        if (f.size() != 13) throw ParseError(i + 1, "expected 13 fields");
        AggregateRow r{family_field(f[0], i + 1), {}, {}, {}, {}, {}, 0.0, 0, false};
        CombinedTest* tests[] = {&r.cs, &r.ks, &r.ad, &r.fcs};
        for (std::size_t t = 0; t < 4; ++t) {
            tests[t]->statistic = number(f[1 + 2 * t], i + 1);
            tests[t]->pvalue = number(f[2 + 2 * t], i + 1);
        }
        // A bare "0" is the domain token; numeric values always carry decimals.
        if (f[9] == "0") {
            r.sum_cdf0 = {true, 0.0};
        } else {
            r.sum_cdf0 = {false, number(f[9], i + 1)};
        }
        r.sum_cdf100 = number(f[10], i + 1);
        r.rank = count(f[11], i + 1);
        r.rejected = flag(f[12], i + 1);
        out.push_back(r);
    }
    return out;
}

std::string table3_tsv(const std::vector<SummaryRow>& rows, Precision precision) {
    std::string out(table3_header);
    out += '\n';
    for (const auto& r : rows) {
        out += r.label;
        for (double v : {r.sigma, r.mu, r.mean, r.stdev, r.ln_skewness, r.ln_kurtosis_excess, r.fisher_information,
                         r.renyi[0], r.renyi[1], r.renyi[2], r.renyi[3]}) {
            out += "\t" + summary_text(v, precision);
        }
        out += '\n';
    }
    out += "# lnSk and lnKE are natural logs of skewness and kurtosis excess; FI = 1/Sigma^2; H.a are Renyi entropies in nats.\n";
    out += "# H.5 is the closed-form order-1/2 Renyi entropy; published tables for this corpus print smaller values"
           " that no standard formula reproduces.\n";
    return out;
}

std::vector<SummaryRow> parse_table3_tsv(std::string_view text) {
    const auto lines = data_lines(text);
    expect_header(lines, table3_header);
    std::vector<SummaryRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = tab_fields(lines[i]);
        if (f.size() != 12) throw ParseError(i + 1, "expected 12 fields");
        SummaryRow r;
        r.label = std::string(f[0]);
        double* fields[] = {&r.sigma, &r.mu, &r.mean, &r.stdev, &r.ln_skewness, &r.ln_kurtosis_excess,
                            &r.fisher_information, &r.renyi[0], &r.renyi[1], &r.renyi[2], &r.renyi[3]};
        for (std::size_t k = 0; k < 11; ++k) *fields[k] = number(f[k + 1], i + 1);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (!(lo > 0.0) || !(hi > lo)) throw DomainError("log grid needs 0 < lo < hi");
    if (points < 2) throw DomainError("log grid needs at least two points");
    std::vector<double> xs(points);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i) {
        xs[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    xs.front() = lo;
    xs.back() = hi;
    return xs;
}

std::string curve_csv(const ParamVector& model, std::size_t points, Precision precision) {
    std::string out = "x,pdf\n";
    for (double x : log_grid(0.01, 100.0, points)) {
        const double y = pdf(model, x);
        out += (precision == Precision::full ? detail::format_shortest(x) : detail::format_significant(x, 6)) + "," +
               (precision == Precision::full ? detail::format_shortest(y) : detail::format_significant(y, 6)) + "\n";
    }
    return out;
}

}  // namespace distfit
