#include "distfit/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "distfit/error.hpp"

namespace distfit {

namespace {

constexpr double kAdClamp = 1e-15;
constexpr std::size_t kExactKolmogorovLimit = 140;

// Square matrix stored row-major with a decimal exponent, as in
// Marsaglia, Tsang & Wang (2003), "Evaluating Kolmogorov's distribution".
struct ScaledMatrix {
    std::size_t m;
    std::vector<double> v;
    int exponent = 0;
};

ScaledMatrix multiply(const ScaledMatrix& a, const ScaledMatrix& b) {
    const std::size_t m = a.m;
    ScaledMatrix c{m, std::vector<double>(m * m, 0.0), a.exponent + b.exponent};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < m; ++k) {
            const double aik = a.v[i * m + k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) c.v[i * m + j] += aik * b.v[k * m + j];
        }
    }
    return c;
}

void rescale(ScaledMatrix& a) {
    const std::size_t mid = (a.m / 2) * a.m + a.m / 2;
    if (a.v[mid] > 1e140) {
        for (double& x : a.v) x *= 1e-140;
        a.exponent += 140;
    }
}

ScaledMatrix power(const ScaledMatrix& a, std::size_t n) {
    if (n == 1) return a;
    ScaledMatrix half = power(a, n / 2);
    ScaledMatrix result = multiply(half, half);
    if (n % 2 == 1) result = multiply(a, result);
    rescale(result);
    return result;
}

// Limiting distribution of A^2, Marsaglia & Marsaglia (2004), max error ~2e-6.
double anderson_darling_limit_cdf(double z) {
    if (z <= 0.0) return 0.0;
    if (z < 2.0) {
        return std::exp(-1.2337141 / z) / std::sqrt(z) *
               (2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
    }
    return std::exp(
        -std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

void require_converged(const FitResult& model) {
    if (!model.converged) {
        throw FitError("goodness-of-fit test on a non-converged " + std::string(family_name(model.family)) + " fit");
    }
}

std::vector<double> cdf_values(std::span<const double> xs, const ParamVector& p) {
    std::vector<double> u;
    u.reserve(xs.size());
    for (double x : xs) u.push_back(cdf(p, x));
    return u;
}

// A^2 with the upper tail taken from the survival function for accuracy.
double ad_statistic_two_sided(std::vector<double> lower, std::vector<double> upper) {
    std::sort(lower.begin(), lower.end());
    std::sort(upper.begin(), upper.end());  // upper[i] pairs with lower[n-1-i]
    const std::size_t n = lower.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = std::clamp(lower[i], kAdClamp, 1.0 - kAdClamp);
        const double s = std::clamp(upper[i], kAdClamp, 1.0 - kAdClamp);
        sum += (2.0 * static_cast<double>(i) + 1.0) * (std::log(f) + std::log(s));
    }
    return -static_cast<double>(n) - sum / static_cast<double>(n);
}

double ks_p(std::size_t n, double d) { return kolmogorov_pvalue(n, d); }

}  // namespace

std::string_view test_name(TestKind kind) noexcept {
    switch (kind) {
        case TestKind::KS:
            return "K-S";
        case TestKind::AD:
            return "A-D";
        case TestKind::CS:
            return "C-S";
    }
    return "?";
}

double kolmogorov_cdf_exact(std::size_t n, double d) {
    if (n == 0) throw DomainError("kolmogorov_cdf_exact: n must be positive");
    if (!(d > 0.0)) return 0.0;
    if (d >= 1.0) return 1.0;
    const double nd = static_cast<double>(n) * d;
    const std::size_t k = static_cast<std::size_t>(nd) + 1;
    const std::size_t m = 2 * k - 1;
    const double h = static_cast<double>(k) - nd;

    ScaledMatrix H{m, std::vector<double>(m * m, 0.0)};
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) H.v[i * m + j] = (i + 1 >= j) ? 1.0 : 0.0;
    }
    for (std::size_t i = 0; i < m; ++i) {
        H.v[i * m] -= std::pow(h, static_cast<double>(i + 1));
        H.v[(m - 1) * m + i] -= std::pow(h, static_cast<double>(m - i));
    }
    H.v[(m - 1) * m] += (2.0 * h - 1.0 > 0.0) ? std::pow(2.0 * h - 1.0, static_cast<double>(m)) : 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i + 1 > j) {
                for (std::size_t g = 1; g <= i + 1 - j; ++g) H.v[i * m + j] /= static_cast<double>(g);
            }
        }
    }
    ScaledMatrix Q = power(H, n);
    double s = Q.v[(k - 1) * m + k - 1];
    int exponent = Q.exponent;
    for (std::size_t i = 1; i <= n; ++i) {
        s = s * static_cast<double>(i) / static_cast<double>(n);
        if (s < 1e-140) {
            s *= 1e140;
            exponent -= 140;
        }
    }
    return std::clamp(s * std::pow(10.0, exponent), 0.0, 1.0);
}

double kolmogorov_limit_pvalue(double lambda) {
    if (!(lambda > 0.0)) return 1.0;
    if (lambda < 1.0) {
        // Jacobi theta form of the CDF converges fast for small lambda.
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 50; ++j) {
            const double t = std::exp(-(2.0 * j - 1.0) * (2.0 * j - 1.0) * c);
            sum += t;
            if (t < 1e-18 * sum) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double t = std::exp(-2.0 * j * j * lambda * lambda);
        sum += (j % 2 ? t : -t);
        if (t < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double kolmogorov_pvalue(std::size_t n, double d) {
    if (n == 0) throw DomainError("kolmogorov_pvalue: n must be positive");
    if (!(d > 0.0)) return 1.0;
    if (d >= 1.0) return 0.0;
    if (n <= kExactKolmogorovLimit) return std::clamp(1.0 - kolmogorov_cdf_exact(n, d), 0.0, 1.0);
    return kolmogorov_limit_pvalue(std::sqrt(static_cast<double>(n)) * d);
}

double anderson_darling_pvalue(double a2) { return std::clamp(1.0 - anderson_darling_limit_cdf(a2), 0.0, 1.0); }

double chi_square_pvalue(double statistic, double df) {
    if (!(df > 0.0)) throw DomainError("chi-square degrees of freedom must be positive");
    if (!(statistic > 0.0)) return 1.0;
    if (std::isinf(statistic)) return 0.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

double ks_statistic(std::span<const double> cdf_values) {
    std::vector<double> u(cdf_values.begin(), cdf_values.end());
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double above = static_cast<double>(i + 1) / n - u[i];
        const double below = u[i] - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return d;
}

double ad_statistic(std::span<const double> cdf_values) {
    std::vector<double> lower(cdf_values.begin(), cdf_values.end());
    std::vector<double> upper;
    upper.reserve(lower.size());
    for (double u : lower) upper.push_back(1.0 - u);
    return ad_statistic_two_sided(std::move(lower), std::move(upper));
}

std::size_t sturges_bins(std::size_t n) {
    if (n == 0) throw DomainError("sturges_bins: empty sample");
    return static_cast<std::size_t>(std::lround(1.0 + std::log2(static_cast<double>(n))));
}

std::vector<std::size_t> equal_probability_counts(std::span<const double> cdf_values, std::size_t k) {
    if (k == 0) throw DomainError("equal_probability_counts: k must be positive");
    std::vector<std::size_t> counts(k, 0);
    for (double u : cdf_values) {
        const double scaled = std::clamp(u, 0.0, 1.0) * static_cast<double>(k);
        const auto bin = std::min(static_cast<std::size_t>(scaled), k - 1);
        ++counts[bin];
    }
    return counts;
}

TestResult ks_test(std::span<const double> xs, const ParamVector& model) {
    if (xs.empty()) throw DomainError("K-S test on an empty sample");
    const double d = ks_statistic(cdf_values(xs, model));
    return {TestKind::KS, d, ks_p(xs.size(), d)};
}

TestResult ad_test(std::span<const double> xs, const ParamVector& model) {
    if (xs.empty()) throw DomainError("A-D test on an empty sample");
    std::vector<double> upper;
    upper.reserve(xs.size());
    for (double x : xs) upper.push_back(survival(model, x));
    const double a2 = ad_statistic_two_sided(cdf_values(xs, model), std::move(upper));
    return {TestKind::AD, a2, anderson_darling_pvalue(a2)};
}

TestResult cs_test(std::span<const double> xs, const ParamVector& model) {
    const std::size_t n = xs.size();
    if (n < cs_min_sample) return {TestKind::CS, 0.0, 1.0, 0, true};
    const std::size_t k = sturges_bins(n);
    const auto counts = equal_probability_counts(cdf_values(xs, model), k);
    const double expected = static_cast<double>(n) / static_cast<double>(k);
    double stat = 0.0;
    for (std::size_t c : counts) {
        const double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    return {TestKind::CS, stat, chi_square_pvalue(stat, static_cast<double>(k - 1)), k - 1, false};
}

TestResult ks_test(std::span<const double> xs, const FitResult& model) {
    require_converged(model);
    return ks_test(xs, model.params);
}
TestResult ad_test(std::span<const double> xs, const FitResult& model) {
    require_converged(model);
    return ad_test(xs, model.params);
}
TestResult cs_test(std::span<const double> xs, const FitResult& model) {
    require_converged(model);
    return cs_test(xs, model.params);
}
TestResult ks_test(const AbundanceSample& s, const FitResult& model) { return ks_test(std::span<const double>(s.values), model); }
TestResult ad_test(const AbundanceSample& s, const FitResult& model) { return ad_test(std::span<const double>(s.values), model); }
TestResult cs_test(const AbundanceSample& s, const FitResult& model) { return cs_test(std::span<const double>(s.values), model); }

double bootstrap_pvalue(TestKind kind, std::span<const double> xs, const FitResult& model, const FitConfig& cfg,
                        std::size_t replicates, std::uint64_t seed) {
    require_converged(model);
    if (kind == TestKind::CS) throw DomainError("bootstrap p-values are offered for K-S and A-D only");
    if (replicates == 0) throw DomainError("bootstrap needs at least one replicate");
    auto statistic = [&](std::span<const double> data, const ParamVector& p) {
        return kind == TestKind::KS ? ks_test(data, p).statistic : ad_test(data, p).statistic;
    };
    const double observed = statistic(xs, model.params);

    std::mt19937_64 rng(seed);
    std::vector<double> draw(xs.size());
    std::size_t valid = 0, exceed = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
        for (double& x : draw) {
            const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
            x = quantile(model.params, u);
        }
        try {
            const FitResult refit = fit(model.family, std::span<const double>(draw), cfg);
            if (!refit.converged) continue;
            ++valid;
            if (statistic(draw, refit.params) >= observed) ++exceed;
        } catch (const Error&) {
            continue;
        }
    }
    return static_cast<double>(exceed + 1) / static_cast<double>(valid + 1);
}

CombinedTest fisher_combine(std::span<const double> ps, CombineRule rule) {
    if (ps.empty()) throw DomainError("fisher_combine: no p-values");
    double s = 0.0;
    for (double p : ps) {
        if (!(p >= 0.0 && p <= 1.0)) throw DomainError("fisher_combine: p-value outside [0, 1]");
        if (p == 0.0) throw DomainError("fisher_combine: p-value of 0 gives an infinite statistic");
        s -= std::log(p);
    }
    const std::size_t k = ps.size();
    if (rule == CombineRule::standard_fisher_2k) {
        return {2.0 * s, k, chi_square_pvalue(2.0 * s, 2.0 * static_cast<double>(k))};
    }
    return {s, k, chi_square_pvalue(s, static_cast<double>(k))};
}

AggregateRow aggregate(FamilyId family, const Corpus& corpus, const FitGrid& fits, const AggregateOptions& options) {
    std::string problems;
    for (const auto& s : corpus.samples) {
        if (!fits.contains(family, s.species_label)) {
            problems += " " + s.species_label + " (missing)";
        } else if (const auto& cell = fits.at(family, s.species_label); !cell.usable()) {
            problems += " " + s.species_label + " (" + (cell.message.empty() ? "not converged" : cell.message) + ")";
        }
    }
    if (!problems.empty()) {
        throw ValidationError("cannot aggregate " + std::string(family_name(family)) + ":" + problems);
    }

    // Underflowed p-values are floored so the combination stays finite.
    const auto floor_p = [](double p) { return std::max(p, std::numeric_limits<double>::min()); };

    std::vector<double> p_cs, p_ks, p_ad;
    AggregateRow row{family, {}, {}, {}, {}, {}, 0.0, 0, false};
    row.sum_cdf0 = {strictly_positive_by_definition(family), 0.0};
    for (std::size_t i = 0; i < corpus.samples.size(); ++i) {
        const auto& s = corpus.samples[i];
        const FitResult& model = *fits.at(family, s.species_label).result;
        const std::span<const double> xs(s.values);
        double pk = ks_test(xs, model).pvalue;
        double pa = ad_test(xs, model).pvalue;
        if (options.bootstrap_replicates > 0) {
            pk = bootstrap_pvalue(TestKind::KS, xs, model, options.bootstrap_fit, options.bootstrap_replicates, 1000 + i);
            pa = bootstrap_pvalue(TestKind::AD, xs, model, options.bootstrap_fit, options.bootstrap_replicates, 2000 + i);
        }
        p_ks.push_back(floor_p(pk));
        p_ad.push_back(floor_p(pa));
        if (const TestResult c = cs_test(xs, model); !c.excluded) p_cs.push_back(floor_p(c.pvalue));
        if (!row.sum_cdf0.domain_zero) row.sum_cdf0.value += cdf(model.params, 0.0);
        row.sum_cdf100 += survival(model.params, 100.0);
    }
    row.cs = p_cs.empty() ? CombinedTest{} : fisher_combine(p_cs, options.rule);
    row.ks = fisher_combine(p_ks, options.rule);
    row.ad = fisher_combine(p_ad, options.rule);
    const double combined[] = {floor_p(row.cs.pvalue), floor_p(row.ks.pvalue), floor_p(row.ad.pvalue)};
    row.fcs = fisher_combine(combined, options.rule);
    row.rejected = row.fcs.pvalue < rejection_level;
    return row;
}

std::vector<AggregateRow> rank_rows(std::vector<AggregateRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const AggregateRow& a, const AggregateRow& b) {
        if (a.rejected != b.rejected) return !a.rejected;
        if (a.sum_cdf0.domain_zero != b.sum_cdf0.domain_zero) return a.sum_cdf0.domain_zero;
        if (!a.sum_cdf0.domain_zero && a.sum_cdf0.value != b.sum_cdf0.value) return a.sum_cdf0.value < b.sum_cdf0.value;
        if (a.sum_cdf100 != b.sum_cdf100) return a.sum_cdf100 < b.sum_cdf100;
        return a.fcs.pvalue > b.fcs.pvalue;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
    return rows;
}

PooledTest pooled_test(const AbundanceSample& s, FamilyId family, const FitConfig& cfg) {
    FitResult model = fit(family, s, cfg);
    require_converged(model);
    const TestResult ks = ks_test(s, model);
    const TestResult ad = ad_test(s, model);
    const TestResult cs = cs_test(s, model);
    std::vector<double> ps{std::max(ks.pvalue, std::numeric_limits<double>::min()),
                           std::max(ad.pvalue, std::numeric_limits<double>::min())};
    if (!cs.excluded) ps.insert(ps.begin(), std::max(cs.pvalue, std::numeric_limits<double>::min()));
    const CombinedTest combined = fisher_combine(ps);
    return {std::move(model), ks, ad, cs, combined};
}

}  // namespace distfit
