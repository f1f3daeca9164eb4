#include "distfit/mle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "distfit/error.hpp"
#include "distfit/nelder_mead.hpp"

namespace distfit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286061;
// Positive parameters are searched below 1e6. Likelihoods whose supremum lies
// in a limiting family (Dagum -> Frechet, Pearson6 -> Pearson5) stop there.
const double kLogCeiling = std::log(1e6);
constexpr std::uint64_t kJitterSeed = 0x6d6c652d6a697474ULL;

struct Moments {
    double mean, var, log_mean, log_sd, median, min, max;
};

Moments moments(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    double sum = 0.0, lsum = 0.0;
    for (double x : xs) {
        sum += x;
        lsum += std::log(x);
    }
    const double mean = sum / n, lmean = lsum / n;
    double ss = 0.0, lss = 0.0;
    for (double x : xs) {
        ss += (x - mean) * (x - mean);
        lss += (std::log(x) - lmean) * (std::log(x) - lmean);
    }
    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    const double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    return {mean, ss / n, lmean, std::sqrt(lss / n), median, sorted.front(), sorted.back()};
}

// Monotone decreasing g on [lo, hi] (log-spaced bisection) solving g(a) = target.
template <class G>
double solve_decreasing(G&& g, double target, double lo, double hi) {
    if (g(lo) <= target) return lo;
    if (g(hi) >= target) return hi;
    for (int i = 0; i < 200; ++i) {
        const double mid = std::sqrt(lo * hi);
        (g(mid) > target ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

bool is_shifted(FamilyId f) {
    switch (f) {
        case FamilyId::Frechet3P:
        case FamilyId::InverseGaussian3P:
        case FamilyId::Levy2P:
        case FamilyId::Pearson5_3P:
        case FamilyId::PhasedBiExponential4P:
            return true;
        default:
            return false;
    }
}

std::size_t location_index(FamilyId f) {
    switch (f) {
        case FamilyId::Levy2P:
        case FamilyId::PhasedBiExponential4P:
            return f == FamilyId::Levy2P ? 1 : 2;
        default:
            return 2;
    }
}

// Unconstrained coordinates <-> parameters.
std::vector<double> to_params(FamilyId f, std::span<const double> t) {
    std::vector<double> p(t.begin(), t.end());
    switch (f) {
        case FamilyId::FisherTippett3P:
            p[1] = std::exp(t[1]);
            break;
        case FamilyId::Lognormal2P:
            p[0] = std::exp(t[0]);
            break;
        case FamilyId::PhasedBiExponential4P:
            p[0] = std::exp(t[0]);
            p[1] = std::exp(t[1]);
            p[3] = t[2] + std::exp(t[3]);
            break;
        default:
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (!(is_shifted(f) && i == location_index(f))) p[i] = std::exp(t[i]);
            }
    }
    return p;
}

std::vector<double> to_coords(const ParamVector& pv) {
    const FamilyId f = pv.family();
    std::vector<double> t(pv.values().begin(), pv.values().end());
    switch (f) {
        case FamilyId::FisherTippett3P:
            t[1] = std::log(pv[1]);
            break;
        case FamilyId::Lognormal2P:
            t[0] = std::log(pv[0]);
            break;
        case FamilyId::PhasedBiExponential4P:
            t[0] = std::log(pv[0]);
            t[1] = std::log(pv[1]);
            t[3] = std::log(pv[3] - pv[2]);
            break;
        default:
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (!(is_shifted(f) && i == location_index(f))) t[i] = std::log(pv[i]);
            }
    }
    return t;
}

bool is_log_coordinate(FamilyId f, std::size_t i) {
    switch (f) {
        case FamilyId::FisherTippett3P:
            return i == 1;
        case FamilyId::Lognormal2P:
            return i == 0;
        case FamilyId::PhasedBiExponential4P:
            return i != 2;
        default:
            return !(is_shifted(f) && i == location_index(f));
    }
}

std::vector<double> initial_steps(FamilyId f, const Moments& m) {
    std::vector<double> steps(parameter_count(f), 0.3);
    const double loc_step = std::max(0.05 * (m.max - m.min), 1e-3);
    if (is_shifted(f)) steps[location_index(f)] = loc_step;
    if (f == FamilyId::FisherTippett3P) {
        steps[0] = 0.1;
        steps[2] = 0.1 * std::sqrt(m.var) + 1e-3;
    }
    if (f == FamilyId::Lognormal2P) steps[1] = 0.3;
    return steps;
}

double uniform_pm1(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

void validate(const FitConfig& cfg) {
    if (!(cfg.tolerance > 0.0)) throw DomainError("fit tolerance must be positive");
    if (cfg.max_evaluations == 0) throw DomainError("fit max_evaluations must be positive");
}

double location_cap(std::span<const double> xs) {
    const double lo = *std::min_element(xs.begin(), xs.end());
    return lo - 1e-6 * std::fabs(lo);
}

ParamVector initial_parameters(FamilyId family, std::span<const double> xs) {
    const Moments m = moments(xs);
    const double cap = location_cap(xs);
    const double loc0 = std::min(m.min - 0.1 * (m.max - m.min), cap);

    // Log-moment estimates of the shifted sample.
    auto shifted_log_moments = [&](double shift) {
        double lsum = 0.0;
        for (double x : xs) lsum += std::log(x - shift);
        const double lmean = lsum / static_cast<double>(xs.size());
        double lss = 0.0;
        for (double x : xs) lss += (std::log(x - shift) - lmean) * (std::log(x - shift) - lmean);
        return std::pair{lmean, std::sqrt(lss / static_cast<double>(xs.size()))};
    };
    const double log_sd = std::max(m.log_sd, 1e-3);
    const double sd = std::sqrt(m.var);

    auto frechet = [&](double shift) {
        const auto [lm, ls] = shifted_log_moments(shift);
        const double alpha = std::numbers::pi / (std::max(ls, 1e-3) * std::sqrt(6.0));
        return std::pair{alpha, std::exp(lm - kEulerGamma / alpha)};
    };
    auto pearson5 = [&](double shift) {
        const auto [lm, ls] = shifted_log_moments(shift);
        const double alpha = solve_decreasing([](double a) { return boost::math::trigamma(a); },
                                              std::max(ls, 1e-3) * std::max(ls, 1e-3), 1e-4, 1e6);
        return std::pair{alpha, std::exp(lm + boost::math::digamma(alpha))};
    };
    auto inverse_gaussian = [&](double shift) {
        const double mu = m.mean - shift;
        return std::pair{mu * mu * mu / std::max(m.var, 1e-12), mu};
    };

    switch (family) {
        case FamilyId::Dagum3P:
            return {family, {1.0, std::numbers::pi / (std::sqrt(3.0) * log_sd), std::exp(m.log_mean)}};
        case FamilyId::Frechet2P: {
            const auto [a, b] = frechet(0.0);
            return {family, {a, b}};
        }
        case FamilyId::Frechet3P: {
            const auto [a, b] = frechet(loc0);
            return {family, {a, b, loc0}};
        }
        case FamilyId::FisherTippett3P: {
            const double sigma = std::sqrt(6.0) * sd / std::numbers::pi;
            return {family, {0.1, sigma, m.mean - kEulerGamma * sigma}};
        }
        case FamilyId::InverseGaussian2P: {
            const auto [lambda, mu] = inverse_gaussian(0.0);
            return {family, {lambda, mu}};
        }
        case FamilyId::InverseGaussian3P: {
            const auto [lambda, mu] = inverse_gaussian(loc0);
            return {family, {lambda, mu, loc0}};
        }
        case FamilyId::Levy1P:
            return {family, {m.median / 2.0}};
        case FamilyId::Levy2P:
            return {family, {(m.median - loc0) / 2.0, loc0}};
        case FamilyId::LogLogistic2P:
            return {family, {std::numbers::pi / (std::sqrt(3.0) * log_sd), std::exp(m.log_mean)}};
        case FamilyId::Lognormal2P:
            return {family, {log_sd, m.log_mean}};
        case FamilyId::Pareto2_2P:
            return {family, {1.0, m.median}};
        case FamilyId::Pearson5_2P: {
            const auto [a, b] = pearson5(0.0);
            return {family, {a, b}};
        }
        case FamilyId::Pearson5_3P: {
            const auto [a, b] = pearson5(loc0);
            return {family, {a, b, loc0}};
        }
        case FamilyId::Pearson6_3P: {
            const double a = solve_decreasing([](double x) { return 2.0 * boost::math::trigamma(x); },
                                              log_sd * log_sd, 1e-4, 1e6);
            return {family, {a, a, std::exp(m.log_mean)}};
        }
        case FamilyId::PhasedBiExponential4P: {
            const double g1 = loc0;
            const double g2 = std::max(m.median, g1 + 1e-6 * (m.max - m.min) + 1e-12);
            double s1 = 0.0, s2 = 0.0;
            std::size_t n1 = 0, n2 = 0;
            for (double x : xs) {
                if (x < g2) {
                    s1 += x - g1;
                    ++n1;
                } else {
                    s2 += x - g2;
                    ++n2;
                }
            }
            const double l1 = n1 && s1 > 0 ? n1 / s1 : 1.0 / (g2 - g1);
            const double l2 = n2 && s2 > 0 ? n2 / s2 : 1.0 / std::max(m.mean, 1e-12);
            return {family, {l1, l2, g1, g2}};
        }
        case FamilyId::Weibull2P: {
            const double cv2 = m.var / (m.mean * m.mean);
            const double alpha = solve_decreasing(
                [](double a) {
                    return std::exp(std::lgamma(1.0 + 2.0 / a) - 2.0 * std::lgamma(1.0 + 1.0 / a)) - 1.0;
                },
                cv2, 0.02, 50.0);
            return {family, {alpha, m.mean / std::exp(std::lgamma(1.0 + 1.0 / alpha))}};
        }
    }
    throw DomainError("unknown family");
}

FitResult fit_simplex(FamilyId family, std::span<const double> xs, const FitConfig& cfg) {
    validate(cfg);
    if (xs.size() < parameter_count(family) + 1) {
        throw FitError("sample of size " + std::to_string(xs.size()) + " too small for " +
                       std::string(family_name(family)));
    }
    const Moments m = moments(xs);
    const double cap = location_cap(xs);
    const bool shifted = is_shifted(family);
    const std::size_t loc_i = location_index(family);

    auto objective = [&](std::span<const double> t) {
        if (shifted && t[loc_i] > cap) return kInf;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (is_log_coordinate(family, i) && t[i] > kLogCeiling) return kInf;
        }
        const auto values = to_params(family, t);
        if (!ParamVector::admissible(family, values)) return kInf;
        const double ll = log_likelihood(ParamVector(family, values), xs);
        return std::isfinite(ll) ? -ll : kInf;
    };

    const ParamVector init = initial_parameters(family, xs);
    const auto steps = initial_steps(family, m);
    const SimplexOptions options{cfg.max_evaluations, cfg.tolerance};

    SimplexResult best = nelder_mead(objective, to_coords(init), steps, options);
    std::size_t evaluations = best.evaluations;

    std::mt19937_64 rng(kJitterSeed);
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        std::vector<double> start = best.point;
        for (std::size_t i = 0; i < start.size(); ++i) start[i] += steps[i] * uniform_pm1(rng);
        if (shifted) start[loc_i] = std::min(start[loc_i], cap);
        SimplexResult run = nelder_mead(objective, std::move(start), steps, options);
        evaluations += run.evaluations;
        if (run.value < best.value || (run.value == best.value && run.converged && !best.converged)) {
            best = std::move(run);
        }
    }

    const bool finite = std::isfinite(best.value);
    auto values = finite ? to_params(family, best.point) : std::vector<double>(init.values().begin(), init.values().end());
    if (!ParamVector::admissible(family, values)) {
        values.assign(init.values().begin(), init.values().end());
    }
    ParamVector params(family, std::move(values));
    const double loglik = log_likelihood(params, xs);
    const bool capped = shifted && std::isfinite(loglik) && cap - params[loc_i] <= 1e-9 * (1.0 + std::fabs(cap));
    return FitResult{family, std::move(params), loglik, best.converged && std::isfinite(loglik), evaluations, capped};
}

FitResult fit(FamilyId family, std::span<const double> xs, const FitConfig& cfg) {
    validate(cfg);
    if (xs.size() < parameter_count(family) + 1) {
        throw FitError("sample of size " + std::to_string(xs.size()) + " too small for " +
                       std::string(family_name(family)));
    }
    if (family != FamilyId::Lognormal2P) return fit_simplex(family, xs, cfg);

    const double n = static_cast<double>(xs.size());
    double lsum = 0.0;
    for (double x : xs) lsum += std::log(x);
    const double mu = lsum / n;
    double ss = 0.0;
    for (double x : xs) ss += (std::log(x) - mu) * (std::log(x) - mu);
    ParamVector params(family, {std::sqrt(ss / n), mu});
    const double loglik = log_likelihood(params, xs);
    return FitResult{family, std::move(params), loglik, std::isfinite(loglik), 0, false};
}

FitResult fit(FamilyId family, const AbundanceSample& sample, const FitConfig& cfg) {
    return fit(family, std::span<const double>(sample.values), cfg);
}

FitGrid::FitGrid(std::vector<FamilyId> families, std::vector<std::string> labels)
    : families_(std::move(families)), labels_(std::move(labels)),
      cells_(families_.size() * labels_.size(), FitCell{FitCell::Status::skipped, std::nullopt, "not fitted"}) {}

std::size_t FitGrid::index_of(FamilyId family, std::string_view label) const {
    const auto f = std::find(families_.begin(), families_.end(), family);
    const auto l = std::find(labels_.begin(), labels_.end(), label);
    if (f == families_.end() || l == labels_.end()) {
        throw ValidationError("no fit for " + std::string(family_name(family)) + " / " + std::string(label));
    }
    return static_cast<std::size_t>(f - families_.begin()) * labels_.size() +
           static_cast<std::size_t>(l - labels_.begin());
}

bool FitGrid::contains(FamilyId family, std::string_view label) const noexcept {
    return std::find(families_.begin(), families_.end(), family) != families_.end() &&
           std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

const FitCell& FitGrid::at(FamilyId family, std::string_view label) const { return cells_[index_of(family, label)]; }
FitCell& FitGrid::at(FamilyId family, std::string_view label) { return cells_[index_of(family, label)]; }

const FitCell& FitGrid::cell(std::size_t fi, std::size_t li) const { return cells_.at(fi * labels_.size() + li); }
FitCell& FitGrid::cell(std::size_t fi, std::size_t li) { return cells_.at(fi * labels_.size() + li); }

FitGrid fit_all(const Corpus& corpus, std::span<const FamilyId> families, const FitConfig& cfg, unsigned max_threads) {
    validate(cfg);
    std::vector<std::string> labels;
    for (const auto& s : corpus.samples) labels.push_back(s.species_label);
    FitGrid grid(std::vector<FamilyId>(families.begin(), families.end()), labels);
    const std::size_t total = grid.size();
    if (total == 0) return grid;

    auto work = [&](std::size_t index) {
        const std::size_t fi = index / labels.size();
        const std::size_t li = index % labels.size();
        const FamilyId family = families[fi];
        const auto& sample = corpus.samples[li];
        FitCell& cell = grid.cell(fi, li);
        if (sample.size() < parameter_count(family) + 1) {
            cell = {FitCell::Status::skipped, std::nullopt,
                    "sample size " + std::to_string(sample.size()) + " below " +
                        std::to_string(parameter_count(family) + 1)};
            return;
        }
        try {
            cell = {FitCell::Status::fitted, fit(family, sample, cfg), {}};
        } catch (const std::exception& e) {
            cell = {FitCell::Status::failed, std::nullopt, e.what()};
        }
    };

    unsigned threads = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (threads <= 1) {
        for (std::size_t i = 0; i < total; ++i) work(i);
        return grid;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < total; i = next++) work(i);
        });
    }
    pool.clear();
    return grid;
}

}  // namespace distfit
