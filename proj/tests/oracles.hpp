#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner: quadrature, Steck's determinant, brute-force MST and
// p-value simulation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "distfit/distzoo.hpp"
#include "distfit/gof.hpp"

namespace oracle {

using distfit::FamilyId;
using distfit::ParamVector;

// Three (or two) admissible parameter vectors per family.
inline std::vector<ParamVector> parameter_grid(FamilyId f) {
    std::vector<std::vector<double>> raw;
    switch (f) {
        case FamilyId::Dagum3P:
            raw = {{0.5, 2.0, 1.0}, {2.0, 3.5, 5.0}, {1.0, 1.5, 0.3}};
            break;
        case FamilyId::Frechet2P:
            raw = {{1.5, 1.0}, {3.0, 5.0}, {1.2, 0.5}};
            break;
        case FamilyId::Frechet3P:
            raw = {{2.0, 1.0, -1.0}, {1.5, 3.0, 2.0}};
            break;
        case FamilyId::FisherTippett3P:
            raw = {{0.2, 1.0, 0.0}, {-0.3, 2.0, 1.0}, {0.0, 1.0, 0.5}};
            break;
        case FamilyId::InverseGaussian2P:
            raw = {{1.0, 1.0}, {5.0, 2.0}, {0.5, 3.0}};
            break;
        case FamilyId::InverseGaussian3P:
            raw = {{2.0, 1.0, -0.5}, {1.0, 3.0, 1.0}};
            break;
        case FamilyId::Levy1P:
            raw = {{0.5}, {2.0}};
            break;
        case FamilyId::Levy2P:
            raw = {{1.0, -1.0}, {0.3, 2.0}};
            break;
        case FamilyId::LogLogistic2P:
            raw = {{2.0, 1.0}, {4.0, 3.0}, {1.5, 0.5}};
            break;
        case FamilyId::Lognormal2P:
            raw = {{1.0, 0.0}, {1.1515, 1.6653}, {0.3, -1.0}};
            break;
        case FamilyId::Pareto2_2P:
            raw = {{2.0, 1.0}, {1.2, 3.0}, {5.0, 0.5}};
            break;
        case FamilyId::Pearson5_2P:
            raw = {{2.0, 1.0}, {1.5, 3.0}, {3.0, 0.5}};
            break;
        case FamilyId::Pearson5_3P:
            raw = {{2.0, 1.0, -1.0}, {4.0, 2.0, 3.0}};
            break;
        case FamilyId::Pearson6_3P:
            raw = {{2.0, 3.0, 1.0}, {0.8, 1.5, 2.0}, {5.0, 2.0, 0.5}};
            break;
        case FamilyId::PhasedBiExponential4P:
            raw = {{1.0, 0.3, 0.0, 2.0}, {0.2, 2.0, -1.0, 5.0}};
            break;
        case FamilyId::Weibull2P:
            raw = {{1.5, 1.0}, {0.7, 3.0}, {4.0, 10.0}};
            break;
    }
    std::vector<ParamVector> out;
    for (auto& v : raw) out.emplace_back(f, std::move(v));
    return out;
}

// Integral of the density over its support, split at the median and at the
// phase change of the bi-exponential.
inline double total_mass(const ParamVector& p) {
    const auto s = distfit::support(p);
    std::vector<double> cuts{distfit::quantile(p, 0.5)};
    if (p.family() == FamilyId::PhasedBiExponential4P) cuts.push_back(p[3]);
    std::sort(cuts.begin(), cuts.end());
    auto f = [&](double x) { return distfit::pdf(p, x); };
    constexpr double tol = 1e-12;

    boost::math::quadrature::tanh_sinh<double> finite;
    boost::math::quadrature::exp_sinh<double> half_line;
    double total = 0.0;
    if (std::isfinite(s.lower)) {
        total += finite.integrate(f, s.lower, cuts.front(), tol);
    } else {
        total += half_line.integrate(f, -std::numeric_limits<double>::infinity(), cuts.front(), tol);
    }
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += finite.integrate(f, cuts[i], cuts[i + 1], tol);
    if (std::isfinite(s.upper)) {
        total += finite.integrate(f, cuts.back(), s.upper, tol);
    } else {
        total += half_line.integrate(f, cuts.back(), std::numeric_limits<double>::infinity(), tol);
    }
    return total;
}

// P(D_n < d) by Steck's determinant: P(u_i < U_(i) < v_i for all i) =
// n! det[(v_i - u_j)_+^(j-i+1) / (j-i+1)!], entries zero below the subdiagonal.
// The determinant cancels heavily, so it is evaluated with 50 decimal digits.
inline double steck_kolmogorov_cdf(std::size_t n, double d) {
    using real = boost::multiprecision::cpp_bin_float_50;
    const real dd = d;
    std::vector<real> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = std::max<real>(real(0), real(i + 1) / n - dd);
        v[i] = std::min<real>(real(1), real(i) / n + dd);
    }
    std::vector<std::vector<real>> a(n, std::vector<real>(n, real(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const long k = static_cast<long>(j) - static_cast<long>(i) + 1;
            if (k < 0) continue;
            const real base = std::max<real>(real(0), v[i] - u[j]);
            real term = 1;
            for (long t = 1; t <= k; ++t) term *= base / t;
            a[i][j] = term;
        }
    }
    // Gaussian elimination with partial pivoting.
    real det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
        }
        if (a[piv][c] == 0) return 0.0;
        if (piv != c) {
            std::swap(a[piv], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            const real factor = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= factor * a[c][k];
        }
    }
    for (std::size_t i = 1; i <= n; ++i) det *= i;
    return static_cast<double>(det);
}

// Sorted edge weights of a minimum spanning tree (Prim).
inline std::vector<double> mst_weights(const std::vector<std::vector<double>>& d) {
    const std::size_t n = d.size();
    std::vector<bool> in(n, false);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    best[0] = 0.0;
    std::vector<double> weights;
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!in[i] && (pick == n || best[i] < best[pick])) pick = i;
        }
        in[pick] = true;
        if (step > 0) weights.push_back(best[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            if (!in[i]) best[i] = std::min(best[i], d[pick][i]);
        }
    }
    std::sort(weights.begin(), weights.end());
    return weights;
}

// Symmetric matrix of i.i.d. uniform distances in (0, 1).
inline std::vector<std::vector<double>> random_distances(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = unif(rng);
    }
    return d;
}

// (1/(1-alpha)) ln of the integral of f^alpha for a lognormal, in log space.
inline double renyi_by_quadrature(double sigma, double mu, double alpha) {
    auto integrand = [&](double y) {
        const double z = (y - mu) / sigma;
        const double log_f = -0.5 * z * z - std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) - y;
        return std::exp(alpha * log_f + y);
    };
    boost::math::quadrature::sinh_sinh<double> integrator;
    return std::log(integrator.integrate(integrand, 1e-13)) / (1.0 - alpha);
}

// Moments E[(X - c)^k] of a lognormal by quadrature over z = (ln x - mu) / sigma.
// The integrand peaks near z = k sigma, well inside [-40, 40 + 4 sigma].
inline double lognormal_moment(double sigma, double mu, int k, double c) {
    auto integrand = [&](double z) {
        const double t = std::exp(mu + sigma * z) - c;
        if (t == 0.0) return 0.0;
        const double mag = std::exp(k * std::log(std::fabs(t)) - 0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        return (t < 0.0 && k % 2 == 1) ? -mag : mag;
    };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -40.0, 40.0 + 4.0 * sigma, 15,
                                                                         1e-14);
}

inline double draw_unit(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// P-values of one test over `reps` samples of size n drawn from `model`
// and tested against the same, fully specified model.
inline std::vector<double> null_pvalues(distfit::TestKind kind, const ParamVector& model, std::size_t n,
                                        std::size_t reps, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> ps;
    std::vector<double> xs(n);
    for (std::size_t r = 0; r < reps; ++r) {
        for (double& x : xs) x = distfit::quantile(model, draw_unit(rng));
        switch (kind) {
            case distfit::TestKind::KS:
                ps.push_back(distfit::ks_test(xs, model).pvalue);
                break;
            case distfit::TestKind::AD:
                ps.push_back(distfit::ad_test(xs, model).pvalue);
                break;
            case distfit::TestKind::CS:
                ps.push_back(distfit::cs_test(xs, model).pvalue);
                break;
        }
    }
    return ps;
}

// Kolmogorov-Smirnov p-value of the hypothesis that `ps` are U(0, 1).
inline double uniformity_pvalue(const std::vector<double>& ps) {
    return distfit::kolmogorov_pvalue(ps.size(), distfit::ks_statistic(ps));
}

// Upper tail of chi-square with even df = 2m: e^{-x/2} sum_{j<m} (x/2)^j / j!.
inline double chi_square_even_sf(double x, unsigned m) {
    double term = 1.0, sum = 1.0;
    for (unsigned j = 1; j < m; ++j) {
        term *= 0.5 * x / j;
        sum += term;
    }
    return std::exp(-0.5 * x) * sum;
}

}  // namespace oracle
