#pragma once

// Independent test oracles. These deliberately avoid the library's own code
// paths so derived expectations are checked against first principles.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oracles {

inline double normal_pdf(double x, double mu, double sigma) {
    const double z = (x - mu) / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * 3.14159265358979323846));
}

// Mean of a normal truncated to [lo, hi], by composite Simpson quadrature.
inline double truncated_normal_mean(double mu, double sigma, double lo, double hi,
                                    int intervals = 20000) {
    if (intervals % 2) ++intervals;
    const double h = (hi - lo) / intervals;
    double mass = 0.0;
    double first_moment = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double x = lo + h * i;
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double f = normal_pdf(x, mu, sigma);
        mass += w * f;
        first_moment += w * x * f;
    }
    return first_moment / mass;
}

inline double binomial_coefficient(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

// E[min(C, n - C)] for C ~ Binomial(n, p), by exact enumeration.
inline double expected_min_pairs(int n, double p) {
    double e = 0.0;
    for (int c = 0; c <= n; ++c) {
        const double prob =
            binomial_coefficient(n, c) * std::pow(p, c) * std::pow(1.0 - p, n - c);
        e += prob * std::min(c, n - c);
    }
    return e;
}

// Minimal independent rational/decimal reader for verifier cross-checks.
inline std::optional<long double> read_rational(const std::string& s) {
    const auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return std::stold(s);
        const long double num = std::stold(s.substr(0, slash));
        const long double den = std::stold(s.substr(slash + 1));
        if (den == 0.0L) return std::nullopt;
        return num / den;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

struct PairedT {
    double t = 0.0;
    std::size_t n = 0;
};

// One-sided paired t statistic for H1: mean(a - b) > 0.
inline PairedT paired_t(const std::vector<double>& a, const std::vector<double>& b) {
    PairedT out;
    out.n = a.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(a.size());
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(a.size() - 1));
    if (sd == 0.0) {
        out.t = mean > 0.0 ? 1e9 : (mean < 0.0 ? -1e9 : 0.0);
    } else {
        out.t = mean / (sd / std::sqrt(static_cast<double>(a.size())));
    }
    return out;
}

// Critical value for one-sided alpha = 0.05, df = 19 (20 paired seeds).
inline constexpr double kTCritical05Df19 = 1.7291;

}  // namespace oracles
