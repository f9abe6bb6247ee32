#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tflocal::special {

namespace detail {

constexpr double kEps = 1.0e-15;
constexpr int kMaxIter = 500;
// exp() underflows to 0 below this; treated as an exact 0/1 limit.
constexpr double kExpUnderflow = -709.78;

// Series for the regularized lower incomplete gamma, valid for x < s + 1.
inline double lower_gamma_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    for (int k = 1; k < kMaxIter; ++k) {
        term *= x / (s + k);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) {
            double lg = s * std::log(x) - x - std::lgamma(s);
            if (lg < kExpUnderflow) return 0.0;
            return sum * std::exp(lg);
        }
    }
    throw std::runtime_error("lower incomplete gamma series did not converge");
}

// Modified Lentz continued fraction for the regularized upper gamma,
// valid for x >= s + 1.
inline double upper_gamma_cf(double s, double x) {
    const double tiny = 1.0e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        double an = -i * (i - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) {
            double lg = s * std::log(x) - x - std::lgamma(s);
            if (lg < kExpUnderflow) return 0.0;
            return std::exp(lg) * h;
        }
    }
    throw std::runtime_error("upper incomplete gamma continued fraction did not converge");
}

// Continued fraction for the incomplete beta (Numerical Recipes betacf).
inline double beta_cf(double a, double b, double x) {
    const double tiny = 1.0e-300;
    double qab = a + b;
    double qap = a + 1.0;
    double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// P(s, x) = gamma(s, x) / Gamma(s), the regularized lower incomplete gamma.
inline double regularized_lower_gamma(double s, double x) {
    if (!(s > 0.0)) throw std::domain_error("regularized_lower_gamma: s must be positive");
    if (std::isinf(x) && x > 0.0) return 1.0;
    if (!(x >= 0.0)) throw std::domain_error("regularized_lower_gamma: x must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x < s + 1.0) return detail::lower_gamma_series(s, x);
    return 1.0 - detail::upper_gamma_cf(s, x);
}

// I_x(a, b), the regularized incomplete beta function.
inline double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::domain_error("regularized_incomplete_beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("regularized_incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double lbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                 a * std::log(x) + b * std::log1p(-x);
    double bt = lbt < detail::kExpUnderflow ? 0.0 : std::exp(lbt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::beta_cf(a, b, x) / a;
    return 1.0 - bt * detail::beta_cf(b, a, 1.0 - x) / b;
}

// L2(R)-orthonormal Hermite functions for the Gaussian window convention
// h_0(t) = 2^{1/4} exp(-pi t^2). Values for orders 0..nmax at a point t,
// by the normalized three-term recurrence (no factorial is ever formed).
inline std::vector<double> hermite_fn_sequence(int nmax, double t) {
    if (nmax < 0) throw std::domain_error("hermite_fn_sequence: nmax must be nonnegative");
    std::vector<double> h(static_cast<std::size_t>(nmax) + 1);
    const double x = std::sqrt(2.0 * std::numbers::pi) * t;
    h[0] = std::pow(2.0, 0.25) * std::exp(-std::numbers::pi * t * t);
    if (nmax == 0) return h;
    h[1] = x * std::numbers::sqrt2 * h[0];
    for (int n = 1; n < nmax; ++n)
        h[n + 1] = x * std::sqrt(2.0 / (n + 1)) * h[n] - std::sqrt(n / (n + 1.0)) * h[n - 1];
    return h;
}

inline double hermite_fn(int n, double t) { return hermite_fn_sequence(n, t)[n]; }

// Generalized Laguerre polynomial L_n^alpha(x) by the stable upward
// recurrence (n+1) L_{n+1} = (2n+1+alpha-x) L_n - (n+alpha) L_{n-1}.
inline double laguerre_poly(int n, double alpha, double x) {
    if (n < 0) throw std::domain_error("laguerre_poly: n must be nonnegative");
    if (!(alpha > -1.0)) throw std::domain_error("laguerre_poly: alpha must exceed -1");
    double lm1 = 1.0;
    if (n == 0) return lm1;
    double l = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        double lp1 = ((2.0 * k + 1.0 + alpha - x) * l - (k + alpha) * lm1) / (k + 1.0);
        lm1 = l;
        l = lp1;
    }
    return l;
}

// Laguerre function l_n^alpha(x) = exp(-x/2) x^{alpha/2} L_n^alpha(x) on
// [0, inf); the weight makes distinct orders orthogonal in L2(0, inf).
inline double laguerre_fn(int n, double alpha, double x) {
    if (!(alpha >= 0.0)) throw std::domain_error("laguerre_fn: alpha must be nonnegative");
    if (!(x >= 0.0)) throw std::domain_error("laguerre_fn: x must be nonnegative");
    if (x == 0.0) return alpha == 0.0 ? laguerre_poly(n, alpha, 0.0) : 0.0;
    return std::exp(-0.5 * x) * std::pow(x, 0.5 * alpha) * laguerre_poly(n, alpha, x);
}

}  // namespace tflocal::special
