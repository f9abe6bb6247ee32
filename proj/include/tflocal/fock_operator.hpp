#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "tflocal/galerkin.hpp"
#include "tflocal/geometry.hpp"
#include "tflocal/special_functions.hpp"

namespace tflocal::fock {

using geom::cplx;
using geom::kPi;

// log of the monomial normalizer sqrt(pi^n / n!) for the Gaussian measure
inline double log_monomial_coeff(int n) {
    return 0.5 * (n * std::log(kPi) - std::lgamma(n + 1.0));
}

// e_n(z) = sqrt(pi^n / n!) z^n, evaluated through logs so large n and |z|
// cannot overflow intermediates.
inline cplx normalized_monomial(int n, cplx z) {
    if (n < 0) throw std::domain_error("normalized_monomial: n must be nonnegative");
    if (n == 0) return {1.0, 0.0};
    if (z == cplx(0.0, 0.0)) return {0.0, 0.0};
    double lmag = log_monomial_coeff(n) + n * std::log(std::abs(z));
    return std::polar(std::exp(lmag), n * std::arg(z));
}

// Eigenvalues of the indicator operator of Disk(0, R): P(n+1, pi R^2).
inline Eigen::VectorXd disk_spectrum_closed(double R, int basis_size) {
    if (!(R > 0.0)) throw std::domain_error("disk_spectrum_closed: R must be positive");
    Eigen::VectorXd lam(basis_size);
    for (int n = 0; n < basis_size; ++n)
        lam[n] = special::regularized_lower_gamma(n + 1.0, kPi * R * R);
    return lam;
}

// Eigenvalues of the indicator operator of a centered annulus.
inline Eigen::VectorXd annulus_spectrum_closed(double r_inner, double r_outer, int basis_size) {
    if (!(r_inner >= 0.0 && r_inner < r_outer))
        throw std::domain_error("annulus_spectrum_closed: need 0 <= r_inner < r_outer");
    Eigen::VectorXd lam(basis_size);
    for (int n = 0; n < basis_size; ++n) {
        double outer = special::regularized_lower_gamma(n + 1.0, kPi * r_outer * r_outer);
        double inner = r_inner == 0.0 ? 0.0
                                      : special::regularized_lower_gamma(n + 1.0, kPi * r_inner * r_inner);
        lam[n] = outer - inner;
    }
    return lam;
}

// Galerkin size that keeps truncation error negligible for phase-space
// content inside radius R0.
inline int recommended_basis_size(double bounding_radius) {
    double a = kPi * bounding_radius * bounding_radius;
    return static_cast<int>(std::ceil(a) + std::ceil(8.0 * std::sqrt(a))) + 16;
}

enum class AssemblyRoute { Auto, ForceQuadrature };

// Hermitian section M[m][n] = Int_Omega e_n(z) conj(e_m(z)) e^{-pi|z|^2} dz.
// Discs and annuli centered at the origin diagonalize in closed form; every
// other shape goes through the batched polar quadrature.
inline GalerkinOperator assemble_indicator(const geom::Domain& domain, int basis_size,
                                           const geom::QuadratureSpec& quad,
                                           AssemblyRoute route = AssemblyRoute::Auto) {
    if (route == AssemblyRoute::Auto) {
        if (auto radial = domain.as_centered_radial()) {
            auto [r_in, r_out] = *radial;
            Eigen::VectorXd lam = annulus_spectrum_closed(r_in == 0.0 ? 0.0 : r_in, r_out,
                                                          basis_size);
            GalerkinOperator op;
            op.entries = lam.cast<std::complex<double>>().asDiagonal();
            op.measure = geom::RadialMeasure::fock();
            op.err_estimate = 0.0;
            op.provenance = "closed-form";
            return op;
        }
    }
    return galerkin_detail::assemble_weighted(domain, geom::RadialMeasure::fock(), basis_size,
                                              quad, log_monomial_coeff);
}

// Diagonal spectrum of a purely radial bounded symbol:
// lambda_n = (pi^n/n!) 2 pi Int_0^inf profile(r) r^{2n+1} e^{-pi r^2} dr,
// computed in u = r^2 with the Poisson-kernel factor folded into the
// integrand so no power ever overflows.
inline Eigen::VectorXd radial_symbol_spectrum(
    const std::function<double(double)>& profile, int basis_size,
    const geom::QuadratureSpec& quad, const std::vector<double>& breakpoints = {},
    double support_radius = std::numeric_limits<double>::infinity()) {
    quad.validate();
    if (!(support_radius > 0.0))
        throw std::domain_error("radial_symbol_spectrum: support radius must be positive");
    const double u_max =
        std::min((60.0 + 2.0 * basis_size) / kPi, support_radius * support_radius);
    std::vector<double> ubp;
    for (double r : breakpoints) ubp.push_back(r * r);

    auto eval_level = [&](int level) {
        auto edges = geom::detail::panel_edges(u_max, ubp, std::max(2, quad.radial_nodes / 8),
                                               0, level);
        Eigen::VectorXd lam = Eigen::VectorXd::Zero(basis_size);
        for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
            double mid = 0.5 * (edges[p] + edges[p + 1]);
            double half = 0.5 * (edges[p + 1] - edges[p]);
            for (int g = 0; g < 8; ++g) {
                double u = mid + half * geom::detail::kGlNodes[g];
                double w = geom::detail::kGlWeights[g] * half * profile(std::sqrt(u));
                if (w == 0.0) continue;
                double lpu = std::log(kPi * u);
                for (int n = 0; n < basis_size; ++n)
                    lam[n] += w * std::exp(n * lpu - std::lgamma(n + 1.0) - kPi * u);
            }
        }
        return (kPi * lam).eval();
    };

    Eigen::VectorXd prev = eval_level(0);
    for (int level = 1; level <= quad.max_refinements; ++level) {
        Eigen::VectorXd cur = eval_level(level);
        double err = (cur - prev).cwiseAbs().maxCoeff();
        if (err <= quad.target_abs_tol) return cur;
        if (level == quad.max_refinements)
            throw NonConvergence("radial_symbol_spectrum: refinement stalled", err,
                                 quad.target_abs_tol);
        prev = std::move(cur);
    }
    return prev;
}

// Bounded symbol with an optional single-frequency angular modulation:
// sigma(r e^{i theta}) = sigma0(r) + sigma1(r) * 2 cos(p theta).
struct SymbolFn {
    std::function<double(double)> sigma0;
    std::function<double(double)> sigma1;  // may be empty
    int angular_order = 0;                 // p
    double support_radius = 0.0;           // sigma vanishes beyond this radius
    std::vector<double> breakpoints;       // radii where sigma jumps

    double operator()(cplx z) const {
        double r = std::abs(z);
        if (r > support_radius) return 0.0;
        double v = sigma0 ? sigma0(r) : 0.0;
        if (sigma1 && angular_order > 0)
            v += sigma1(r) * 2.0 * std::cos(angular_order * std::arg(z));
        return v;
    }
};

// M[m][n] = Int sigma(z) e_n(z) conj(e_m(z)) e^{-pi|z|^2} dz over the plane.
// The angular integral is 2 pi on the diagonal (sigma0 part) and 2 pi on the
// two |m - n| = p bands (sigma1 part), so only radial integrals remain:
//   M[n][n]   = pi Int sigma0 exp(n log(pi u) - lgamma(n+1) - pi u) du
//   M[n][n+p] = pi Int sigma1 exp((n + p/2) log(pi u)
//                                 - (lgamma(n+1) + lgamma(n+p+1))/2 - pi u) du
inline GalerkinOperator assemble_symbol(const SymbolFn& symbol, int basis_size,
                                        const geom::QuadratureSpec& quad) {
    if (!(symbol.support_radius > 0.0))
        throw std::invalid_argument("assemble_symbol: symbol needs a positive support radius");
    quad.validate();
    const int N = basis_size;
    const int p = symbol.angular_order;
    const bool banded = static_cast<bool>(symbol.sigma1) && p > 0 && p < N;
    const double rsup = symbol.support_radius;
    const double u_max = std::min(rsup * rsup, (60.0 + 2.0 * (2.0 * N - 2.0 + p)) / kPi);
    std::vector<double> ubp;
    for (double r : symbol.breakpoints) ubp.push_back(r * r);

    auto eval_level = [&](int level) {
        auto edges = geom::detail::panel_edges(u_max, ubp, std::max(2, quad.radial_nodes / 8),
                                               0, level);
        Eigen::VectorXd diag = Eigen::VectorXd::Zero(N);
        Eigen::VectorXd band = Eigen::VectorXd::Zero(banded ? N - p : 0);
        for (std::size_t pp = 0; pp + 1 < edges.size(); ++pp) {
            double mid = 0.5 * (edges[pp] + edges[pp + 1]);
            double half = 0.5 * (edges[pp + 1] - edges[pp]);
            for (int g = 0; g < 8; ++g) {
                double u = mid + half * geom::detail::kGlNodes[g];
                double r = std::sqrt(u);
                if (r > rsup) continue;
                double w = geom::detail::kGlWeights[g] * half;
                double lpu = std::log(kPi * u);
                double s0 = symbol.sigma0 ? symbol.sigma0(r) : 0.0;
                if (s0 != 0.0) {
                    for (int n = 0; n < N; ++n)
                        diag[n] += w * s0 * std::exp(n * lpu - std::lgamma(n + 1.0) - kPi * u);
                }
                if (banded) {
                    double s1 = symbol.sigma1(r);
                    if (s1 != 0.0) {
                        for (int n = 0; n + p < N; ++n)
                            band[n] += w * s1 *
                                       std::exp((n + 0.5 * p) * lpu -
                                                0.5 * (std::lgamma(n + 1.0) +
                                                       std::lgamma(n + p + 1.0)) -
                                                kPi * u);
                    }
                }
            }
        }
        return std::make_pair((kPi * diag).eval(), (kPi * band).eval());
    };

    auto [diag, band] = eval_level(0);
    double err = 0.0;
    bool converged = false;
    for (int level = 1; level <= quad.max_refinements; ++level) {
        auto [d2, b2] = eval_level(level);
        err = (d2 - diag).cwiseAbs().maxCoeff();
        if (banded) err = std::max(err, (b2 - band).cwiseAbs().maxCoeff());
        diag = std::move(d2);
        band = std::move(b2);
        if (err <= quad.target_abs_tol) {
            converged = true;
            break;
        }
        if (level == quad.max_refinements)
            throw NonConvergence("assemble_symbol: refinement stalled", err,
                                 quad.target_abs_tol);
    }
    (void)converged;

    GalerkinOperator op;
    op.entries = Eigen::MatrixXcd::Zero(N, N);
    for (int n = 0; n < N; ++n) op.entries(n, n) = diag[n];
    if (banded) {
        for (int n = 0; n + p < N; ++n) {
            op.entries(n + p, n) = band[n];
            op.entries(n, n + p) = band[n];
        }
    }
    op.measure = geom::RadialMeasure::fock();
    op.err_estimate = err;
    op.provenance = "radial-quadrature";
    return op;
}

namespace detail {

// Int_x^y r^q e^{-pi r^2} dr through the regularized lower gamma.
inline double gaussian_radial_moment(double q, double x, double y) {
    double s = 0.5 * (q + 1.0);
    double scale = 0.5 * std::exp(std::lgamma(s) - s * std::log(kPi));
    double hi = special::regularized_lower_gamma(s, kPi * y * y);
    double lo = x == 0.0 ? 0.0 : special::regularized_lower_gamma(s, kPi * x * x);
    return scale * (hi - lo);
}

}  // namespace detail

// Nonnegative, manifestly non-radial symbol whose localization operator still
// has e_{n_target} as an exact eigenvector. The modulated part is +1 on
// [a, c) and -beta on [c, b]; beta is root-solved so the coupling moment of
// order 3*n_target + 2 vanishes, which deletes the only off-diagonal entry in
// column n_target. The radial part 2*max(1, beta) keeps sigma >= 0.
struct CounterexampleSymbol {
    SymbolFn symbol;
    int n_target;
    double a, b, c;
    double beta;
    double moment_residual;  // leftover of the vanishing-moment constraint
};

inline CounterexampleSymbol build_counterexample_symbol(int n_target, double a = 0.3,
                                                        double b = 1.5,
                                                        std::optional<double> split = {}) {
    if (n_target < 0) throw std::domain_error("build_counterexample_symbol: n_target >= 0");
    if (!(0.0 <= a && a < b))
        throw std::invalid_argument("build_counterexample_symbol: need 0 <= a < b");
    const double q = 3.0 * n_target + 2.0;

    double c = split.value_or(0.5 * (a + b));
    if (!(a < c && c < b))
        throw std::invalid_argument("build_counterexample_symbol: split must lie inside (a, b)");

    auto constraint = [&](double cc, double beta) {
        return detail::gaussian_radial_moment(q, a, cc) -
               beta * detail::gaussian_radial_moment(q, cc, b);
    };

    // Expanding-bracket bisection in beta; if the split leaves no room to
    // bracket, retry with c pulled toward the midpoint of [a, b].
    double beta = -1.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        double lo = 0.0, hi = 1.0;
        bool bracketed = false;
        for (int k = 0; k < 60; ++k) {
            if (constraint(c, hi) < 0.0) {
                bracketed = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        if (bracketed) {
            for (int k = 0; k < 200; ++k) {
                double mid = 0.5 * (lo + hi);
                (constraint(c, mid) > 0.0 ? lo : hi) = mid;
            }
            beta = 0.5 * (lo + hi);
            break;
        }
        c = 0.5 * (c + 0.5 * (a + b));
    }
    if (beta < 0.0)
        throw RootNotBracketed("build_counterexample_symbol: could not bracket beta");

    double scale = detail::gaussian_radial_moment(q, a, b);
    double resid = std::fabs(constraint(c, beta)) / scale;
    if (resid > 1e-12)
        throw NonConvergence("build_counterexample_symbol: moment constraint not met", resid,
                             1e-12);

    CounterexampleSymbol out;
    out.n_target = n_target;
    out.a = a;
    out.b = b;
    out.c = c;
    out.beta = beta;
    out.moment_residual = resid;
    double cc = c, bb = b, aa = a, bet = beta;
    out.symbol.sigma0 = [aa, bb, bet](double r) {
        return (r >= aa && r <= bb) ? 2.0 * std::max(1.0, bet) : 0.0;
    };
    out.symbol.sigma1 = [aa, cc, bb, bet](double r) {
        if (r < aa || r > bb) return 0.0;
        return r < cc ? 1.0 : -bet;
    };
    out.symbol.angular_order = n_target + 1;
    out.symbol.support_radius = b;
    out.symbol.breakpoints = {a, c, b};
    return out;
}

}  // namespace tflocal::fock
