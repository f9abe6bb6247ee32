#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

#include "tflocal/errors.hpp"
#include "tflocal/galerkin.hpp"
#include "tflocal/geometry.hpp"
#include "tflocal/special_functions.hpp"

namespace tflocal::bergman {

using geom::cplx;
using geom::kPi;

struct BergmanParams {
    double alpha = 0.0;
    int basis_size = 16;

    void validate() const {
        if (!(alpha > -1.0))
            throw std::invalid_argument("BergmanParams: alpha must exceed -1");
        if (basis_size < 1)
            throw std::invalid_argument("BergmanParams: basis size must be positive");
    }
};

// Pseudohyperbolic disc of the upper half plane:
// {u : |u - center| / |u - conj(center)| < rho}.
struct PseudoDisk {
    cplx center{0.0, 1.0};
    double rho = 0.5;

    void validate() const {
        if (!(center.imag() > 0.0))
            throw std::invalid_argument("PseudoDisk: center must lie in the upper half plane");
        if (!(rho > 0.0 && rho < 1.0))
            throw std::invalid_argument("PseudoDisk: rho must lie in (0,1)");
    }
};

// log of the normalizer sqrt(Gamma(n+2+alpha) / (n! Gamma(2+alpha))) that makes
// w^n orthonormal against the weighted disc measure (alpha+1)(1-|w|^2)^alpha dA.
inline double log_basis_coeff(int n, double alpha) {
    return 0.5 *
           (std::lgamma(n + 2.0 + alpha) - std::lgamma(n + 1.0) - std::lgamma(2.0 + alpha));
}

// e_n^alpha(w), evaluated through logs so large n and |w| near 1 stay finite.
inline cplx e_n_alpha(int n, double alpha, cplx w) {
    if (n < 0) throw std::domain_error("e_n_alpha: n must be nonnegative");
    if (!(alpha > -1.0)) throw std::domain_error("e_n_alpha: alpha must exceed -1");
    if (!(std::abs(w) < 1.0))
        throw std::domain_error("e_n_alpha: w must lie inside the unit disc");
    if (n == 0) return {1.0, 0.0};
    if (w == cplx(0.0, 0.0)) return {0.0, 0.0};
    double lmag = log_basis_coeff(n, alpha) + n * std::log(std::abs(w));
    return std::polar(std::exp(lmag), n * std::arg(w));
}

// Concentration of e_n^alpha on the centered disc D_r: I_{r^2}(n+1, alpha+1).
inline double disc_eigenvalue_closed(double r, int n, double alpha) {
    if (n < 0) throw std::domain_error("disc_eigenvalue_closed: n must be nonnegative");
    if (!(alpha > -1.0)) throw std::domain_error("disc_eigenvalue_closed: alpha must exceed -1");
    if (!(r > 0.0 && r <= 1.0))
        throw std::domain_error("disc_eigenvalue_closed: r must lie in (0,1]");
    if (r == 1.0) return 1.0;
    return special::regularized_incomplete_beta(n + 1.0, alpha + 1.0, r * r);
}

inline Eigen::VectorXd disc_spectrum_closed(double r, double alpha, int basis_size) {
    if (basis_size < 1)
        throw std::invalid_argument("disc_spectrum_closed: basis size must be positive");
    Eigen::VectorXd lam(basis_size);
    for (int n = 0; n < basis_size; ++n) lam[n] = disc_eigenvalue_closed(r, n, alpha);
    return lam;
}

enum class AssemblyRoute { Auto, ForceQuadrature };

// Hermitian section M[m][n] = Int_Omega e_n^alpha conj(e_m^alpha) dmu_alpha over
// a domain strictly inside the unit disc. Centered discs and annuli diagonalize
// in closed form; every other shape runs the arc quadrature. The weight is
// unbounded near the boundary for alpha < 0, so a margin of 1e-6 is enforced.
inline GalerkinOperator bergman_galerkin(const geom::Domain& domain, double alpha,
                                         int basis_size, const geom::QuadratureSpec& quad,
                                         AssemblyRoute route = AssemblyRoute::Auto) {
    auto mu = geom::RadialMeasure::bergman(alpha);
    if (basis_size < 1)
        throw std::invalid_argument("bergman_galerkin: basis size must be positive");
    if (!(domain.bounding_radius() <= 1.0 - 1e-6))
        throw std::domain_error("bergman_galerkin: domain must keep a margin inside the unit disc");
    if (route == AssemblyRoute::Auto) {
        if (auto radial = domain.as_centered_radial()) {
            auto [r_in, r_out] = *radial;
            Eigen::VectorXd lam(basis_size);
            for (int n = 0; n < basis_size; ++n) {
                double hi = disc_eigenvalue_closed(r_out, n, alpha);
                double lo = r_in == 0.0 ? 0.0 : disc_eigenvalue_closed(r_in, n, alpha);
                lam[n] = hi - lo;
            }
            GalerkinOperator op;
            op.entries = lam.cast<std::complex<double>>().asDiagonal();
            op.measure = mu;
            op.err_estimate = 0.0;
            op.provenance = "closed-form";
            return op;
        }
    }
    auto log_coeff = [alpha](int n) { return log_basis_coeff(n, alpha); };
    return galerkin_detail::assemble_weighted(domain, mu, basis_size, quad, log_coeff);
}

// ---------------------------------------------------------------------------
// Cayley geometry
// ---------------------------------------------------------------------------

// w = (u - i)/(u + i): upper half plane onto the unit disc, i to 0.
inline cplx cayley_to_disc(cplx u) {
    if (!(u.imag() > 0.0)) throw std::domain_error("cayley_to_disc: Im u must be positive");
    return (u - cplx(0.0, 1.0)) / (u + cplx(0.0, 1.0));
}

// u = i(1 + w)/(1 - w): the inverse map, 0 to i.
inline cplx cayley_to_halfplane(cplx w) {
    if (!(std::abs(w) < 1.0))
        throw std::domain_error("cayley_to_halfplane: w must lie inside the unit disc");
    return cplx(0.0, 1.0) * (1.0 + w) / (1.0 - w);
}

// |(z1 - z2)/(z1 - conj(z2))| on the upper half plane.
inline double rho_halfplane(cplx z1, cplx z2) {
    if (!(z1.imag() > 0.0 && z2.imag() > 0.0))
        throw std::domain_error("rho_halfplane: both points must lie in the upper half plane");
    return std::abs((z1 - z2) / (z1 - std::conj(z2)));
}

// |(w1 - w2)/(1 - w1 conj(w2))| on the unit disc.
inline double rho_disc(cplx w1, cplx w2) {
    if (!(std::abs(w1) < 1.0 && std::abs(w2) < 1.0))
        throw std::domain_error("rho_disc: both points must lie inside the unit disc");
    return std::abs((w1 - w2) / (1.0 - w1 * std::conj(w2)));
}

// A pseudohyperbolic disc maps under Cayley to a pseudohyperbolic disc of the
// unit disc, which is again a Euclidean disc; center and radius in closed form.
inline geom::Domain map_pseudodisk(const PseudoDisk& delta) {
    delta.validate();
    cplx a = cayley_to_disc(delta.center);
    double rho2 = delta.rho * delta.rho;
    double a2 = std::norm(a);
    double denom = 1.0 - rho2 * a2;
    cplx center = a * (1.0 - rho2) / denom;
    double radius = delta.rho * (1.0 - a2) / denom;
    return geom::make_disk(center, radius);
}

// Inverse of map_pseudodisk: the pseudohyperbolic disc of the upper half plane
// whose Euclidean footprint in the unit disc is Disk(center, radius). The
// pseudo-center sits on the ray of the Euclidean center; its signed position t
// solves a Moebius midpoint equation between the two diameter endpoints.
inline PseudoDisk pseudodisk_from_disc(const geom::Disk& footprint) {
    double c = std::abs(footprint.center);
    if (!(footprint.radius > 0.0))
        throw std::domain_error("pseudodisk_from_disc: radius must be positive");
    if (!(c + footprint.radius < 1.0))
        throw std::domain_error("pseudodisk_from_disc: disc must lie inside the unit disc");
    double p = c + footprint.radius;
    double q = c - footprint.radius;
    double t = (p + q) / (1.0 + p * q + std::sqrt((1.0 - p * p) * (1.0 - q * q)));
    double rho = (p - t) / (1.0 - p * t);
    cplx a = c == 0.0 ? cplx(0.0, 0.0) : footprint.center / c * t;
    return PseudoDisk{cayley_to_halfplane(a), rho};
}

// ---------------------------------------------------------------------------
// Laguerre-side identities
// ---------------------------------------------------------------------------

struct LaplaceCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_err = 0.0;
};

namespace detail {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0)
        throw NonConvergence("integrate_line: adaptive depth exhausted", std::abs(delta), tol);
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_line(const std::function<double(double)>& f, double a, double b,
                             double tol) {
    if (!(b > a)) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

// Both sides of Int_0^inf x^alpha L_n^alpha(x) e^{-xs} dx =
// Gamma(alpha+n+1)/n! s^{-alpha-n-1} (s-1)^n. The left side integrates a series
// head on [0, x0] (absorbing the x^alpha endpoint exactly) plus an adaptive
// panel out to where the exponential has died; the right side is closed form.
inline LaplaceCheck laguerre_laplace_check(int n, double alpha, double s) {
    if (n < 0) throw std::domain_error("laguerre_laplace_check: n must be nonnegative");
    if (!(alpha > -1.0))
        throw std::domain_error("laguerre_laplace_check: alpha must exceed -1");
    if (!(s > 1.0)) throw std::domain_error("laguerre_laplace_check: s must exceed 1");

    // coefficients of L_n^alpha: (-1)^k binom(n+alpha, n-k) / k!
    std::vector<double> coeff(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        double lmag = std::lgamma(n + alpha + 1.0) - std::lgamma(k + alpha + 1.0) -
                      std::lgamma(n - k + 1.0) - std::lgamma(k + 1.0);
        coeff[static_cast<std::size_t>(k)] = (k % 2 ? -1.0 : 1.0) * std::exp(lmag);
    }

    const double x0 = 1e-3;
    double head = 0.0;
    double spow = 1.0;  // (-s)^m / m!
    for (int m = 0; m <= 14; ++m) {
        for (int k = 0; k <= n; ++k) {
            double e = alpha + k + m + 1.0;
            head += coeff[static_cast<std::size_t>(k)] * spow * std::exp(e * std::log(x0)) / e;
        }
        spow *= -s / (m + 1.0);
    }

    auto f = [&](double x) {
        return std::pow(x, alpha) * special::laguerre_poly(n, alpha, x) * std::exp(-x * s);
    };
    double T = (50.0 + 6.0 * (n + std::max(alpha, 0.0))) / s;
    double scale = std::max(1.0, std::exp(std::lgamma(alpha + n + 1.0) - std::lgamma(n + 1.0)));

    LaplaceCheck out;
    out.lhs = head + detail::integrate_line(f, x0, T, 1e-12 * scale);
    out.rhs = std::exp(std::lgamma(alpha + n + 1.0) - std::lgamma(n + 1.0)) *
              std::pow(s, -alpha - n - 1.0) * std::pow(s - 1.0, n);
    out.abs_err = std::abs(out.lhs - out.rhs);
    return out;
}

// Fourier-side profile whose half-plane transform has the closed Psi form: the
// order-(alpha+1) Laguerre function at 2t. Normalized so the profile is real
// for every order; global phase and scale constants cancel in the ratio checks
// this feeds.
inline double psi_fourier_side(int n, double alpha, double t) {
    if (n < 0) throw std::domain_error("psi_fourier_side: n must be nonnegative");
    if (!(alpha > -1.0)) throw std::domain_error("psi_fourier_side: alpha must exceed -1");
    if (!(t >= 0.0)) throw std::domain_error("psi_fourier_side: t must be nonnegative");
    double lmag = 0.5 * (std::lgamma(n + 1.0) - (2.0 * alpha + 2.0 * n + 1.0) * std::log(2.0) -
                         std::lgamma(n + 2.0 + alpha) - std::lgamma(2.0 + alpha));
    return std::exp(lmag) * special::laguerre_fn(n, alpha + 1.0, 2.0 * t);
}

// Psi_n^alpha(z) = 4^{-(alpha+1/2)} sqrt(Gamma(n+2+alpha)/(n! Gamma(2+alpha)))
//                  ((z-i)/(z+i))^n (z+i)^{-(alpha+2)}, z in the upper half plane.
inline cplx Psi_n_alpha(int n, double alpha, cplx z) {
    if (n < 0) throw std::domain_error("Psi_n_alpha: n must be nonnegative");
    if (!(alpha > -1.0)) throw std::domain_error("Psi_n_alpha: alpha must exceed -1");
    if (!(z.imag() > 0.0)) throw std::domain_error("Psi_n_alpha: Im z must be positive");
    double lcoeff = -(alpha + 0.5) * std::log(4.0) + log_basis_coeff(n, alpha);
    cplx zi = z + cplx(0.0, 1.0);
    cplx turn = (z - cplx(0.0, 1.0)) / zi;
    return std::exp(lcoeff) * std::pow(turn, n) * std::pow(zi, -(alpha + 2.0));
}

struct BergmanTransform {
    cplx value{0.0, 0.0};
    double truncation_bound = 0.0;  // envelope tail estimate past the cut
};

// Int_0^inf t^{(alpha+1)/2} fhat(t) e^{izt} dt with unit front constant,
// computed in v = sqrt(t) so the endpoint power is smooth. The cut V grows
// until the integrand envelope has decayed to 1e-13 of its peak; the reported
// bound compares the tail against the Gaussian-type factor alone, which is
// valid once the envelope is decreasing.
inline BergmanTransform bergman_transform_numeric(const std::function<double(double)>& fhat,
                                                  double alpha, cplx z) {
    if (!(alpha > -1.0))
        throw std::domain_error("bergman_transform_numeric: alpha must exceed -1");
    if (!(z.imag() > 0.0))
        throw std::domain_error("bergman_transform_numeric: Im z must be positive");
    const double x = z.real(), y = z.imag();

    auto envelope = [&](double v) {
        return 2.0 * std::pow(v, alpha + 2.0) * std::abs(fhat(v * v)) * std::exp(-y * v * v);
    };
    double peak = 0.0;
    double V = std::sqrt(8.0 / y);
    for (int round = 0;; ++round) {
        if (round > 30)
            throw NonConvergence("bergman_transform_numeric: integrand does not decay", peak,
                                 0.0);
        double lo = round == 0 ? 0.0 : V / 2.0;
        for (int i = 0; i <= 64; ++i) peak = std::max(peak, envelope(lo + (V - lo) * i / 64.0));
        if (y * V * V >= 40.0 && envelope(V) <= 1e-13 * peak) break;
        V *= 2.0;
    }

    auto part = [&](bool imag_part) {
        return detail::integrate_line(
            [&](double v) {
                double phase = x * v * v;
                double osc = imag_part ? std::sin(phase) : std::cos(phase);
                return 2.0 * std::pow(v, alpha + 2.0) * fhat(v * v) *
                       std::exp(-y * v * v) * osc;
            },
            0.0, V, 1e-12 * std::max(1.0, peak * V));
    };

    BergmanTransform out;
    out.value = cplx(part(false), part(true));
    out.truncation_bound = envelope(V) / (2.0 * y * V);
    return out;
}

// Pull a half-plane analytic function back to the disc:
// 2^{alpha/2+1} (1-w)^{-(alpha+2)} f(i(1+w)/(1-w)).
inline cplx halfplane_to_disc_pullback(const std::function<cplx(cplx)>& f, double alpha,
                                       cplx w) {
    if (!(alpha > -1.0))
        throw std::domain_error("halfplane_to_disc_pullback: alpha must exceed -1");
    cplx u = cayley_to_halfplane(w);
    return std::exp((0.5 * alpha + 1.0) * std::log(2.0)) *
           std::pow(1.0 - w, -(alpha + 2.0)) * f(u);
}

}  // namespace tflocal::bergman
