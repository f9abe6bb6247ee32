#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tflocal/errors.hpp"
#include "tflocal/geometry.hpp"
#include "tflocal/special_functions.hpp"

// The inverse side of the laboratory: treat an operator as a black box,
// probe it with basis vectors, and decide from the responses whether the
// hidden symbol can be the indicator of a centered disk, of a centered
// ring, or of nothing radial at all. Every verdict is conditional on the
// caller's prior that the symbol is an indicator of a simply connected
// (or nested-Jordan) set; the report carries that caveat verbatim.
namespace tflocal::probe {

using cplx = std::complex<double>;
constexpr double kPi = geom::kPi;

inline constexpr const char* kVerdictCaveat =
    "assuming the symbol is an indicator of a simply connected set";

// Which orthonormal family the black box is expressed in. The radial
// eigenvalue model differs: lowered-Gamma mass of a disk for the Gaussian
// plane, lowered-Beta mass for the weighted unit disc.
struct BasisTag {
    enum class Kind { Fock, Bergman };
    Kind kind = Kind::Fock;
    double alpha = 0.0;

    static BasisTag fock() { return {Kind::Fock, 0.0}; }
    static BasisTag bergman(double alpha) {
        if (!(alpha > -1.0)) throw std::domain_error("BasisTag: alpha must exceed -1");
        return {Kind::Bergman, alpha};
    }
};

// Opaque linear map on coefficient vectors. Only `action` is ever called;
// the laboratory never looks inside.
struct BlackBox {
    int dimension = 0;
    std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)> action;
    BasisTag basis = BasisTag::fock();

    void validate() const {
        if (dimension < 1) throw std::invalid_argument("BlackBox: dimension must be positive");
        if (!action) throw std::invalid_argument("BlackBox: action must be callable");
    }
};

inline BlackBox black_box_from_matrix(Eigen::MatrixXcd m, BasisTag tag = BasisTag::fock()) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument("black_box_from_matrix: need a square nonempty matrix");
    auto held = std::make_shared<const Eigen::MatrixXcd>(std::move(m));
    BlackBox box;
    box.dimension = static_cast<int>(held->rows());
    box.action = [held](const Eigen::VectorXcd& v) -> Eigen::VectorXcd { return *held * v; };
    box.basis = tag;
    return box;
}

inline BlackBox black_box_from_spectrum(const Eigen::VectorXd& lambda,
                                        BasisTag tag = BasisTag::fock()) {
    return black_box_from_matrix(lambda.cast<cplx>().asDiagonal().toDenseMatrix(), tag);
}

// Linearity certificate on two fixed pseudo-random probes. A localization
// operator is linear by construction, so any violation means the box under
// test is not the kind of system the procedure is about.
inline void verify_linearity(const BlackBox& box) {
    box.validate();
    std::mt19937 rng(0x51f0c3u);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(box.dimension), w(box.dimension);
    for (int i = 0; i < box.dimension; ++i) {
        v[i] = cplx(gauss(rng), gauss(rng));
        w[i] = cplx(gauss(rng), gauss(rng));
    }
    const cplx a(0.6, -1.1), b(-0.8, 0.35);
    Eigen::VectorXcd mixed = box.action(a * v + b * w);
    Eigen::VectorXcd split = a * box.action(v) + b * box.action(w);
    double bound = 1e-9 * (std::abs(a) * v.norm() + std::abs(b) * w.norm());
    if ((mixed - split).norm() > bound)
        throw std::invalid_argument("BlackBox: action failed the linearity check");
}

struct ProbeRecord {
    int n = 0;
    double lambda_est = 0.0;  // Re <T delta_n, delta_n>
    double residual = 0.0;    // ||T delta_n - lambda_est delta_n||_2
    double lambda_imag = 0.0; // sanity diagnostic; ~0 for self-adjoint boxes
};

// Response of the box to the n-th basis vector. The guard band keeps the
// probe away from the truncation edge, where a finite section of an
// infinite operator sheds tail mass into the residual.
inline ProbeRecord probe_residual(const BlackBox& box, int n) {
    box.validate();
    if (n < 0) throw std::domain_error("probe_residual: index must be nonnegative");
    if (n > box.dimension - 8)
        throw TruncationRisk("probe_residual: index " + std::to_string(n) +
                             " is inside the truncation guard band of dimension " +
                             std::to_string(box.dimension));
    Eigen::VectorXcd delta = Eigen::VectorXcd::Zero(box.dimension);
    delta[n] = 1.0;
    Eigen::VectorXcd y = box.action(delta);
    if (y.size() != box.dimension)
        throw std::invalid_argument("probe_residual: action changed the dimension");
    ProbeRecord rec;
    rec.n = n;
    rec.lambda_est = y[n].real();
    rec.lambda_imag = y[n].imag();
    y[n] -= rec.lambda_est;
    rec.residual = y.norm();
    return rec;
}

namespace detail {

// lambda(n; r) of a centered disk of radius r in the given basis; strictly
// increasing in r, strictly decreasing in n, range (0, 1).
inline double radial_disk_eigenvalue(int n, double r, const BasisTag& tag) {
    if (r <= 0.0) return 0.0;
    if (tag.kind == BasisTag::Kind::Fock)
        return special::regularized_lower_gamma(n + 1.0, kPi * r * r);
    if (r >= 1.0) return 1.0;
    return special::regularized_incomplete_beta(n + 1.0, tag.alpha + 1.0, r * r);
}

}  // namespace detail

// Unique r with lambda(n; r) = lambda_est, by bisection driven to 1e-12 in
// lambda (the model is monotone and smooth, so this is safe and dull).
inline double estimate_radius(double lambda_est, int n, const BasisTag& tag = BasisTag::fock()) {
    if (n < 0) throw std::domain_error("estimate_radius: index must be nonnegative");
    if (!(lambda_est > 0.0) || !(lambda_est < 1.0))
        throw OutOfRange("estimate_radius: eigenvalue must lie strictly inside (0, 1)");
    double lo = 0.0;
    double hi = 1.0;
    if (tag.kind == BasisTag::Kind::Fock) {
        int guard = 0;
        while (detail::radial_disk_eigenvalue(n, hi, tag) < lambda_est && ++guard < 64)
            hi *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double val = detail::radial_disk_eigenvalue(n, mid, tag);
        if (std::abs(val - lambda_est) <= 1e-12) return mid;
        (val < lambda_est ? lo : hi) = mid;
        if (hi - lo < 1e-15 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

struct RingEstimate {
    double r_inner = 0.0;
    double r_outer = 0.0;
};

struct RingFitResult {
    double r_inner = 0.0;
    double r_outer = 0.0;
    double fit_residual = 0.0;  // rms misfit in lambda
};

namespace detail {

inline double ring_model(int n, double r_inner, double r_outer, const BasisTag& tag) {
    return radial_disk_eigenvalue(n, r_outer, tag) - radial_disk_eigenvalue(n, r_inner, tag);
}

inline double ring_sse(const std::vector<std::pair<int, double>>& data, double r_inner,
                       double r_outer, const BasisTag& tag) {
    if (r_inner < 0.0 || r_outer <= r_inner || r_outer > 16.0)
        return std::numeric_limits<double>::infinity();
    double sse = 0.0;
    for (auto [n, lam] : data) {
        double diff = lam - ring_model(n, r_inner, r_outer, tag);
        sse += diff * diff;
    }
    return sse;
}

// Plain two-parameter Nelder-Mead; the objective is a smooth least-squares
// surface with one basin per nondegenerate data set, and the caller seeds
// it from a coarse grid, so no restarts are needed.
inline std::pair<Eigen::Vector2d, double> nelder_mead_ring(
    const std::vector<std::pair<int, double>>& data, Eigen::Vector2d seed, const BasisTag& tag) {
    auto f = [&](const Eigen::Vector2d& p) { return ring_sse(data, p[0], p[1], tag); };
    std::array<Eigen::Vector2d, 3> pts = {seed, seed + Eigen::Vector2d(0.05, 0.0),
                                          seed + Eigen::Vector2d(0.0, 0.05)};
    std::array<double, 3> val = {f(pts[0]), f(pts[1]), f(pts[2])};
    for (int it = 0; it < 400; ++it) {
        std::array<int, 3> order = {0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return val[a] < val[b]; });
        std::array<Eigen::Vector2d, 3> p = {pts[order[0]], pts[order[1]], pts[order[2]]};
        std::array<double, 3> v = {val[order[0]], val[order[1]], val[order[2]]};
        pts = p;
        val = v;
        if (val[2] - val[0] < 1e-24 && (pts[2] - pts[0]).norm() < 1e-10) break;

        Eigen::Vector2d centroid = 0.5 * (pts[0] + pts[1]);
        Eigen::Vector2d refl = centroid + (centroid - pts[2]);
        double fr = f(refl);
        if (fr < val[0]) {
            Eigen::Vector2d expand = centroid + 2.0 * (centroid - pts[2]);
            double fe = f(expand);
            if (fe < fr) { pts[2] = expand; val[2] = fe; }
            else { pts[2] = refl; val[2] = fr; }
        } else if (fr < val[1]) {
            pts[2] = refl;
            val[2] = fr;
        } else {
            Eigen::Vector2d contr = centroid + 0.5 * (pts[2] - centroid);
            double fc = f(contr);
            if (fc < val[2]) { pts[2] = contr; val[2] = fc; }
            else {
                for (int i = 1; i < 3; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    int best = std::min_element(val.begin(), val.end()) - val.begin();
    return {pts[best], val[best]};
}

}  // namespace detail

// Least-squares fit of a single centered ring to a radial eigenvalue
// profile: minimize sum_n (lambda_n - [lambda(n; r_out) - lambda(n; r_in)])^2
// over 0 <= r_in < r_out, grid-seeded and locally refined. Disk data comes
// back with r_in at zero; profiles no single ring can explain end in
// FitFailure, which callers downgrade to an inconclusive verdict.
inline RingFitResult ring_fit(const std::vector<std::pair<int, double>>& lambdas,
                              BasisTag tag = BasisTag::fock(), double fit_tol = 1e-4) {
    if (lambdas.size() < 3)
        throw std::invalid_argument("ring_fit: need at least three probe responses");
    double r_cap = tag.kind == BasisTag::Kind::Bergman ? 1.0 : 2.5;
    Eigen::Vector2d best_seed(0.0, r_cap);
    double best_sse = std::numeric_limits<double>::infinity();
    const int steps = 50;
    for (int i = 0; i < steps; ++i) {
        double r_out = r_cap * (i + 1.0) / steps;
        for (int j = 0; j < i + 1; ++j) {
            double r_in = r_cap * j / steps;
            double sse = detail::ring_sse(lambdas, r_in, r_out, tag);
            if (sse < best_sse) {
                best_sse = sse;
                best_seed = {r_in, r_out};
            }
        }
    }
    auto [pt, sse] = detail::nelder_mead_ring(lambdas, best_seed, tag);
    RingFitResult fit;
    fit.r_inner = std::max(0.0, pt[0]);
    fit.r_outer = pt[1];
    fit.fit_residual = std::sqrt(sse / static_cast<double>(lambdas.size()));
    if (!(fit.fit_residual <= fit_tol))
        throw FitFailure("ring_fit: no centered ring explains the profile", fit.fit_residual);
    return fit;
}

enum class Verdict { DiskCentered, RadialMultiRing, NotRadial, Inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::DiskCentered: return "DiskCentered";
        case Verdict::RadialMultiRing: return "RadialMultiRing";
        case Verdict::NotRadial: return "NotRadial";
        default: return "Inconclusive";
    }
}

struct ProbeReport {
    std::vector<ProbeRecord> probes;
    Verdict verdict = Verdict::Inconclusive;
    std::optional<double> radius_estimate;     // present iff DiskCentered
    std::vector<RingEstimate> ring_estimates;  // nonempty iff RadialMultiRing
    double consistency = 0.0;                  // spread of the per-probe radii
    double fit_residual = 0.0;                 // rms misfit of the ring fit, if attempted
    bool spectrum_out_of_range = false;        // some lambda_est outside (0, 1)
    std::string caveat = kVerdictCaveat;
};

// The identification protocol. Probe the box along the given basis indices,
// then decide:
//   (i)  any residual above tol, relative to the largest response:
//        no probe is an eigenvector, so the symbol is NotRadial;
//   (ii) all residuals small and the per-probe radius inversions agree:
//        DiskCentered with the mean radius;
//   (iii) residuals small but radii inconsistent: try one centered ring,
//        RadialMultiRing on success;
//   (iv) anything else: Inconclusive, with the lambda profile attached.
// The threshold is relative to max |lambda| so rescaling the box by c > 0
// cannot flip the radial/non-radial discrimination.
inline ProbeReport disk_verdict(const BlackBox& box, std::vector<int> probes = {},
                                double tol = 1e-6, double consistency_tol = 1e-3,
                                double fit_tol = 1e-4) {
    box.validate();
    verify_linearity(box);
    if (probes.empty())
        for (int n = 0; n < 8; ++n) probes.push_back(n);
    if (!(tol > 0.0) || !(consistency_tol > 0.0))
        throw std::invalid_argument("disk_verdict: tolerances must be positive");

    ProbeReport report;
    for (int n : probes) report.probes.push_back(probe_residual(box, n));

    double scale = 0.0;
    for (const auto& rec : report.probes) scale = std::max(scale, std::abs(rec.lambda_est));
    if (scale < 10.0 * tol)
        throw DegenerateSpectrum("disk_verdict: every probe response is numerically zero");

    for (const auto& rec : report.probes) {
        if (rec.residual > tol * scale) {
            report.verdict = Verdict::NotRadial;
            return report;
        }
    }

    std::vector<double> radii;
    std::vector<std::pair<int, double>> profile;
    for (const auto& rec : report.probes) {
        profile.emplace_back(rec.n, rec.lambda_est);
        if (rec.lambda_est > 0.0 && rec.lambda_est < 1.0)
            radii.push_back(estimate_radius(rec.lambda_est, rec.n, box.basis));
        else
            report.spectrum_out_of_range = true;
    }
    if (!radii.empty()) {
        auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
        report.consistency = *hi - *lo;
    }

    if (!report.spectrum_out_of_range && !radii.empty() &&
        report.consistency <= consistency_tol) {
        report.verdict = Verdict::DiskCentered;
        double sum = 0.0;
        for (double r : radii) sum += r;
        report.radius_estimate = sum / static_cast<double>(radii.size());
        return report;
    }

    try {
        RingFitResult fit = ring_fit(profile, box.basis, fit_tol);
        report.fit_residual = fit.fit_residual;
        report.verdict = Verdict::RadialMultiRing;
        report.ring_estimates.push_back({fit.r_inner, fit.r_outer});
    } catch (const FitFailure& e) {
        report.fit_residual = e.residual();
        report.verdict = Verdict::Inconclusive;
    } catch (const std::invalid_argument&) {
        report.verdict = Verdict::Inconclusive;  // fewer than three probes
    }
    return report;
}

struct DoubleOrthReport {
    bool pass = false;
    int worst_k = 0;
    double worst_value = 0.0;
};

// Forward certificate of the double-orthogonality hypothesis: a radial
// domain makes every moment Int_Omega |z|^{2m} conj(z)^k dmu vanish for
// k >= 1; the largest such moment over k = 1..k_max is the certificate.
inline DoubleOrthReport double_orth_test(const geom::Domain& domain,
                                         const geom::RadialMeasure& mu, int m, int k_max,
                                         double tol,
                                         const geom::QuadratureSpec& quad = {}) {
    if (k_max < 1) throw std::invalid_argument("double_orth_test: k_max must be at least 1");
    if (!(tol > 0.0)) throw std::invalid_argument("double_orth_test: tol must be positive");
    DoubleOrthReport report;
    report.worst_k = 1;
    for (int k = 1; k <= k_max; ++k) {
        double mag = std::abs(geom::monomial_moment(domain, mu, m, k, quad).value);
        if (mag > report.worst_value) {
            report.worst_value = mag;
            report.worst_k = k;
        }
    }
    report.pass = report.worst_value <= tol;
    return report;
}

}  // namespace tflocal::probe
