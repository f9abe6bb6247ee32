#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <tflocal/bergman_wavelet.hpp>
#include <tflocal/fock_operator.hpp>
#include <tflocal/frame_lab.hpp>
#include <tflocal/galerkin.hpp>
#include <tflocal/geometry.hpp>
#include <tflocal/inverse_probe.hpp>
#include <tflocal/special_functions.hpp>
#include <tflocal/stft.hpp>

namespace tflocal::validate {

using cplx = std::complex<double>;

// End-to-end invariant suite over the whole library: closed-form spectra,
// orthogonality and selection rules, the probe protocol, disc-model geometry,
// transform identities, and the lattice frame experiment. Every check reports
// a worst-case error against an explicit tolerance so a run is auditable from
// its artifact alone.

struct CheckResult {
    int number = 0;
    std::string name;
    bool pass = false;
    double max_error = 0.0;
    double tolerance = 0.0;
    // Set when the failure is attributable to a user tolerance pushed below
    // the quadrature noise floor rather than to a broken invariant.
    bool expected_failure = false;
    std::string detail;
};

struct SuiteOptions {
    unsigned seed = 0;
    double tol = 1e-8;         // closed-form comparison tolerance
    std::vector<int> subset;   // check numbers to run; empty means all
};

namespace suite_detail {

constexpr double kNoiseFloor = 1e-12;

inline std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(3);
    ss << std::scientific << v;
    return ss.str();
}

struct Worst {
    double value = 0.0;
    std::string where;

    void offer(double v, const std::string& w) {
        if (v > value || where.empty()) {
            value = v;
            where = w;
        }
    }
};

// 1. Centered disks: quadrature sections are diagonal and the eigenvalues
//    follow the regularized lower gamma law.
inline CheckResult check_disk_sections(double tol) {
    CheckResult res{1, "disk sections diagonalize with gamma-law spectra"};
    res.tolerance = tol;
    geom::QuadratureSpec quad;
    Worst worst;
    for (double R : {0.5, 1.0, 2.0}) {
        auto op = fock::assemble_indicator(geom::make_disk(0.0, R), 24, quad,
                                           fock::AssemblyRoute::ForceQuadrature);
        double offdiag = 0.0;
        for (int i = 0; i < 24; ++i)
            for (int j = 0; j < 24; ++j)
                if (i != j) offdiag = std::max(offdiag, std::abs(op.entries(i, j)));
        worst.offer(offdiag, "off-diagonal at R=" + fmt(R));
        auto spec = eigendecompose(op);
        Eigen::VectorXd closed = fock::disk_spectrum_closed(R, 24);
        std::sort(closed.data(), closed.data() + closed.size(), std::greater<double>());
        worst.offer((spec.eigenvalues - closed).cwiseAbs().maxCoeff(),
                    "eigenvalue deviation at R=" + fmt(R));
    }
    res.max_error = worst.value;
    res.detail = "worst " + fmt(worst.value) + " (" + worst.where + ")";
    res.pass = worst.value <= tol;
    return res;
}

// 2. Centered annuli: spectra equal the difference of two gamma laws.
inline CheckResult check_annulus_sections(double tol) {
    CheckResult res{2, "annulus spectra match the two-radius gamma difference"};
    res.tolerance = tol;
    geom::QuadratureSpec quad;
    auto op = fock::assemble_indicator(geom::make_annulus(0.5, 1.0), 24, quad,
                                       fock::AssemblyRoute::ForceQuadrature);
    auto spec = eigendecompose(op);
    Eigen::VectorXd closed = fock::annulus_spectrum_closed(0.5, 1.0, 24);
    std::sort(closed.data(), closed.data() + closed.size(), std::greater<double>());
    res.max_error = (spec.eigenvalues - closed).cwiseAbs().maxCoeff();
    res.detail = "worst eigenvalue deviation " + fmt(res.max_error);
    res.pass = res.max_error <= tol;
    return res;
}

// 3. The probe protocol names the hidden shape from basis responses alone.
inline CheckResult check_probe_protocol() {
    CheckResult res{3, "probe protocol recovers disks and annuli, rejects squares"};
    res.tolerance = 1e-4;
    geom::QuadratureSpec quad;
    Worst worst;
    bool verdicts_ok = true;
    std::string bad;
    auto boxed = [&](const geom::Domain& d) {
        auto op = fock::assemble_indicator(d, 48, quad, fock::AssemblyRoute::ForceQuadrature);
        return probe::black_box_from_matrix(op.entries);
    };
    for (double R : {0.4, 0.8, 1.2, 1.6}) {
        auto report = probe::disk_verdict(boxed(geom::make_disk(0.0, R)));
        if (report.verdict != probe::Verdict::DiskCentered || !report.radius_estimate) {
            verdicts_ok = false;
            bad = "disk R=" + fmt(R) + " verdict " + probe::verdict_name(report.verdict);
            continue;
        }
        worst.offer(std::abs(*report.radius_estimate - R), "radius error at R=" + fmt(R));
    }
    auto square = probe::disk_verdict(boxed(geom::make_centered_square(std::sqrt(geom::kPi))));
    if (square.verdict != probe::Verdict::NotRadial) {
        verdicts_ok = false;
        bad = std::string("square verdict ") + probe::verdict_name(square.verdict);
    }
    auto ring = probe::disk_verdict(boxed(geom::make_annulus(0.5, 1.0)));
    if (ring.verdict != probe::Verdict::RadialMultiRing || ring.ring_estimates.empty()) {
        verdicts_ok = false;
        bad = std::string("annulus verdict ") + probe::verdict_name(ring.verdict);
    } else {
        double err = std::max(std::abs(ring.ring_estimates.front().r_inner - 0.5),
                              std::abs(ring.ring_estimates.front().r_outer - 1.0));
        if (err > 1e-3) {
            verdicts_ok = false;
            bad = "annulus ring error " + fmt(err);
        }
    }
    res.max_error = worst.value;
    res.pass = verdicts_ok && worst.value <= res.tolerance;
    res.detail = verdicts_ok ? "worst " + fmt(worst.value) + " (" + worst.where + ")" : bad;
    return res;
}

// 4. Monomial double orthogonality holds on centered radial sets and breaks
//    in the documented direction for squares and shifted disks.
inline CheckResult check_double_orthogonality() {
    CheckResult res{4, "double orthogonality separates radial from non-radial"};
    res.tolerance = 1e-8;
    auto mu = geom::RadialMeasure::fock();
    bool ok = true;
    std::string bad;
    auto disk = geom::make_disk(0.0, 1.0);
    for (int m = 0; m <= 4; ++m) {
        auto rep = probe::double_orth_test(disk, mu, m, 8, 1e-8);
        if (!rep.pass) {
            ok = false;
            bad = "disk failed at m=" + std::to_string(m) + ", k=" + std::to_string(rep.worst_k);
        }
        res.max_error = std::max(res.max_error, rep.worst_value);
    }
    auto square = probe::double_orth_test(geom::make_centered_square(std::sqrt(geom::kPi)), mu,
                                          0, 8, 1e-8);
    if (square.pass || square.worst_k != 4 || square.worst_value < 100.0 * 1e-8) {
        ok = false;
        bad = "square: expected a k=4 breach, got k=" + std::to_string(square.worst_k) +
              " value " + fmt(square.worst_value);
    }
    auto shifted = probe::double_orth_test(geom::make_disk(cplx(0.25, 0.0), 0.5), mu, 0, 8, 1e-8);
    if (shifted.pass || shifted.worst_k != 1) {
        ok = false;
        bad = "shifted disk: expected a k=1 breach, got k=" + std::to_string(shifted.worst_k);
    }
    res.pass = ok;
    res.detail = ok ? "radial pass at " + fmt(res.max_error) + "; square breach " +
                          fmt(square.worst_value) + " at k=4"
                    : bad;
    if (ok) res.max_error = std::max(res.max_error, 0.0);
    return res;
}

// 5. The constructed nonnegative non-radial symbol keeps one prescribed
//    basis vector as an exact eigenfunction while its neighbor drifts.
inline CheckResult check_counterexample_symbol() {
    CheckResult res{5, "a positive non-radial symbol keeps one basis eigenfunction"};
    res.tolerance = 1e-6;
    geom::QuadratureSpec quad;
    bool ok = true;
    std::string bad;
    Worst worst;
    for (int target : {0, 1, 2}) {
        auto built = fock::build_counterexample_symbol(target);
        const int N = 3 * target + 10;
        auto op = fock::assemble_symbol(built.symbol, N, quad);
        auto column_residual = [&](int k) {
            Eigen::VectorXcd col = op.entries.col(k);
            double lambda = col[k].real();
            col[k] = 0.0;
            return std::make_pair(lambda, col.norm());
        };
        auto [lam_t, res_t] = column_residual(target);
        auto [lam_n, res_n] = column_residual(target + 1);
        (void)lam_t;
        (void)lam_n;
        worst.offer(res_t, "target residual at n=" + std::to_string(target));
        if (res_n < 1e-3) {
            ok = false;
            bad = "neighbor residual " + fmt(res_n) + " too small at n=" + std::to_string(target);
        }
        double coupling = std::abs(op.entries(2 * target + 1, target));
        if (coupling > 1e-8) {
            ok = false;
            bad = "coupling entry " + fmt(coupling) + " at n=" + std::to_string(target);
        }
    }
    res.max_error = worst.value;
    res.pass = ok && worst.value <= res.tolerance;
    res.detail = bad.empty() ? "worst " + fmt(worst.value) + " (" + worst.where + ")" : bad;
    return res;
}

// 6. Time-frequency grid sums reproduce the analytic Galerkin matrices of
//    the reflected domains, and the ground state concentrates as predicted.
inline CheckResult check_timefrequency_cross() {
    CheckResult res{6, "time-frequency sums reproduce the analytic matrices"};
    res.tolerance = 1e-3;
    geom::QuadratureSpec quad;
    stft::TFGrid grid;
    auto family = stft::hermite_stft_family(12, grid);
    Worst worst;
    struct Item {
        const char* label;
        geom::Domain domain;
    };
    const std::vector<Item> items = {
        {"disk", geom::make_disk(0.0, 1.0)},
        {"annulus", geom::make_annulus(0.5, 1.0)},
        {"square", geom::make_centered_square(std::sqrt(geom::kPi))},
    };
    for (const auto& item : items) {
        Eigen::MatrixXcd td = stft::hermite_matrix_timedomain(item.domain, family);
        auto op = fock::assemble_indicator(stft::xi_reflected(item.domain), 12, quad);
        worst.offer((td - op.entries).cwiseAbs().maxCoeff(), std::string(item.label));
    }
    auto h0 = stft::hermite_signal(0);
    double conc = stft::concentration(h0, geom::make_disk(0.0, 1.0), grid);
    double closed = special::regularized_lower_gamma(1.0, geom::kPi);
    worst.offer(std::abs(conc - closed), "ground-state concentration");
    res.max_error = worst.value;
    res.detail = "worst " + fmt(worst.value) + " (" + worst.where + ")";
    res.pass = worst.value <= res.tolerance;
    return res;
}

// 7. Disc-model sections match the regularized beta law, including the
//    boundary limit where every concentration tends to one.
inline CheckResult check_disc_model_sections(double tol) {
    CheckResult res{7, "disc-model sections match the beta-law spectra"};
    res.tolerance = tol;
    geom::QuadratureSpec quad;
    Worst worst;
    for (double alpha : {0.0, 0.5, 2.0}) {
        for (double r : {0.3, 0.6, 0.9}) {
            auto op = bergman::bergman_galerkin(geom::make_disk(0.0, r), alpha, 17, quad,
                                                bergman::AssemblyRoute::ForceQuadrature);
            auto spec = eigendecompose(op);
            Eigen::VectorXd closed = bergman::disc_spectrum_closed(r, alpha, 17);
            std::sort(closed.data(), closed.data() + closed.size(), std::greater<double>());
            worst.offer((spec.eigenvalues - closed).cwiseAbs().maxCoeff(),
                        "alpha=" + fmt(alpha) + ", r=" + fmt(r));
        }
    }
    double limit_worst = 0.0;
    for (double alpha : {0.0, 0.5, 2.0})
        for (int n = 0; n <= 16; ++n)
            limit_worst = std::max(
                limit_worst, std::abs(bergman::disc_eigenvalue_closed(1.0 - 1e-6, n, alpha) - 1.0));
    res.max_error = worst.value;
    res.pass = worst.value <= tol && limit_worst <= 1e-4;
    res.detail = "worst " + fmt(worst.value) + " (" + worst.where + "); boundary limit gap " +
                 fmt(limit_worst);
    return res;
}

// 8. The pseudohyperbolic metric is carried across the half-plane map, and
//    pseudodisks centered over i are plain centered disks.
inline CheckResult check_disc_geometry(unsigned seed) {
    CheckResult res{8, "pseudohyperbolic geometry survives the half-plane map"};
    res.tolerance = 1e-12;
    std::mt19937 rng(seed ^ 0x9e3779b9u);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto sample_disc = [&] {
        while (true) {
            cplx w(unit(rng), unit(rng));
            if (std::abs(w) < 0.97) return w;
        }
    };
    Worst worst;
    for (int k = 0; k < 1000; ++k) {
        cplx w1 = sample_disc(), w2 = sample_disc();
        double direct = bergman::rho_disc(w1, w2);
        double mapped = bergman::rho_halfplane(bergman::cayley_to_halfplane(w1),
                                               bergman::cayley_to_halfplane(w2));
        worst.offer(std::abs(direct - mapped), "pair " + std::to_string(k));
    }
    auto mapped_disk = bergman::map_pseudodisk({cplx(0.0, 1.0), 0.6});
    int agree = 0;
    const int trials = 10000;
    for (int k = 0; k < trials; ++k) {
        cplx w = sample_disc();
        bool in_pseudo = std::abs(w) < 0.6;
        if (in_pseudo == mapped_disk.contains(w)) ++agree;
    }
    double agreement = static_cast<double>(agree) / trials;
    res.max_error = worst.value;
    res.pass = worst.value <= res.tolerance && agreement >= 0.999;
    res.detail = "metric gap " + fmt(worst.value) + "; indicator agreement " + fmt(agreement);
    return res;
}

// 9. Laguerre transform identities: the Laplace-side closed form, and the
//    constancy of the disc-transform ratio across evaluation points.
inline CheckResult check_laguerre_identities(double tol) {
    CheckResult res{9, "transform identities for the Laguerre family"};
    res.tolerance = tol;
    Worst worst;
    for (int n = 0; n <= 8; ++n)
        for (double alpha : {0.0, 0.5, 1.5})
            for (double s : {1.2, 2.0, 5.0}) {
                auto chk = bergman::laguerre_laplace_check(n, alpha, s);
                worst.offer(chk.abs_err, "laplace n=" + std::to_string(n) + ", alpha=" +
                                             fmt(alpha) + ", s=" + fmt(s));
            }
    const double alpha = 0.5;
    const int n = 1;
    auto profile = [&](double t) { return bergman::psi_fourier_side(n, alpha, t); };
    // Sample points stay away from z = i, where the transform target has a
    // zero of order n and the ratio degenerates to 0/0.
    const std::vector<cplx> zs = {cplx(0.0, 2.0), cplx(0.3, 0.8), cplx(-1.0, 1.6),
                                  cplx(0.5, 1.5), cplx(-0.2, 1.2)};
    std::vector<cplx> ratios;
    for (const auto& z : zs)
        ratios.push_back(bergman::bergman_transform_numeric(profile, alpha, z).value /
                         bergman::Psi_n_alpha(n, alpha, z));
    double drift = 0.0;
    for (const auto& r : ratios) drift = std::max(drift, std::abs(r - ratios[0]));
    double rel_drift = drift / std::abs(ratios[0]);
    res.max_error = worst.value;
    res.pass = worst.value <= tol && rel_drift <= 1e-4;
    res.detail = "laplace worst " + fmt(worst.value) + " (" + worst.where +
                 "); transform ratio drift " + fmt(rel_drift);
    return res;
}

// 10. The lattice frame experiment: hexagonal packing conditions better at
//     redundancy 2, no tested lattice is tight, and the estimator is stable
//     under doubling the truncation radius.
inline CheckResult check_frame_experiment() {
    CheckResult res{10, "lattice frame conditioning favors the hexagonal packing"};
    res.tolerance = 1e-3;
    auto rows = frames::condition_sweep({1.5, 2.0, 3.0});
    bool ok = true;
    std::string bad;
    if (!(rows[1].hex_cond < rows[1].rect_cond)) {
        ok = false;
        bad = "ordering reversed at redundancy 2";
    }
    double min_excess = 1e300;
    for (const auto& row : rows)
        min_excess = std::min({min_excess, row.rect_cond - 1.0, row.hex_cond - 1.0});
    if (min_excess <= 1e-3) {
        ok = false;
        bad = "a tested lattice looks tight (excess " + fmt(min_excess) + ")";
    }
    double worst_shift = 0.0;
    for (bool hex : {false, true}) {
        auto near = hex ? frames::hexagonal_lattice(2.0) : frames::rectangular_lattice(2.0);
        auto far = near;
        far.truncation_radius = 12.0;
        double c6 = frames::frame_bounds_estimate(near, 24).cond_est;
        double c12 = frames::frame_bounds_estimate(far, 24).cond_est;
        worst_shift = std::max(worst_shift, std::abs(c12 - c6) / c6);
    }
    if (worst_shift >= 0.02) {
        ok = false;
        bad = "estimator moved " + fmt(worst_shift) + " under radius doubling";
    }
    res.max_error = worst_shift;
    res.pass = ok;
    res.detail = ok ? "hex/rect " + fmt(rows[1].hex_cond) + "/" + fmt(rows[1].rect_cond) +
                          " at redundancy 2; tightness excess " + fmt(min_excess) +
                          "; radius-doubling shift " + fmt(worst_shift)
                    : bad;
    return res;
}

}  // namespace suite_detail

inline std::vector<CheckResult> run_suite(const SuiteOptions& opts = {}) {
    using namespace suite_detail;
    auto wanted = [&](int k) {
        return opts.subset.empty() ||
               std::find(opts.subset.begin(), opts.subset.end(), k) != opts.subset.end();
    };
    std::vector<CheckResult> out;
    if (wanted(1)) out.push_back(check_disk_sections(opts.tol));
    if (wanted(2)) out.push_back(check_annulus_sections(opts.tol));
    if (wanted(3)) out.push_back(check_probe_protocol());
    if (wanted(4)) out.push_back(check_double_orthogonality());
    if (wanted(5)) out.push_back(check_counterexample_symbol());
    if (wanted(6)) out.push_back(check_timefrequency_cross());
    if (wanted(7)) out.push_back(check_disc_model_sections(opts.tol));
    if (wanted(8)) out.push_back(check_disc_geometry(opts.seed));
    if (wanted(9)) out.push_back(check_laguerre_identities(opts.tol));
    if (wanted(10)) out.push_back(check_frame_experiment());
    // A failure caused only by a tolerance below the quadrature noise floor
    // is reported as expected; the invariant itself is not in question.
    for (auto& res : out)
        if (!res.pass && opts.tol < suite_detail::kNoiseFloor &&
            res.tolerance == opts.tol)
            res.expected_failure = true;
    return out;
}

}  // namespace tflocal::validate
