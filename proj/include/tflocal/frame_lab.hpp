#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "tflocal/errors.hpp"
#include "tflocal/fock_operator.hpp"
#include "tflocal/geometry.hpp"
#include "tflocal/parallel.hpp"

namespace tflocal::frames {

using geom::cplx;
using geom::kPi;

enum class LatticeKind { Rectangular, Hexagonal };

// Time-frequency sampling set for Gaussian Gabor systems: either the grid
// aZ x bZ or the triangular grid spanned by s(1,0) and s(1/2, sqrt(3)/2),
// clipped to a disk of the given radius. The redundancy field must match the
// inverse cell area; the factories below keep that in sync.
struct Lattice {
    LatticeKind kind = LatticeKind::Rectangular;
    double a = 1.0;  // rectangular steps
    double b = 1.0;
    double side = 1.0;  // hexagonal edge
    double redundancy = 2.0;
    // Estimators require >= 6 so cross-terms past the cut stay below 1e-15;
    // plain enumeration accepts any nonnegative radius.
    double truncation_radius = 6.0;

    double density() const {
        if (kind == LatticeKind::Rectangular) return 1.0 / (a * b);
        return 2.0 / (std::sqrt(3.0) * side * side);
    }

    void validate() const {
        if (!(redundancy > 1.0))
            throw std::invalid_argument("Lattice: redundancy must exceed 1");
        if (kind == LatticeKind::Rectangular) {
            if (!(a > 0.0 && b > 0.0))
                throw std::invalid_argument("Lattice: rectangular steps must be positive");
        } else if (!(side > 0.0)) {
            throw std::invalid_argument("Lattice: hexagonal side must be positive");
        }
        if (std::abs(density() - redundancy) > 1e-9 * redundancy)
            throw std::invalid_argument("Lattice: redundancy does not match the cell area");
        if (!(truncation_radius >= 0.0))
            throw std::invalid_argument("Lattice: truncation radius must be nonnegative");
    }
};

inline Lattice rectangular_lattice(double redundancy, double truncation_radius = 6.0) {
    if (!(redundancy > 1.0))
        throw std::invalid_argument("rectangular_lattice: redundancy must exceed 1");
    double step = 1.0 / std::sqrt(redundancy);
    return Lattice{LatticeKind::Rectangular, step, step, 0.0, redundancy, truncation_radius};
}

inline Lattice rectangular_lattice_steps(double a, double b, double truncation_radius = 6.0) {
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("rectangular_lattice_steps: steps must be positive");
    return Lattice{LatticeKind::Rectangular, a, b, 0.0, 1.0 / (a * b), truncation_radius};
}

inline Lattice hexagonal_lattice(double redundancy, double truncation_radius = 6.0) {
    if (!(redundancy > 1.0))
        throw std::invalid_argument("hexagonal_lattice: redundancy must exceed 1");
    double side = std::sqrt(2.0 / (std::sqrt(3.0) * redundancy));
    return Lattice{LatticeKind::Hexagonal, 0.0, 0.0, side, redundancy, truncation_radius};
}

// Every lattice point with |z| <= truncation_radius, row-major order.
inline std::vector<cplx> lattice_points(const Lattice& lat) {
    lat.validate();
    const double R = lat.truncation_radius;
    std::vector<cplx> pts;
    if (lat.kind == LatticeKind::Rectangular) {
        int mmax = static_cast<int>(std::floor(R / lat.a + 1e-12));
        int nmax = static_cast<int>(std::floor(R / lat.b + 1e-12));
        for (int n = -nmax; n <= nmax; ++n) {
            for (int m = -mmax; m <= mmax; ++m) {
                cplx z(m * lat.a, n * lat.b);
                if (std::abs(z) <= R) pts.push_back(z);
            }
        }
    } else {
        const double s = lat.side;
        const double row = s * std::sqrt(3.0) / 2.0;
        int nmax = static_cast<int>(std::floor(R / row + 1e-12));
        for (int n = -nmax; n <= nmax; ++n) {
            double shift = 0.5 * n;
            int mlo = static_cast<int>(std::ceil(-R / s - shift - 1e-12));
            int mhi = static_cast<int>(std::floor(R / s - shift + 1e-12));
            for (int m = mlo; m <= mhi; ++m) {
                cplx z(s * (m + shift), row * n);
                if (std::abs(z) <= R) pts.push_back(z);
            }
        }
    }
    return pts;
}

// <pi(z1) window, pi(z2) window> for the unit Gaussian window: magnitude
// e^{-pi |z1 - z2|^2 / 2} with the bilinear phase fixed by the
// modulate-after-translate convention used throughout the transform code.
inline cplx coherent_overlap(cplx z1, cplx z2) {
    double phase = kPi * (z1.imag() - z2.imag()) * (z1.real() + z2.real());
    return std::polar(std::exp(-0.5 * kPi * std::norm(z1 - z2)), phase);
}

// <h_k, pi(z) window> in closed form through the Bargmann relation.
inline cplx hermite_frame_coeff(int k, cplx z) {
    double mag = std::exp(-0.5 * kPi * std::norm(z));
    return fock::normalized_monomial(k, std::conj(z)) *
           std::polar(mag, -kPi * z.real() * z.imag());
}

struct FrameBounds {
    double a_est = 0.0;  // smallest kept eigenvalue of the frame-matrix section
    double b_est = 0.0;  // largest kept eigenvalue
    double cond_est = 0.0;
    int lattice_count = 0;
    int kept = 0;  // Hermite orders kept after the boundary discard
};

// Finite section of the frame operator over Hermite probes 0..probe_order-1:
// S = sum_{z in lattice} v(z) v(z)^H with v_k(z) = <h_k, pi(z) window>.
// Chunked partials combine in index order so the result is deterministic.
inline Eigen::MatrixXcd frame_matrix(const Lattice& lat, int probe_order) {
    lat.validate();
    if (probe_order < 4)
        throw std::invalid_argument("frame_matrix: need at least 4 probe orders");
    if (!(lat.truncation_radius >= 6.0))
        throw std::invalid_argument(
            "frame_matrix: truncation radius below 6 leaves visible cross-terms");
    const double guard = lat.truncation_radius - 3.0;
    if (probe_order > kPi * guard * guard)
        throw TruncationRisk(
            "frame_matrix: highest probe order spreads past the truncation guard");

    const auto pts = lattice_points(lat);
    const int N = probe_order;
    const std::size_t chunk = 64;
    const std::size_t nchunks = (pts.size() + chunk - 1) / chunk;
    std::vector<Eigen::MatrixXcd> partial(nchunks, Eigen::MatrixXcd::Zero(N, N));
    parallel_chunks(pts.size(), chunk, [&](std::size_t c, std::size_t first, std::size_t last) {
        Eigen::VectorXcd v(N);
        for (std::size_t i = first; i < last; ++i) {
            for (int k = 0; k < N; ++k) v[k] = hermite_frame_coeff(k, pts[i]);
            partial[c] += v * v.adjoint();
        }
    });
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(N, N);
    for (const auto& p : partial) S += p;
    return S;
}

// The top quarter of orders feels the lattice truncation, so the extreme
// eigenvalues are read off the leading block only. This is a truncation-biased
// estimator meant for ordering comparisons, not certified frame bounds.
inline FrameBounds frame_bounds_estimate(const Lattice& lat, int probe_order) {
    Eigen::MatrixXcd S = frame_matrix(lat, probe_order);
    const int kept = probe_order - probe_order / 4;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(S.topLeftCorner(kept, kept));
    if (solver.info() != Eigen::Success)
        throw SolverFailure("frame_bounds_estimate: eigen solver failed");

    FrameBounds out;
    out.a_est = solver.eigenvalues().minCoeff();
    out.b_est = solver.eigenvalues().maxCoeff();
    out.lattice_count = static_cast<int>(lattice_points(lat).size());
    out.kept = kept;
    if (!(out.a_est > 1e-14 * out.b_est))
        throw DegenerateSpectrum("frame_bounds_estimate: section is numerically singular");
    out.cond_est = out.b_est / out.a_est;
    return out;
}

struct SweepRow {
    double redundancy = 0.0;
    double rect_cond = 0.0;
    double hex_cond = 0.0;
    double ratio = 0.0;  // hex / rect
};

inline std::vector<SweepRow> condition_sweep(const std::vector<double>& redundancies,
                                             int probe_order = 24,
                                             double truncation_radius = 6.0) {
    std::vector<SweepRow> rows;
    rows.reserve(redundancies.size());
    for (double red : redundancies) {
        SweepRow row;
        row.redundancy = red;
        row.rect_cond =
            frame_bounds_estimate(rectangular_lattice(red, truncation_radius), probe_order)
                .cond_est;
        row.hex_cond =
            frame_bounds_estimate(hexagonal_lattice(red, truncation_radius), probe_order)
                .cond_est;
        row.ratio = row.hex_cond / row.rect_cond;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace tflocal::frames
