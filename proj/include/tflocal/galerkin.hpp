#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "tflocal/errors.hpp"
#include "tflocal/geometry.hpp"

namespace tflocal {

// Finite Hermitian section of a localization operator in a monomial-type
// orthonormal basis b_n(z) = c_n z^n.
struct GalerkinOperator {
    Eigen::MatrixXcd entries;
    geom::RadialMeasure measure;
    double err_estimate = 0.0;        // node-doubling estimate; 0 for closed forms
    std::string provenance = "quadrature";

    int basis_size() const { return static_cast<int>(entries.rows()); }
};

struct Spectrum {
    Eigen::VectorXd eigenvalues;    // descending
    Eigen::MatrixXcd eigenvectors;  // column i pairs with eigenvalues[i]
    double residual_norm = 0.0;     // max_i |M v_i - lambda_i v_i|_2
};

inline Eigen::VectorXcd apply(const GalerkinOperator& op, const Eigen::VectorXcd& v) {
    if (v.size() != op.entries.rows())
        throw std::invalid_argument("apply: coefficient vector length must match basis size");
    return op.entries * v;
}

// Dense Hermitian eigendecomposition (Eigen self-adjoint solver), reordered
// to descending eigenvalues. Residuals are measured against the unsymmetrized
// entries so quadrature asymmetry shows up in residual_norm.
inline Spectrum eigendecompose(const GalerkinOperator& op) {
    const auto& M = op.entries;
    Eigen::MatrixXcd sym = 0.5 * (M + M.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw SolverFailure("eigendecompose: self-adjoint solver failed");
    const int n = static_cast<int>(M.rows());
    Spectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (int i = 0; i < n; ++i) {
        out.eigenvalues[i] = solver.eigenvalues()[n - 1 - i];
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = (M * out.eigenvectors.col(i) - out.eigenvalues[i] * out.eigenvectors.col(i))
                       .norm();
        worst = std::max(worst, r);
    }
    out.residual_norm = worst;
    return out;
}

namespace galerkin_detail {

// M[m][n] = Int_Omega b_n(z) conj(b_m(z)) dmu, where b_n(z) = exp(log_coeff(n)) z^n.
// The angular factor Int_arcs e^{i(n-m)theta} is evaluated in closed form per
// radial node, so only the radial quadrature carries error; radial node
// counts double until the largest entry movement drops below the target.
inline GalerkinOperator assemble_weighted(const geom::Domain& domain,
                                          const geom::RadialMeasure& mu, int basis_size,
                                          const geom::QuadratureSpec& quad,
                                          const std::function<double(int)>& log_coeff,
                                          const std::vector<double>& extra_breakpoints = {}) {
    quad.validate();
    if (basis_size < 1) throw std::invalid_argument("assemble: basis size must be positive");
    const int N = basis_size;
    const int degree_hint = 2 * N - 2;

    // ratio c_n / c_{n-1} lets b_n(r) build incrementally per node
    std::vector<double> ratio(static_cast<std::size_t>(N), 0.0);
    for (int n = 1; n < N; ++n) ratio[n] = std::exp(log_coeff(n) - log_coeff(n - 1));
    const double c0 = std::exp(log_coeff(0));

    std::vector<double> b(static_cast<std::size_t>(N));
    std::vector<geom::cplx> A;
    Eigen::MatrixXcd prev;
    for (int level = 0; level <= quad.max_refinements; ++level) {
        auto radial = geom::detail::radial_rule(domain, mu, quad.radial_nodes, degree_hint,
                                                extra_breakpoints, 4 + level, level);
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
        for (const auto& rn : radial) {
            if (rn.w == 0.0) continue;
            auto arcs = geom::detail::circle_arcs(domain, rn.r);
            if (arcs.empty()) continue;
            geom::detail::arc_harmonics(arcs, N - 1, A);
            b[0] = c0;
            for (int n = 1; n < N; ++n) b[n] = b[n - 1] * rn.r * ratio[n];
            for (int m = 0; m < N; ++m) {
                double wm = rn.w * b[m];
                if (wm == 0.0) continue;
                for (int n = m; n < N; ++n) M(m, n) += wm * b[n] * A[n - m];
            }
        }
        for (int m = 0; m < N; ++m)
            for (int n = 0; n < m; ++n) M(m, n) = std::conj(M(n, m));
        if (level > 0) {
            double err = (M - prev).cwiseAbs().maxCoeff();
            if (err <= quad.target_abs_tol) {
                GalerkinOperator op{std::move(M), mu, err, "arc-quadrature"};
                return op;
            }
            if (level == quad.max_refinements)
                throw NonConvergence("assemble: node doubling stalled above tolerance", err,
                                     quad.target_abs_tol);
        }
        prev = std::move(M);
    }
    throw NonConvergence("assemble: unreachable", 0.0, quad.target_abs_tol);
}

}  // namespace galerkin_detail
}  // namespace tflocal
