#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "tflocal/fock_operator.hpp"
#include "tflocal/stft.hpp"

using namespace tflocal;
using stft::cplx;
constexpr double pi = std::numbers::pi;

namespace {

// Closed form of the Gaussian-window transform of h_n: with w = x + i xi,
// V h_n(x, xi) = e_n(conj(w)) e^{-i pi x xi} e^{-pi |w|^2 / 2}, where e_n is
// the normalized monomial. This is the bridge every cross-check leans on.
cplx hermite_transform_closed(int n, double x, double xi) {
    cplx w(x, xi);
    return fock::normalized_monomial(n, std::conj(w)) *
           std::polar(1.0, -pi * x * xi) * std::exp(-0.5 * pi * std::norm(w));
}

// CCW polygon tracing the part of the unit circle above the line xi = c,
// closed by the chord; c = 0 gives the upper half disk.
geom::Domain chord_cap(double c, int arc_points) {
    std::vector<cplx> v;
    double x_end = std::sqrt(1.0 - c * c);
    double th0 = std::atan2(c, x_end);
    for (int k = 0; k <= arc_points; ++k) {
        double th = th0 + (pi - 2.0 * th0) * k / arc_points;
        v.push_back(std::polar(1.0, th));
    }
    return geom::make_polygon(v);
}

}  // namespace

TEST_CASE("hermite signals are orthonormal on the default sampling") {
    auto h0 = stft::hermite_signal(0);
    CHECK(h0.samples.size() == 16001);
    CHECK(h0.t_at(0) == -8.0);
    CHECK_THAT(h0.energy(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(stft::hermite_signal(3).energy(), Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(stft::hermite_signal(7).energy(), Catch::Matchers::WithinAbs(1.0, 1e-12));

    auto h2 = stft::hermite_signal(2);
    auto h5 = stft::hermite_signal(5);
    CHECK(std::abs(stft::inner_product(h2, h5)) < 1e-12);
    CHECK_THAT(stft::inner_product(h2, h2).real(), Catch::Matchers::WithinAbs(1.0, 1e-12));

    CHECK_THROWS_AS(stft::hermite_signal(-1), std::domain_error);
    auto coarse = stft::hermite_signal(2, -8.0, 8.0, 1e-2);
    CHECK_THROWS_AS(stft::inner_product(h2, coarse), std::invalid_argument);
    CHECK_THROWS_AS(stft::sample_signal([](double) { return cplx(0.0); }, 1.0, -1.0, 0.1),
                    std::invalid_argument);
}

TEST_CASE("grid layout is symmetric and validation guards the window scale") {
    stft::TFGrid grid;
    CHECK(grid.x_nodes() == 161);
    CHECK(grid.xi_nodes() == 161);
    CHECK(grid.x_at(80) == 0.0);
    CHECK(grid.x_at(0) == -4.0);
    CHECK(grid.x_at(160) == 4.0);
    CHECK(grid.xi_at(81) == -grid.xi_at(79));
    CHECK_NOTHROW(grid.validate());

    stft::TFGrid coarse = grid;
    coarse.xi_step = 0.6;
    CHECK_THROWS_AS(coarse.validate(), GridTooCoarse);
    stft::TFGrid bad = grid;
    bad.x_step = -0.05;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    // guard band: every domain must sit three units inside the covered box
    CHECK_NOTHROW(grid.require_covers(geom::make_disk(cplx(0.0, 0.0), 1.0)));
    CHECK_NOTHROW(grid.require_covers(geom::make_centered_square(std::sqrt(pi))));
    CHECK_THROWS_AS(grid.require_covers(geom::make_disk(cplx(0.0, 0.0), 1.2)), GridTooCoarse);
    CHECK_THROWS_AS(grid.require_covers(geom::make_disk(cplx(0.5, 0.0), 0.6)), GridTooCoarse);
    CHECK_THROWS_AS(grid.require_covers(geom::make_annulus(0.5, 1.01)), GridTooCoarse);

    // the coverage requirement is per axis, not by bounding radius: the
    // square's corners reach 1.25 but its sides stop at 0.886
    stft::TFGrid tight = grid;
    tight.x_half_range = tight.xi_half_range = 3.9;
    CHECK_NOTHROW(tight.require_covers(geom::make_centered_square(std::sqrt(pi))));
    CHECK_THROWS_AS(tight.require_covers(geom::make_disk(cplx(0.0, 0.0), 1.0)), GridTooCoarse);
}

TEST_CASE("transform of the window itself is the plane Gaussian") {
    stft::TFGrid grid;
    auto table = stft::stft_gaussian(stft::hermite_signal(0), grid);
    CHECK(std::abs(table.values(80, 80) - cplx(1.0, 0.0)) < 1e-11);
    for (auto [i, j] : {std::pair{90, 80}, {80, 100}, {52, 117}, {10, 10}}) {
        cplx want = hermite_transform_closed(0, grid.x_at(i), grid.xi_at(j));
        CHECK(std::abs(table.values(i, j) - want) < 1e-11);
    }
}

TEST_CASE("transform of hermite signals matches the monomial closed form") {
    stft::TFGrid grid;
    auto family = stft::hermite_stft_family(10, grid);
    for (int n : {1, 4, 9}) {
        double worst = 0.0;
        for (int i = 0; i < grid.x_nodes(); ++i)
            for (int j = 0; j < grid.xi_nodes(); ++j)
                worst = std::max(worst,
                                 std::abs(family.tables[n](i, j) -
                                          hermite_transform_closed(n, grid.x_at(i),
                                                                   grid.xi_at(j))));
        CAPTURE(n);
        CHECK(worst < 1e-9);
    }

    // magnitude is radial: compare nodes at equal |z| across quadrants
    const auto& t4 = family.tables[4];
    CHECK_THAT(std::abs(t4(80 + 20, 80 - 12)), Catch::Matchers::WithinRel(
        std::abs(t4(80 - 12, 80 + 20)), 1e-9));
    CHECK_THAT(std::abs(t4(80 + 30, 80)), Catch::Matchers::WithinRel(
        std::abs(t4(80, 80 - 30)), 1e-9));

    // a genuinely complex signal exercises the full-frequency path; the
    // transform is linear, so h_1 + i h_2 maps to V_1 + i V_2
    auto h1 = stft::hermite_signal(1);
    auto h2 = stft::hermite_signal(2);
    stft::SampledSignal mix = h1;
    for (std::size_t k = 0; k < mix.samples.size(); ++k)
        mix.samples[k] += cplx(0.0, 1.0) * h2.samples[k];
    auto tmix = stft::stft_gaussian(mix, grid);
    double worst = 0.0;
    for (int i = 0; i < grid.x_nodes(); i += 7)
        for (int j = 0; j < grid.xi_nodes(); j += 7) {
            cplx want = hermite_transform_closed(1, grid.x_at(i), grid.xi_at(j)) +
                        cplx(0.0, 1.0) *
                            hermite_transform_closed(2, grid.x_at(i), grid.xi_at(j));
            worst = std::max(worst, std::abs(tmix.values(i, j) - want));
        }
    CHECK(worst < 1e-9);

    // boundary decay precondition: a rectangle window fails it
    auto flat = stft::sample_signal([](double) { return cplx(1.0); }, -8.0, 8.0, 1e-2);
    CHECK_THROWS_AS(stft::stft_gaussian(flat, grid), std::invalid_argument);
}

TEST_CASE("grid energy reproduces the signal energy") {
    stft::TFGrid grid;
    for (int n : {0, 3}) {
        auto f = stft::hermite_signal(n);
        double ratio = stft::grid_energy(stft::stft_gaussian(f, grid)) / f.energy();
        CAPTURE(n);
        CHECK_THAT(ratio, Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
}

TEST_CASE("whole-grid synthesis inverts the transform") {
    stft::TFGrid grid;
    auto h2 = stft::hermite_signal(2, -8.0, 8.0, 2e-3);
    auto back = stft::apply_localization(h2, grid);
    REQUIRE(back.samples.size() == h2.samples.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < h2.samples.size(); ++k)
        worst = std::max(worst, std::abs(back.samples[k] - h2.samples[k]));
    CHECK(worst < 1e-6);
}

TEST_CASE("disk localization rescales hermite signals by the closed eigenvalue") {
    stft::TFGrid grid;
    auto disk = geom::make_disk(cplx(0.0, 0.0), 1.0);
    auto h2 = stft::hermite_signal(2, -8.0, 8.0, 2e-3);
    auto loc = stft::apply_localization(h2, disk, grid);
    double lam2 = fock::disk_spectrum_closed(1.0, 3)[2];
    double err2 = 0.0;
    for (std::size_t k = 0; k < h2.samples.size(); ++k)
        err2 += std::norm(loc.samples[k] - lam2 * h2.samples[k]);
    CHECK(std::sqrt(h2.dt * err2) < 1e-3);

    // a domain that covers no grid cell acts as the zero operator
    auto nothing = geom::make_disk(cplx(0.026, 0.026), 5e-4);
    auto zero = stft::apply_localization(h2, nothing, grid);
    double peak = 0.0;
    for (cplx v : zero.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == 0.0);
}

TEST_CASE("localized multiplier is self-adjoint and nonnegative on probes") {
    stft::TFGrid grid;
    auto dom = geom::make_disk(cplx(0.3, 0.2), 0.6);
    auto h1 = stft::hermite_signal(1, -8.0, 8.0, 2e-3);
    auto h4 = stft::hermite_signal(4, -8.0, 8.0, 2e-3);
    auto loc1 = stft::apply_localization(h1, dom, grid);
    auto loc4 = stft::apply_localization(h4, dom, grid);

    // analysis and synthesis share the window truncation and the coverage
    // weights, so the discrete operator is self-adjoint to roundoff, far
    // below the 1e-6 the contract asks for
    cplx lhs = stft::inner_product(loc1, h4);
    cplx rhs = stft::inner_product(h1, loc4);
    CHECK(std::abs(lhs - rhs) < 1e-10);

    double quad1 = stft::inner_product(loc1, h1).real();
    CHECK(quad1 >= 0.0);
    CHECK(quad1 <= 1.0 + 1e-6);
    CHECK(std::abs(stft::inner_product(loc1, h1).imag()) < 1e-12);
}

TEST_CASE("concentration fractions follow the closed disk spectrum") {
    stft::TFGrid grid;
    auto h0 = stft::hermite_signal(0);
    double lam0 = fock::disk_spectrum_closed(1.0, 1)[0];
    double on_disk = stft::concentration(h0, geom::make_disk(cplx(0.0, 0.0), 1.0), grid);
    CHECK_THAT(on_disk, Catch::Matchers::WithinAbs(lam0, 1e-3));

    double on_half = stft::concentration(h0, geom::make_disk(cplx(0.0, 0.0), 0.5), grid);
    CHECK(on_half < on_disk);
    CHECK_THAT(on_half, Catch::Matchers::WithinAbs(fock::disk_spectrum_closed(0.5, 1)[0],
                                                   1e-3));

    CHECK_THAT(stft::concentration(h0, grid), Catch::Matchers::WithinAbs(1.0, 1e-6));

    stft::SampledSignal silence;
    silence.t0 = -1.0;
    silence.dt = 1e-2;
    silence.samples.assign(201, cplx(0.0));
    CHECK_THROWS_AS(stft::concentration(silence, grid), ZeroSignal);
    CHECK_THROWS_AS(stft::concentration(h0, geom::make_disk(cplx(0.0, 0.0), 1.5), grid),
                    GridTooCoarse);
}

TEST_CASE("time-domain Galerkin matrices match the analytic model") {
    stft::TFGrid grid;
    const int n = 12;
    auto family = stft::hermite_stft_family(n, grid);
    geom::QuadratureSpec quad;

    auto check_domain = [&](const geom::Domain& dom, double tol) {
        auto g = stft::hermite_matrix_timedomain(dom, family);
        auto m = fock::assemble_indicator(stft::xi_reflected(dom), n, quad);
        double worst = (g - m.entries).cwiseAbs().maxCoeff();
        CHECK(worst < tol);
        CHECK((g - g.adjoint().eval()).cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        return worst;
    };

    check_domain(geom::make_disk(cplx(0.0, 0.0), 1.0), 1e-3);
    check_domain(geom::make_annulus(0.5, 1.0), 1e-3);
    check_domain(geom::make_centered_square(std::sqrt(pi)), 1e-3);

    // domain smaller than every cell: exact zero matrix
    auto nothing = geom::make_disk(cplx(0.026, 0.026), 5e-4);
    CHECK(stft::hermite_matrix_timedomain(nothing, family).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("one-shot matrix route equals the precomputed-family route") {
    stft::TFGrid grid;
    grid.x_half_range = grid.xi_half_range = 3.5;
    grid.x_step = grid.xi_step = 0.1;
    auto dom = geom::make_disk(cplx(0.1, -0.1), 0.3);
    auto family = stft::hermite_stft_family(4, grid, 6.0, 5e-3);
    auto via_family = stft::hermite_matrix_timedomain(dom, family);
    auto one_shot = stft::hermite_matrix_timedomain(dom, grid, 4, 6.0, 5e-3);
    CHECK((via_family - one_shot).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frequency-axis reflection of every shape") {
    using stft::xi_reflected;
    std::vector<cplx> probes = {cplx(0.3, 0.4), cplx(-0.8, 0.1), cplx(0.05, -0.55),
                                cplx(1.1, 0.9), cplx(-0.4, -0.9), cplx(0.6, 0.0)};

    auto check_pointwise = [&](const geom::Domain& dom) {
        auto refl = xi_reflected(dom);
        for (cplx z : probes) {
            CAPTURE(z.real(), z.imag());
            CHECK(dom.contains(z) == refl.contains(std::conj(z)));
        }
    };

    check_pointwise(geom::make_disk(cplx(0.2, 0.5), 0.45));
    check_pointwise(geom::make_polygon({cplx(-0.5, -0.2), cplx(0.9, -0.4), cplx(0.8, 0.7),
                                        cplx(0.1, 0.3), cplx(-0.6, 0.6)}));
    check_pointwise(geom::make_rotation(geom::make_centered_square(1.2), 0.35));
    check_pointwise(geom::make_union({geom::make_disk(cplx(-0.7, 0.3), 0.25),
                                      geom::make_disk(cplx(0.6, -0.4), 0.3)}));
    check_pointwise(geom::make_pseudodisk(cplx(0.1, 0.5), 0.4));

    // centered radial shapes are fixed points of the reflection
    auto ann = xi_reflected(geom::make_annulus(0.3, 0.8));
    CHECK(ann.as_centered_radial().has_value());
}

TEST_CASE("reflection contract shows up on an asymmetric domain") {
    stft::TFGrid grid;
    const int n = 8;
    auto family = stft::hermite_stft_family(n, grid);
    auto upper = chord_cap(0.0, 64);
    auto lower = stft::xi_reflected(upper);

    // arcs ending exactly on the chord ray leave the analytic assembly with
    // a few-times-1e-7 wobble, so ask it for 1e-6 rather than the default
    geom::QuadratureSpec quad;
    quad.target_abs_tol = 1e-6;

    auto g = stft::hermite_matrix_timedomain(upper, family);
    auto m_lower = fock::assemble_indicator(lower, n, quad);
    auto m_upper = fock::assemble_indicator(upper, n, quad);
    CHECK((g - m_lower.entries).cwiseAbs().maxCoeff() < 1e-3);

    // against the unreflected matrix the disagreement is two orders larger,
    // so the comparison above genuinely pins the convention
    CHECK((g - m_upper.entries).cwiseAbs().maxCoeff() > 0.1);
    CHECK((m_upper.entries - m_lower.entries.transpose()).cwiseAbs().maxCoeff() < 2e-6);
}
