#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "tflocal/errors.hpp"
#include "tflocal/geometry.hpp"

using namespace tflocal;
using geom::cplx;
constexpr double pi = std::numbers::pi;

namespace {

geom::QuadratureSpec default_quad() { return {}; }

}  // namespace

TEST_CASE("radial measure weights take their textbook values") {
    auto fock = geom::RadialMeasure::fock();
    CHECK(fock.weight_at(0.0) == 1.0);
    CHECK(fock.weight_at(1.0) == Catch::Approx(std::exp(-pi)).epsilon(1e-15));
    CHECK(std::isinf(fock.support_radius()));

    auto flat = geom::RadialMeasure::bergman(0.0);
    CHECK(flat.weight_at(0.0) == Catch::Approx(1.0 / pi).epsilon(1e-15));
    CHECK(flat.weight_at(0.5) == Catch::Approx(1.0 / pi).epsilon(1e-15));
    CHECK(flat.support_radius() == 1.0);

    auto heavy = geom::RadialMeasure::bergman(2.5);
    CHECK(heavy.weight_at(0.3) ==
          Catch::Approx(3.5 * std::pow(1.0 - 0.09, 2.5) / pi).epsilon(1e-14));

    CHECK_THROWS_AS(geom::RadialMeasure::bergman(-1.0), std::domain_error);
    CHECK_THROWS_AS(fock.weight_at(-0.1), std::domain_error);
    CHECK_THROWS_AS(flat.weight_at(1.0), std::domain_error);
}

TEST_CASE("closed odd moments match adaptive quadrature in r") {
    // c_{n,R} = 2 pi Int_0^R r^n mu(r) dr, checked against a quadrature that
    // never sees the incomplete gamma / beta implementations
    auto fock = geom::RadialMeasure::fock();
    for (int n : {1, 3, 5, 9, 13}) {
        for (double R : {0.4, 1.0, 2.3}) {
            double ref = 2.0 * pi *
                         oracle::adaptive_simpson(
                             [n](double r) { return std::pow(r, n) * std::exp(-pi * r * r); }, 0.0,
                             R, 1e-14);
            CHECK(geom::closed_moment(fock, n, R) ==
                  Catch::Approx(ref).epsilon(1e-10).margin(5e-13));
        }
    }
    for (double alpha : {0.0, 1.3, 4.0}) {
        auto mu = geom::RadialMeasure::bergman(alpha);
        for (int n : {1, 3, 7}) {
            for (double R : {0.35, 0.9}) {
                double ref = 2.0 * (alpha + 1.0) *
                             oracle::adaptive_simpson(
                                 [n, alpha](double r) {
                                     return std::pow(r, n) * std::pow(1.0 - r * r, alpha);
                                 },
                                 0.0, R, 1e-14);
                CHECK(geom::closed_moment(mu, n, R) ==
                      Catch::Approx(ref).epsilon(1e-10).margin(5e-13));
            }
        }
    }
}

TEST_CASE("closed moments hit exact normalization values") {
    auto fock = geom::RadialMeasure::fock();
    double inf = std::numeric_limits<double>::infinity();
    // total Gaussian mass is 1, and the full odd moments are m! / pi^m
    CHECK(geom::closed_moment(fock, 1, inf) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(geom::closed_moment(fock, 5, inf) == Catch::Approx(2.0 / (pi * pi)).epsilon(1e-14));
    // every Bergman weight integrates to 1 over the unit disc
    for (double alpha : {-0.5, 0.0, 2.0, 7.5})
        CHECK(geom::closed_moment(geom::RadialMeasure::bergman(alpha), 1, 1.0) ==
              Catch::Approx(1.0).epsilon(1e-13));
    // alpha = 1, n = 3, R = 1: 4 Int_0^1 r^3 (1 - r^2) dr = 1/3
    CHECK(geom::closed_moment(geom::RadialMeasure::bergman(1.0), 3, 1.0) ==
          Catch::Approx(1.0 / 3.0).epsilon(1e-14));

    // strictly increasing in R, capped by the full-plane value
    double prev = 0.0;
    for (double R : {0.5, 1.0, 1.5, 2.5}) {
        double c = geom::closed_moment(fock, 5, R);
        CHECK(c > prev);
        prev = c;
    }
    CHECK(prev < 2.0 / (pi * pi));

    CHECK_THROWS_AS(geom::closed_moment(fock, 2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geom::closed_moment(fock, -3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geom::closed_moment(fock, 3, 0.0), std::domain_error);
    CHECK_THROWS_AS(geom::closed_moment(geom::RadialMeasure::bergman(0.0), 3, 1.1),
                    std::domain_error);
}

TEST_CASE("domain construction rejects malformed shapes") {
    CHECK_THROWS_AS(geom::make_disk(cplx(0, 0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(geom::make_annulus(-0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geom::make_annulus(1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(geom::make_polygon({cplx(0, 0), cplx(1, 0)}), std::invalid_argument);
    // clockwise vertex order
    CHECK_THROWS_AS(geom::make_polygon({cplx(0, 0), cplx(0, 1), cplx(1, 0)}),
                    std::invalid_argument);
    // bowtie with positive signed area, caught by the edge intersection scan
    CHECK_THROWS_AS(geom::make_polygon({cplx(0, 1), cplx(2, 0), cplx(3, 2), cplx(0, 0)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(geom::make_union({}), std::invalid_argument);
    CHECK_THROWS_AS(
        geom::make_union({geom::make_disk(cplx(0, 0), 1.0), geom::make_disk(cplx(0.5, 0), 1.0)}),
        std::invalid_argument);
    CHECK_THROWS_AS(geom::make_pseudodisk(cplx(0.4, -0.2), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(geom::make_pseudodisk(cplx(0, 1), 1.2), std::invalid_argument);
    CHECK_THROWS_AS(geom::Domain(geom::Rotated{nullptr, 0.3}), std::invalid_argument);

    geom::QuadratureSpec bad;
    bad.radial_nodes = 8;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.target_abs_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = {};
    bad.max_refinements = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("membership, bounding radii and centered-radial detection") {
    auto disk = geom::make_disk(cplx(0.5, 0), 0.75);
    CHECK(disk.contains(cplx(1.1, 0)));
    CHECK_FALSE(disk.contains(cplx(-0.3, 0)));
    CHECK(disk.bounding_radius() == Catch::Approx(1.25));
    CHECK_FALSE(disk.as_centered_radial().has_value());

    auto centered = geom::make_disk(cplx(0, 0), 1.2);
    auto cr = centered.as_centered_radial();
    REQUIRE(cr.has_value());
    CHECK(cr->first == 0.0);
    CHECK(cr->second == 1.2);

    auto ring = geom::make_annulus(0.7, 1.6);
    CHECK(ring.contains(cplx(0, -1.0)));
    CHECK_FALSE(ring.contains(cplx(0.3, 0.3)));
    auto rr = ring.as_centered_radial();
    REQUIRE(rr.has_value());
    CHECK(rr->first == 0.7);
    CHECK(rr->second == 1.6);

    // rotating a centered annulus keeps it recognizably radial
    auto spun = geom::make_rotation(geom::make_annulus(0.7, 1.6), 0.9);
    CHECK(spun.as_centered_radial().has_value());
    CHECK(spun.contains(cplx(1.0, 0.5)));

    auto square = geom::make_centered_square(std::sqrt(pi));
    double h = std::sqrt(pi) / 2.0;
    CHECK(square.contains(cplx(0.99 * h, 0.99 * h)));
    CHECK_FALSE(square.contains(cplx(1.01 * h, 0)));
    CHECK(square.bounding_radius() == Catch::Approx(h * std::sqrt(2.0)));
    CHECK(square.involves_polygon());
    CHECK_FALSE(square.as_centered_radial().has_value());

    // the square spun by pi/4 leaves by the old corner and gains the new one
    auto tilted = geom::make_rotation(geom::make_centered_square(std::sqrt(pi)), pi / 4.0);
    CHECK(tilted.contains(cplx(0, 0.99 * h * std::sqrt(2.0))));
    CHECK_FALSE(tilted.contains(cplx(0.99 * h * std::sqrt(2.0), 0.99 * h * std::sqrt(2.0))));
    CHECK(tilted.involves_polygon());
}

TEST_CASE("pseudohyperbolic discs agree with their defining inequality") {
    // brute-force membership straight from |z - c| < rho |z - conj(c)|,
    // compared with the closed Euclidean center/radius used for breakpoints
    for (auto [cx, cy, rho] : {std::tuple{0.0, 1.0, 0.4}, {0.8, 2.0, 0.65}, {-1.5, 0.7, 0.25}}) {
        cplx c(cx, cy);
        auto dom = geom::make_pseudodisk(c, rho);
        auto [ec, er] = geom::detail::pseudodisk_euclidean({c, rho});
        for (int k = 0; k < 400; ++k) {
            double r = 1.6 * er * std::sqrt((k + 0.5) / 400.0);
            cplx z = ec + std::polar(r, 2.399963229728653 * k);
            if (std::fabs(std::abs(z - ec) - er) < 1e-9) continue;  // skip the rim
            bool direct = z.imag() > 0.0 && std::abs(z - c) < rho * std::abs(z - std::conj(c));
            CHECK(dom.contains(z) == direct);
            CHECK((std::abs(z - ec) < er) == direct);
        }
        CHECK(dom.bounding_radius() == Catch::Approx(std::abs(ec) + er));
    }
}

TEST_CASE("radial breakpoints sit at tangency and vertex radii") {
    auto disk = geom::make_disk(cplx(0.5, 0), 0.75);
    auto bp = disk.radial_breakpoints();
    REQUIRE(bp.size() == 2);
    CHECK(bp[0] == Catch::Approx(0.25));
    CHECK(bp[1] == Catch::Approx(1.25));

    auto ring = geom::make_annulus(0.7, 1.6);
    bp = ring.radial_breakpoints();
    REQUIRE(bp.size() == 2);
    CHECK(bp[0] == 0.7);
    CHECK(bp[1] == 1.6);

    // square: one radius where circles meet edge midpoints, one for corners
    double h = std::sqrt(pi) / 2.0;
    bp = geom::make_centered_square(std::sqrt(pi)).radial_breakpoints();
    REQUIRE(bp.size() == 2);
    CHECK(bp[0] == Catch::Approx(h));
    CHECK(bp[1] == Catch::Approx(h * std::sqrt(2.0)));

    // a union merges member breakpoints; rotation preserves them
    auto two = geom::make_union(
        {geom::make_annulus(0.5, 1.0), geom::make_disk(cplx(1.8, 0), 0.3)});
    bp = geom::make_rotation(two, 1.1).radial_breakpoints();
    REQUIRE(bp.size() == 4);
    CHECK(bp[0] == 0.5);
    CHECK(bp[1] == 1.0);
    CHECK(bp[2] == Catch::Approx(1.5));
    CHECK(bp[3] == Catch::Approx(2.1));
}

TEST_CASE("quadrature reproduces closed moments on centered shapes") {
    auto quad = default_quad();
    auto fock = geom::RadialMeasure::fock();

    auto disk = geom::make_disk(cplx(0, 0), 1.2);
    for (int m = 0; m <= 12; m += 3) {
        auto got = geom::monomial_moment(disk, fock, m, 0, quad);
        double want = geom::closed_moment(fock, 2 * m + 1, 1.2);
        CHECK(std::abs(got.value - want) <= 10.0 * quad.target_abs_tol);
        CHECK(got.value.imag() == Catch::Approx(0.0).margin(1e-14));
    }

    auto ring = geom::make_annulus(0.7, 1.6);
    for (int m : {0, 5, 9}) {
        auto got = geom::monomial_moment(ring, fock, m, 0, quad);
        double want = geom::closed_moment(fock, 2 * m + 1, 1.6) -
                      geom::closed_moment(fock, 2 * m + 1, 0.7);
        CHECK(std::abs(got.value - want) <= 10.0 * quad.target_abs_tol);
    }

    auto bergman = geom::RadialMeasure::bergman(0.7);
    auto small = geom::make_disk(cplx(0, 0), 0.85);
    for (int m : {0, 2, 6}) {
        auto got = geom::monomial_moment(small, bergman, m, 0, quad);
        double want = geom::closed_moment(bergman, 2 * m + 1, 0.85);
        CHECK(std::abs(got.value - want) <= 10.0 * quad.target_abs_tol);
    }

    // angular orthogonality kills every k > 0 moment on radial domains
    for (int k : {1, 2, 5}) {
        CHECK(std::abs(geom::monomial_moment(disk, fock, 1, k, quad).value) < 1e-12);
        CHECK(std::abs(geom::monomial_moment(ring, fock, 0, k, quad).value) < 1e-12);
    }
}

TEST_CASE("square Gaussian moments match two independent oracles") {
    auto quad = default_quad();
    auto fock = geom::RadialMeasure::fock();
    auto square = geom::make_centered_square(std::sqrt(pi));
    double h = std::sqrt(pi) / 2.0;

    // mass: the closed erf form, frozen, and a Cartesian Simpson grid that
    // shares nothing with the polar rule under test
    double erf_mass = std::erf(std::sqrt(pi) * h) * std::erf(std::sqrt(pi) * h);
    CHECK(erf_mass == Catch::Approx(0.9480506491415529).epsilon(1e-14));
    auto mass = geom::monomial_moment(square, fock, 0, 0, quad);
    CHECK(std::abs(mass.value - erf_mass) <= 10.0 * quad.target_abs_tol);

    // first angular moment that survives the four-fold symmetry: k = 4
    double cart = oracle::simpson2d(
                      [](double x, double y) {
                          double xx = x * x, yy = y * y;
                          return (xx * xx + yy * yy - 6.0 * xx * yy) * std::exp(-pi * (xx + yy));
                      },
                      -h, h, -h, h, 512, 512)
                      .real();
    CHECK(cart == Catch::Approx(-0.017779475925121746).margin(1e-10));
    auto i04 = geom::monomial_moment(square, fock, 0, 4, quad);
    CHECK(std::abs(i04.value.real() - (-0.017779475925121746)) <= 10.0 * quad.target_abs_tol);
    CHECK(std::abs(i04.value.imag()) <= 10.0 * quad.target_abs_tol);

    // k not divisible by 4 dies by symmetry even though the square is not radial
    auto i03 = geom::monomial_moment(square, fock, 0, 3, quad);
    CHECK(std::abs(i03.value) <= 10.0 * quad.target_abs_tol);
}

TEST_CASE("rotating a domain multiplies conj-monomial moments by a phase") {
    auto quad = default_quad();
    auto fock = geom::RadialMeasure::fock();
    auto square = geom::make_centered_square(std::sqrt(pi));
    auto base = geom::monomial_moment(square, fock, 0, 4, quad).value;

    for (double theta : {pi / 8.0, pi / 4.0, 0.37}) {
        auto spun = geom::make_rotation(geom::make_centered_square(std::sqrt(pi)), theta);
        auto got = geom::monomial_moment(spun, fock, 0, 4, quad).value;
        cplx want = base * std::polar(1.0, -4.0 * theta);
        CHECK(std::abs(got - want) <= 20.0 * quad.target_abs_tol);
    }
}

TEST_CASE("union integrals add up and off-center masses stay consistent") {
    auto quad = default_quad();
    auto fock = geom::RadialMeasure::fock();
    auto ring = geom::make_annulus(0.5, 1.0);
    auto blob = geom::make_disk(cplx(1.8, 0), 0.3);
    auto both = geom::make_union({ring, blob});

    auto one = [&](const geom::Domain& d) {
        return geom::integrate(d, fock, [](cplx) { return cplx(1.0, 0.0); }, quad).value;
    };
    CHECK(std::abs(one(both) - one(ring) - one(blob)) <= 20.0 * quad.target_abs_tol);

    // translating a disk off-center strictly loses Gaussian mass
    CHECK(one(blob).real() < one(geom::make_disk(cplx(0, 0), 0.3)).real());
}

TEST_CASE("node doubling reports failure instead of a silent wrong answer") {
    geom::QuadratureSpec tight;
    tight.target_abs_tol = 1e-15;
    tight.max_refinements = 2;
    auto fock = geom::RadialMeasure::fock();
    auto blob = geom::make_disk(cplx(0.9, 0), 0.6);
    CHECK_THROWS_AS(
        geom::integrate(blob, fock, [](cplx) { return cplx(1.0, 0.0); }, tight),
        NonConvergence);

    // Bergman quadrature refuses domains that poke out of the unit disc
    auto bergman = geom::RadialMeasure::bergman(1.0);
    auto wide = geom::make_disk(cplx(0.5, 0), 0.6);
    CHECK_THROWS_AS(
        geom::integrate(wide, bergman, [](cplx) { return cplx(1.0, 0.0); }, default_quad()),
        std::invalid_argument);
}
