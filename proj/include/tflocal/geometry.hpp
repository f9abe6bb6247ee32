#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "tflocal/errors.hpp"
#include "tflocal/special_functions.hpp"

namespace tflocal::geom {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Radial measures on the plane (Gaussian) and on the unit disc (weighted area)
// ---------------------------------------------------------------------------

enum class MeasureKind { FockGaussian, BergmanAlpha };

struct RadialMeasure {
    MeasureKind kind = MeasureKind::FockGaussian;
    double alpha = 0.0;  // Bergman exponent, unused for the Gaussian

    static RadialMeasure fock() { return {MeasureKind::FockGaussian, 0.0}; }

    static RadialMeasure bergman(double alpha) {
        if (!(alpha > -1.0)) throw std::domain_error("RadialMeasure: alpha must exceed -1");
        return {MeasureKind::BergmanAlpha, alpha};
    }

    double support_radius() const {
        return kind == MeasureKind::FockGaussian ? std::numeric_limits<double>::infinity()
                                                 : 1.0;
    }

    // Density with respect to Lebesgue area. The Bergman density carries the
    // normalized-area 1/pi and the (alpha+1) factor that makes total mass 1.
    double weight_at(double r) const {
        if (!(r >= 0.0)) throw std::domain_error("weight_at: r must be nonnegative");
        if (kind == MeasureKind::FockGaussian) return std::exp(-kPi * r * r);
        if (!(r < 1.0)) throw std::domain_error("weight_at: Bergman weight needs r < 1");
        return (alpha + 1.0) * std::pow(1.0 - r * r, alpha) / kPi;
    }
};

// Odd radial moment c_{n,R} = 2 pi Int_0^R r^n mu(r) dr in closed form.
// For n = 2m+1: Gaussian gives (m!/pi^m) P(m+1, pi R^2); the Bergman weight
// gives (alpha+1) B(m+1, alpha+1) I_{R^2}(m+1, alpha+1).
inline double closed_moment(const RadialMeasure& mu, int n, double R) {
    if (n < 1 || n % 2 == 0) throw std::invalid_argument("closed_moment: n must be odd and positive");
    if (!(R > 0.0)) throw std::domain_error("closed_moment: R must be positive");
    const int m = (n - 1) / 2;
    if (mu.kind == MeasureKind::FockGaussian) {
        double scale = std::exp(std::lgamma(m + 1.0) - m * std::log(kPi));
        if (std::isinf(R)) return scale;
        return scale * special::regularized_lower_gamma(m + 1.0, kPi * R * R);
    }
    if (!(R <= 1.0)) throw std::domain_error("closed_moment: Bergman support ends at R = 1");
    double a = mu.alpha;
    double lbeta = std::lgamma(m + 1.0) + std::lgamma(a + 1.0) - std::lgamma(m + a + 2.0);
    double ix = R == 1.0 ? 1.0 : special::regularized_incomplete_beta(m + 1.0, a + 1.0, R * R);
    return (a + 1.0) * std::exp(lbeta) * ix;
}

// ---------------------------------------------------------------------------
// Localization domains
// ---------------------------------------------------------------------------

struct Disk {
    cplx center;
    double radius;
};

struct Annulus {
    double r_inner;
    double r_outer;
};

struct Polygon {
    std::vector<cplx> vertices;  // simple, counterclockwise
};

class Domain;

struct UnionOf {
    std::vector<Domain> members;  // pairwise disjoint
};

struct Rotated {
    std::shared_ptr<const Domain> inner;
    double angle;  // Rotated = { e^{i angle} w : w in inner }
};

// Pseudohyperbolic disc in the upper half-plane: { z : |z-c|/|z-conj(c)| < rho }.
struct HalfPlanePseudoDisk {
    cplx center;  // Im(center) > 0
    double rho;   // in (0, 1)
};

namespace detail {

inline double cross(cplx o, cplx a, cplx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
}

inline bool on_segment(cplx p, cplx q, cplx r) {
    return std::min(p.real(), r.real()) <= q.real() && q.real() <= std::max(p.real(), r.real()) &&
           std::min(p.imag(), r.imag()) <= q.imag() && q.imag() <= std::max(p.imag(), r.imag());
}

inline bool segments_intersect(cplx p1, cplx p2, cplx q1, cplx q2) {
    auto sgn = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
    int d1 = sgn(cross(p1, p2, q1));
    int d2 = sgn(cross(p1, p2, q2));
    int d3 = sgn(cross(q1, q2, p1));
    int d4 = sgn(cross(q1, q2, p2));
    if (d1 != d2 && d3 != d4) return true;
    if (d1 == 0 && on_segment(p1, q1, p2)) return true;
    if (d2 == 0 && on_segment(p1, q2, p2)) return true;
    if (d3 == 0 && on_segment(q1, p1, q2)) return true;
    if (d4 == 0 && on_segment(q1, p2, q2)) return true;
    return false;
}

inline bool point_in_polygon(const std::vector<cplx>& v, cplx z) {
    bool inside = false;
    const std::size_t n = v.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        double yi = v[i].imag(), yj = v[j].imag();
        if ((yi > z.imag()) != (yj > z.imag())) {
            double xcut = (v[j].real() - v[i].real()) * (z.imag() - yi) / (yj - yi) + v[i].real();
            if (z.real() < xcut) inside = !inside;
        }
    }
    return inside;
}

// Euclidean center/radius of a half-plane pseudohyperbolic disc.
inline std::pair<cplx, double> pseudodisk_euclidean(const HalfPlanePseudoDisk& d) {
    double a = d.center.real(), b = d.center.imag(), rho = d.rho;
    double denom = 1.0 - rho * rho;
    return {cplx(a, b * (1.0 + rho * rho) / denom), 2.0 * b * rho / denom};
}

}  // namespace detail

class Domain {
public:
    using Shape = std::variant<Disk, Annulus, Polygon, UnionOf, Rotated, HalfPlanePseudoDisk>;

    explicit Domain(Shape shape) : shape_(std::move(shape)) { validate(); }

    const Shape& shape() const { return shape_; }

    bool contains(cplx z) const {
        return std::visit(
            [&](const auto& s) -> bool {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Disk>) {
                    return std::abs(z - s.center) < s.radius;
                } else if constexpr (std::is_same_v<T, Annulus>) {
                    double r = std::abs(z);
                    return s.r_inner <= r && r < s.r_outer;
                } else if constexpr (std::is_same_v<T, Polygon>) {
                    return detail::point_in_polygon(s.vertices, z);
                } else if constexpr (std::is_same_v<T, UnionOf>) {
                    for (const auto& m : s.members)
                        if (m.contains(z)) return true;
                    return false;
                } else if constexpr (std::is_same_v<T, Rotated>) {
                    return s.inner->contains(z * std::polar(1.0, -s.angle));
                } else {
                    if (!(z.imag() > 0.0)) return false;
                    double num = std::abs(z - s.center);
                    double den = std::abs(z - std::conj(s.center));
                    return num < s.rho * den;
                }
            },
            shape_);
    }

    double bounding_radius() const {
        return std::visit(
            [&](const auto& s) -> double {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Disk>) {
                    return std::abs(s.center) + s.radius;
                } else if constexpr (std::is_same_v<T, Annulus>) {
                    return s.r_outer;
                } else if constexpr (std::is_same_v<T, Polygon>) {
                    double r = 0.0;
                    for (cplx v : s.vertices) r = std::max(r, std::abs(v));
                    return r;
                } else if constexpr (std::is_same_v<T, UnionOf>) {
                    double r = 0.0;
                    for (const auto& m : s.members) r = std::max(r, m.bounding_radius());
                    return r;
                } else if constexpr (std::is_same_v<T, Rotated>) {
                    return s.inner->bounding_radius();
                } else {
                    auto [c, r] = detail::pseudodisk_euclidean(s);
                    return std::abs(c) + r;
                }
            },
            shape_);
    }

    // Radii at which the indicator can change its intersection pattern with a
    // circle around the origin; quadrature aligns radial panels here.
    std::vector<double> radial_breakpoints() const {
        std::vector<double> out;
        collect_breakpoints(out);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end(),
                              [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
                  out.end());
        return out;
    }

    // (r_inner, r_outer) when the domain is exactly a disc or annulus around 0.
    std::optional<std::pair<double, double>> as_centered_radial() const {
        if (const auto* d = std::get_if<Disk>(&shape_)) {
            if (d->center == cplx(0.0, 0.0)) return std::make_pair(0.0, d->radius);
            return std::nullopt;
        }
        if (const auto* a = std::get_if<Annulus>(&shape_))
            return std::make_pair(a->r_inner, a->r_outer);
        if (const auto* r = std::get_if<Rotated>(&shape_)) return r->inner->as_centered_radial();
        return std::nullopt;
    }

    bool involves_polygon() const {
        if (std::holds_alternative<Polygon>(shape_)) return true;
        if (const auto* u = std::get_if<UnionOf>(&shape_)) {
            for (const auto& m : u->members)
                if (m.involves_polygon()) return true;
            return false;
        }
        if (const auto* r = std::get_if<Rotated>(&shape_)) return r->inner->involves_polygon();
        return false;
    }

private:
    void validate() const {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Disk>) {
                    if (!(s.radius > 0.0)) throw std::invalid_argument("Disk: radius must be positive");
                } else if constexpr (std::is_same_v<T, Annulus>) {
                    if (!(s.r_inner >= 0.0 && s.r_inner < s.r_outer))
                        throw std::invalid_argument("Annulus: need 0 <= r_inner < r_outer");
                } else if constexpr (std::is_same_v<T, Polygon>) {
                    validate_polygon(s);
                } else if constexpr (std::is_same_v<T, UnionOf>) {
                    if (s.members.empty()) throw std::invalid_argument("UnionOf: no members");
                    validate_disjoint(s);
                } else if constexpr (std::is_same_v<T, Rotated>) {
                    if (!s.inner) throw std::invalid_argument("Rotated: missing inner domain");
                } else {
                    if (!(s.center.imag() > 0.0))
                        throw std::invalid_argument("HalfPlanePseudoDisk: center must have Im > 0");
                    if (!(s.rho > 0.0 && s.rho < 1.0))
                        throw std::invalid_argument("HalfPlanePseudoDisk: rho must lie in (0, 1)");
                }
            },
            shape_);
    }

    static void validate_polygon(const Polygon& p) {
        const auto& v = p.vertices;
        const std::size_t n = v.size();
        if (n < 3) throw std::invalid_argument("Polygon: needs at least 3 vertices");
        double area2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx a = v[i], b = v[(i + 1) % n];
            area2 += a.real() * b.imag() - b.real() * a.imag();
        }
        if (!(area2 > 0.0))
            throw std::invalid_argument("Polygon: vertices must be counterclockwise");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                // skip edges sharing a vertex
                if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
                if (detail::segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]))
                    throw std::invalid_argument("Polygon: edges self-intersect");
            }
        }
    }

    // Disjointness is checked on a deterministic spiral of sample points in
    // each member's bounding disc; it is a guard, not an exact predicate.
    static void validate_disjoint(const UnionOf& u) {
        constexpr int kSamples = 512;
        constexpr double kGolden = 2.399963229728653;
        for (std::size_t i = 0; i < u.members.size(); ++i) {
            double R = u.members[i].bounding_radius();
            for (int k = 0; k < kSamples; ++k) {
                double r = R * std::sqrt((k + 0.5) / kSamples);
                cplx p = std::polar(r, kGolden * k);
                if (!u.members[i].contains(p)) continue;
                for (std::size_t j = 0; j < u.members.size(); ++j) {
                    if (j != i && u.members[j].contains(p))
                        throw std::invalid_argument("UnionOf: members overlap");
                }
            }
        }
    }

    void collect_breakpoints(std::vector<double>& out) const {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, Disk>) {
                    double c = std::abs(s.center);
                    out.push_back(std::fabs(c - s.radius));
                    out.push_back(c + s.radius);
                } else if constexpr (std::is_same_v<T, Annulus>) {
                    out.push_back(s.r_inner);
                    out.push_back(s.r_outer);
                } else if constexpr (std::is_same_v<T, Polygon>) {
                    const auto& v = s.vertices;
                    for (std::size_t i = 0; i < v.size(); ++i) {
                        out.push_back(std::abs(v[i]));
                        cplx a = v[i], b = v[(i + 1) % v.size()];
                        cplx e = b - a;
                        double len2 = std::norm(e);
                        if (len2 == 0.0) continue;
                        double t = -(a.real() * e.real() + a.imag() * e.imag()) / len2;
                        if (t > 0.0 && t < 1.0) out.push_back(std::abs(a + t * e));
                    }
                } else if constexpr (std::is_same_v<T, UnionOf>) {
                    for (const auto& m : s.members) m.collect_breakpoints(out);
                } else if constexpr (std::is_same_v<T, Rotated>) {
                    s.inner->collect_breakpoints(out);
                } else {
                    auto [c, r] = detail::pseudodisk_euclidean(s);
                    double cc = std::abs(c);
                    out.push_back(std::fabs(cc - r));
                    out.push_back(cc + r);
                }
            },
            shape_);
    }

    Shape shape_;
};

inline Domain make_disk(cplx center, double radius) { return Domain(Disk{center, radius}); }
inline Domain make_annulus(double r_inner, double r_outer) {
    return Domain(Annulus{r_inner, r_outer});
}
inline Domain make_polygon(std::vector<cplx> vertices) {
    return Domain(Polygon{std::move(vertices)});
}
inline Domain make_union(std::vector<Domain> members) { return Domain(UnionOf{std::move(members)}); }
inline Domain make_rotation(Domain inner, double angle) {
    return Domain(Rotated{std::make_shared<Domain>(std::move(inner)), angle});
}
inline Domain make_pseudodisk(cplx center, double rho) {
    return Domain(HalfPlanePseudoDisk{center, rho});
}

// Axis-aligned square of the given side length centered at the origin.
inline Domain make_centered_square(double side) {
    double h = side / 2.0;
    return make_polygon({cplx(-h, -h), cplx(h, -h), cplx(h, h), cplx(-h, h)});
}

// ---------------------------------------------------------------------------
// Polar tensor quadrature with node-doubling error estimates
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    int radial_nodes = 64;        // base radial point count (composite Gauss-Legendre)
    int angular_nodes = 256;      // base uniform angular point count
    double target_abs_tol = 1e-8;
    int max_refinements = 4;      // node doublings attempted beyond the base level

    void validate() const {
        if (radial_nodes < 16 || angular_nodes < 16)
            throw std::invalid_argument("QuadratureSpec: node counts must be at least 16");
        if (!(target_abs_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: tolerance must be positive");
        if (max_refinements < 1)
            throw std::invalid_argument("QuadratureSpec: need at least one refinement level");
    }
};

namespace detail {

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGlNodes[8] = {
    -0.9602898564975362316835609, -0.7966664774136267395915539,
    -0.5255324099163289858177390, -0.1834346424956498049394761,
    0.1834346424956498049394761,  0.5255324099163289858177390,
    0.7966664774136267395915539,  0.9602898564975362316835609};
inline constexpr double kGlWeights[8] = {
    0.1012285362903762591525314, 0.2223810344533744705443560,
    0.3137066458778872873379622, 0.3626837833783619829651504,
    0.3626837833783619829651504, 0.3137066458778872873379622,
    0.2223810344533744705443560, 0.1012285362903762591525314};

// Angular interval of the circle |z| = r lying inside a domain; hi > lo and
// hi - lo <= 2 pi. A full circle is {shift, shift + 2 pi}.
struct Arc {
    double lo, hi;
};

inline void push_disk_arcs(cplx center, double radius, double r, double shift,
                           std::vector<Arc>& out) {
    double c = std::abs(center);
    if (c < 1e-300) {
        if (r < radius) out.push_back({shift, shift + 2.0 * kPi});
        return;
    }
    double cosphi = (r * r + c * c - radius * radius) / (2.0 * r * c);
    if (cosphi >= 1.0) return;
    if (cosphi <= -1.0) {
        out.push_back({shift, shift + 2.0 * kPi});
        return;
    }
    double phi = std::acos(cosphi);
    double base = std::arg(center) + shift;
    out.push_back({base - phi, base + phi});
}

inline void push_polygon_arcs(const std::vector<cplx>& v, double r, double shift,
                              std::vector<Arc>& out) {
    std::vector<double> cuts;
    for (std::size_t i = 0; i < v.size(); ++i) {
        cplx a = v[i], e = v[(i + 1) % v.size()] - v[i];
        double A = std::norm(e);
        if (A == 0.0) continue;
        double B = 2.0 * (a.real() * e.real() + a.imag() * e.imag());
        double C = std::norm(a) - r * r;
        double disc = B * B - 4.0 * A * C;
        if (disc <= 0.0) continue;
        double sq = std::sqrt(disc);
        for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
            if (t > 0.0 && t < 1.0) cuts.push_back(std::arg(a + t * e));
        }
    }
    if (cuts.empty()) {
        // no boundary crossing: the circle is wholly inside or outside
        if (point_in_polygon(v, std::polar(r, 0.6180339887498949)))
            out.push_back({shift, shift + 2.0 * kPi});
        return;
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        double lo = cuts[i];
        double hi = i + 1 < cuts.size() ? cuts[i + 1] : cuts[0] + 2.0 * kPi;
        if (hi - lo < 1e-15) continue;
        if (point_in_polygon(v, std::polar(r, 0.5 * (lo + hi))))
            out.push_back({lo + shift, hi + shift});
    }
}

// The cut angles only partition the circle; membership of each piece is
// decided by a midpoint test, so grazing contacts degrade gracefully.
inline void append_circle_arcs(const Domain& d, double r, double shift, std::vector<Arc>& out) {
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Disk>) {
                push_disk_arcs(s.center, s.radius, r, shift, out);
            } else if constexpr (std::is_same_v<T, Annulus>) {
                if (s.r_inner <= r && r < s.r_outer) out.push_back({shift, shift + 2.0 * kPi});
            } else if constexpr (std::is_same_v<T, Polygon>) {
                push_polygon_arcs(s.vertices, r, shift, out);
            } else if constexpr (std::is_same_v<T, UnionOf>) {
                for (const auto& m : s.members) append_circle_arcs(m, r, shift, out);
            } else if constexpr (std::is_same_v<T, Rotated>) {
                append_circle_arcs(*s.inner, r, shift + s.angle, out);
            } else {
                auto [ec, er] = pseudodisk_euclidean(s);
                push_disk_arcs(ec, er, r, shift, out);
            }
        },
        d.shape());
}

inline std::vector<Arc> circle_arcs(const Domain& d, double r) {
    std::vector<Arc> out;
    append_circle_arcs(d, r, 0.0, out);
    return out;
}

// A[q] = sum over arcs of Int e^{i q theta} d theta, q = 0..qmax; negative
// harmonics follow by conjugation.
inline void arc_harmonics(const std::vector<Arc>& arcs, int qmax, std::vector<cplx>& A) {
    A.assign(static_cast<std::size_t>(qmax) + 1, cplx(0.0, 0.0));
    for (const Arc& arc : arcs) {
        A[0] += arc.hi - arc.lo;
        cplx plo = std::polar(1.0, arc.lo), phi = std::polar(1.0, arc.hi);
        cplx flo = plo, fhi = phi;
        for (int q = 1; q <= qmax; ++q) {
            A[q] += (fhi - flo) / cplx(0.0, static_cast<double>(q));
            flo *= plo;
            fhi *= phi;
        }
    }
}

// Panel edges in u = r^2: start from {0, u_max} plus the breakpoints, split
// the widest panel until the target count is met, then grade geometrically
// into each breakpoint because arcs open and close like sqrt there. Each
// refine level then halves every panel, so refinement reaches all of them
// and level-to-level movement is a trustworthy error signal.
inline std::vector<double> panel_edges(double u_max, const std::vector<double>& u_breakpoints,
                                       int panel_target, int grade_levels,
                                       int refine_levels = 0) {
    std::vector<double> edges{0.0, u_max};
    std::vector<double> marks;
    for (double u : u_breakpoints) {
        if (u <= 1e-14) continue;
        if (u < u_max - 1e-14) {
            edges.push_back(u);
            marks.push_back(u);
        } else if (std::fabs(u - u_max) <= 1e-12 * std::max(1.0, u_max)) {
            marks.push_back(u_max);
        }
    }
    auto dedupe = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end(),
                            [](double a, double b) { return std::fabs(a - b) < 1e-14; }),
                v.end());
    };
    dedupe(edges);
    while (static_cast<int>(edges.size()) - 1 < panel_target) {
        std::size_t widest = 0;
        double w = -1.0;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            if (edges[i + 1] - edges[i] > w) {
                w = edges[i + 1] - edges[i];
                widest = i;
            }
        }
        edges.insert(edges.begin() + widest + 1, 0.5 * (edges[widest] + edges[widest + 1]));
    }
    if (grade_levels > 0 && !marks.empty()) {
        std::vector<double> extra;
        for (double m : marks) {
            auto it = std::lower_bound(edges.begin(), edges.end(), m - 1e-13);
            if (it == edges.end()) continue;
            std::size_t i = static_cast<std::size_t>(it - edges.begin());
            if (i > 0) {
                double w = edges[i] - edges[i - 1], f = 0.25;
                for (int g = 0; g < grade_levels; ++g, f *= 0.25) extra.push_back(edges[i] - w * f);
            }
            if (i + 1 < edges.size()) {
                double w = edges[i + 1] - edges[i], f = 0.25;
                for (int g = 0; g < grade_levels; ++g, f *= 0.25) extra.push_back(edges[i] + w * f);
            }
        }
        edges.insert(edges.end(), extra.begin(), extra.end());
        dedupe(edges);
    }
    for (int l = 0; l < refine_levels; ++l) {
        std::vector<double> mids;
        mids.reserve(edges.size() - 1);
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            mids.push_back(0.5 * (edges[i] + edges[i + 1]));
        edges.insert(edges.end(), mids.begin(), mids.end());
        std::sort(edges.begin(), edges.end());
    }
    return edges;
}

// Upper integration limit in u: the domain bound, capped by the radius where
// a Gaussian integrand of the hinted polynomial degree falls below 1e-20.
inline double radial_cutoff_u(const Domain& domain, const RadialMeasure& mu, int degree_hint) {
    double rb = domain.bounding_radius();
    if (mu.kind == MeasureKind::FockGaussian) {
        double u_tail = (60.0 + 2.0 * degree_hint) / kPi;
        return std::min(rb * rb, u_tail);
    }
    const double r_cap = 1.0 - 1e-6;
    if (rb > r_cap + 1e-15)
        throw std::invalid_argument(
            "quadrature: Bergman domains must have bounding radius <= 1 - 1e-6");
    return std::min(rb, r_cap) * std::min(rb, r_cap);
}

struct RadialNode {
    double r;
    double w;  // Gauss-Legendre weight times du/2 times the measure density
};

inline std::vector<RadialNode> radial_rule(const Domain& domain, const RadialMeasure& mu,
                                           int radial_nodes, int degree_hint,
                                           const std::vector<double>& extra_breakpoints,
                                           int grade_levels, int refine_levels = 0) {
    double u_max = radial_cutoff_u(domain, mu, degree_hint);
    std::vector<double> ubp;
    for (double r : domain.radial_breakpoints()) ubp.push_back(r * r);
    for (double r : extra_breakpoints) ubp.push_back(r * r);
    auto edges = panel_edges(u_max, ubp, std::max(2, radial_nodes / 8), grade_levels,
                             refine_levels);
    std::vector<RadialNode> nodes;
    nodes.reserve((edges.size() - 1) * 8);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        double mid = 0.5 * (edges[p] + edges[p + 1]);
        double half = 0.5 * (edges[p + 1] - edges[p]);
        for (int g = 0; g < 8; ++g) {
            double u = mid + half * kGlNodes[g];
            double r = std::sqrt(u);
            nodes.push_back({r, 0.5 * kGlWeights[g] * half * mu.weight_at(r)});
        }
    }
    return nodes;
}

struct PolarNode {
    cplx z;
    double w;  // radial weight times the angular Gauss-Legendre weight
};

// Tensor rule: radial panels as above; in theta, each arc is integrated by
// composite Gauss-Legendre with enough pieces to keep the full circle at
// angular_nodes points. No indicator is ever sampled; arcs are exact.
inline std::vector<PolarNode> build_polar_rule(const Domain& domain, const RadialMeasure& mu,
                                               int radial_nodes, int angular_nodes,
                                               int degree_hint,
                                               const std::vector<double>& extra_breakpoints,
                                               int grade_levels, int refine_levels = 0) {
    auto radial = radial_rule(domain, mu, radial_nodes, degree_hint, extra_breakpoints,
                              grade_levels, refine_levels);
    const double pieces_per_radian = std::max(2, angular_nodes / 8) / (2.0 * kPi);
    std::vector<PolarNode> nodes;
    for (const auto& rn : radial) {
        if (rn.w == 0.0) continue;
        for (const Arc& arc : circle_arcs(domain, rn.r)) {
            double len = arc.hi - arc.lo;
            int pieces = std::max(1, static_cast<int>(std::ceil(len * pieces_per_radian)));
            double plen = len / pieces;
            for (int p = 0; p < pieces; ++p) {
                double mid = arc.lo + (p + 0.5) * plen;
                for (int g = 0; g < 8; ++g) {
                    double theta = mid + 0.5 * plen * kGlNodes[g];
                    nodes.push_back({std::polar(rn.r, theta), rn.w * 0.5 * plen * kGlWeights[g]});
                }
            }
        }
    }
    return nodes;
}

}  // namespace detail

struct IntegralResult {
    cplx value;
    double err_estimate;
    int levels_used;
};

// Int over the domain of f(z) against the measure. Radial direction:
// breakpoint-aligned composite Gauss-Legendre in u = r^2 with geometric
// grading into the breakpoints. Angular direction: exact arcs of the circle
// inside the domain, Gauss-Legendre on each. Node counts double until the
// last two levels agree.
template <typename F>
IntegralResult integrate(const Domain& domain, const RadialMeasure& mu, F&& f,
                         const QuadratureSpec& quad, int degree_hint = 0) {
    quad.validate();
    cplx prev{};
    for (int level = 0; level <= quad.max_refinements; ++level) {
        auto rule = detail::build_polar_rule(domain, mu, quad.radial_nodes,
                                             quad.angular_nodes << level, degree_hint, {},
                                             4 + level, level);
        cplx sum{};
        for (const auto& node : rule) sum += node.w * f(node.z);
        if (level > 0) {
            double err = std::abs(sum - prev);
            if (err <= quad.target_abs_tol) return {sum, err, level};
            if (level == quad.max_refinements)
                throw NonConvergence("integrate: node doubling stalled above tolerance", err,
                                     quad.target_abs_tol);
        }
        prev = sum;
    }
    return {prev, 0.0, 0};  // unreachable
}

// Monomial moment Int_Omega |z|^{2m} conj(z)^k dmu(z); the double
// orthogonality tests are built from these.
inline IntegralResult monomial_moment(const Domain& domain, const RadialMeasure& mu, int m, int k,
                                      const QuadratureSpec& quad) {
    if (m < 0 || k < 0) throw std::invalid_argument("monomial_moment: m, k must be nonnegative");
    return integrate(
        domain, mu,
        [m, k](cplx z) {
            double r2 = std::norm(z);
            double radial = m == 0 ? 1.0 : std::pow(r2, m);
            return radial * (k == 0 ? cplx(1.0, 0.0) : std::pow(std::conj(z), k));
        },
        quad, 2 * m + k);
}

}  // namespace tflocal::geom
