// Command-line front door: parses an experiment config, dispatches to the
// library, and writes reproducible CSV/JSON artifacts. Exit codes: 0 success,
// 2 config error, 3 numeric failure.
//
// Domains for the `direct` and `probe` commands live in the time-frequency
// plane (x, xi). The analytic basis sees the xi-reflected set, so a domain
// and its reflection produce transposed matrices; centered disks, annuli,
// and symmetric polygons are unaffected. The `wavelet` command works in the
// unit disc; its pseudodisks are pseudohyperbolic discs there.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <tflocal/fock_operator.hpp>
#include <tflocal/io.hpp>
#include <tflocal/validate_suite.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using tflocal::geom::cplx;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Strict config access: every key is declared, unknown keys are rejected,
// and defaults are materialized into the echoed config.

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw ConfigError("unknown field \"" + item.key() + "\" in " + where);
    }
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + " needs field \"" + key + "\"");
    if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj.at(key).get<double>();
}

double get_number_or(const json& obj, const std::string& key, double fallback,
                     const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number()) throw ConfigError(where + "." + key + " must be a number");
    return obj.at(key).get<double>();
}

long get_integer_or(const json& obj, const std::string& key, long fallback,
                    const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw ConfigError(where + "." + key + " must be an integer");
    return obj.at(key).get<long>();
}

std::string get_string_or(const json& obj, const std::string& key, const std::string& fallback,
                          const std::string& where) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) throw ConfigError(where + "." + key + " must be a string");
    return obj.at(key).get<std::string>();
}

cplx get_point(const json& obj, const std::string& key, cplx fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& p = obj.at(key);
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw ConfigError(where + "." + key + " must be a [re, im] pair");
    return cplx(p[0].get<double>(), p[1].get<double>());
}

// ---------------------------------------------------------------------------
// Domain specs: tagged records such as {"shape":"disk","center":[0,0],
// "radius":1.0}. Returns the canonical echo and the built domain together so
// the two cannot drift apart.

struct ParsedDomain {
    json echo;
    tflocal::geom::Domain domain;
};

ParsedDomain parse_domain(const json& spec, const std::string& where);

ParsedDomain parse_domain_impl(const json& spec, const std::string& where) {
    using namespace tflocal::geom;
    if (!spec.is_object() || !spec.contains("shape") || !spec.at("shape").is_string())
        throw ConfigError(where + " must be an object with a \"shape\" string");
    const std::string shape = spec.at("shape").get<std::string>();

    if (shape == "disk") {
        check_keys(spec, {"shape", "center", "radius"}, where);
        cplx c = get_point(spec, "center", cplx(0.0, 0.0), where);
        double r = get_number(spec, "radius", where);
        json echo{{"shape", "disk"}, {"center", {c.real(), c.imag()}}, {"radius", r}};
        return {echo, make_disk(c, r)};
    }
    if (shape == "annulus") {
        check_keys(spec, {"shape", "r_inner", "r_outer"}, where);
        double ri = get_number(spec, "r_inner", where);
        double ro = get_number(spec, "r_outer", where);
        json echo{{"shape", "annulus"}, {"r_inner", ri}, {"r_outer", ro}};
        return {echo, make_annulus(ri, ro)};
    }
    if (shape == "square") {
        check_keys(spec, {"shape", "side"}, where);
        double side = get_number(spec, "side", where);
        json echo{{"shape", "square"}, {"side", side}};
        return {echo, make_centered_square(side)};
    }
    if (shape == "polygon") {
        check_keys(spec, {"shape", "vertices"}, where);
        if (!spec.contains("vertices") || !spec.at("vertices").is_array())
            throw ConfigError(where + ".vertices must be an array of [x, y] pairs");
        std::vector<cplx> verts;
        json echoed = json::array();
        for (const auto& v : spec.at("vertices")) {
            if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                throw ConfigError(where + ".vertices entries must be [x, y] pairs");
            verts.emplace_back(v[0].get<double>(), v[1].get<double>());
            echoed.push_back({v[0].get<double>(), v[1].get<double>()});
        }
        json echo{{"shape", "polygon"}, {"vertices", echoed}};
        return {echo, make_polygon(std::move(verts))};
    }
    if (shape == "rotated") {
        check_keys(spec, {"shape", "angle", "base"}, where);
        double angle = get_number(spec, "angle", where);
        if (!spec.contains("base")) throw ConfigError(where + " needs field \"base\"");
        auto base = parse_domain(spec.at("base"), where + ".base");
        json echo{{"shape", "rotated"}, {"angle", angle}, {"base", base.echo}};
        return {echo, make_rotation(std::move(base.domain), angle)};
    }
    if (shape == "union") {
        check_keys(spec, {"shape", "parts"}, where);
        if (!spec.contains("parts") || !spec.at("parts").is_array() || spec.at("parts").empty())
            throw ConfigError(where + ".parts must be a non-empty array of domains");
        std::vector<Domain> parts;
        json echoed = json::array();
        int idx = 0;
        for (const auto& p : spec.at("parts")) {
            auto part = parse_domain(p, where + ".parts[" + std::to_string(idx++) + "]");
            echoed.push_back(part.echo);
            parts.push_back(std::move(part.domain));
        }
        json echo{{"shape", "union"}, {"parts", echoed}};
        return {echo, make_union(std::move(parts))};
    }
    if (shape == "pseudodisk") {
        check_keys(spec, {"shape", "center", "rho"}, where);
        if (!spec.contains("center")) throw ConfigError(where + " needs field \"center\"");
        cplx c = get_point(spec, "center", cplx(0.0, 1.0), where);
        double rho = get_number(spec, "rho", where);
        json echo{{"shape", "pseudodisk"}, {"center", {c.real(), c.imag()}}, {"rho", rho}};
        return {echo, make_pseudodisk(c, rho)};
    }
    throw ConfigError(where + ".shape \"" + shape + "\" is not recognized");
}

ParsedDomain parse_domain(const json& spec, const std::string& where) {
    try {
        return parse_domain_impl(spec, where);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        // Geometry constructors validate their parameters; surface those
        // violations as config errors since they originate in the config.
        throw ConfigError(where + ": " + e.what());
    }
}

struct ParsedQuadrature {
    json echo;
    tflocal::geom::QuadratureSpec quad;
};

ParsedQuadrature parse_quadrature(const json& cfg, const std::string& where) {
    tflocal::geom::QuadratureSpec quad;
    json spec = cfg.contains("quadrature") ? cfg.at("quadrature") : json::object();
    check_keys(spec, {"radial_nodes", "angular_nodes", "target_abs_tol", "max_refinements"},
               where);
    quad.radial_nodes = static_cast<int>(
        get_integer_or(spec, "radial_nodes", quad.radial_nodes, where));
    quad.angular_nodes = static_cast<int>(
        get_integer_or(spec, "angular_nodes", quad.angular_nodes, where));
    quad.target_abs_tol = get_number_or(spec, "target_abs_tol", quad.target_abs_tol, where);
    quad.max_refinements = static_cast<int>(
        get_integer_or(spec, "max_refinements", quad.max_refinements, where));
    try {
        quad.validate();
    } catch (const std::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
    json echo{{"radial_nodes", quad.radial_nodes},
              {"angular_nodes", quad.angular_nodes},
              {"target_abs_tol", quad.target_abs_tol},
              {"max_refinements", quad.max_refinements}};
    return {echo, quad};
}

tflocal::fock::AssemblyRoute parse_fock_route(const std::string& route) {
    if (route == "auto") return tflocal::fock::AssemblyRoute::Auto;
    if (route == "quadrature") return tflocal::fock::AssemblyRoute::ForceQuadrature;
    throw ConfigError("route must be \"auto\" or \"quadrature\"");
}

tflocal::bergman::AssemblyRoute parse_bergman_route(const std::string& route) {
    if (route == "auto") return tflocal::bergman::AssemblyRoute::Auto;
    if (route == "quadrature") return tflocal::bergman::AssemblyRoute::ForceQuadrature;
    throw ConfigError("route must be \"auto\" or \"quadrature\"");
}

int parse_basis_size(const json& cfg, int fallback, const std::string& where) {
    long n = get_integer_or(cfg, "basis_size", fallback, where);
    if (n < 1 || n > 512) throw ConfigError(where + ".basis_size must be in [1, 512]");
    return static_cast<int>(n);
}

// ---------------------------------------------------------------------------
// Run context shared by every command.

struct RunContext {
    json echo;        // fully materialized config
    std::string hash; // excludes the output directory
    fs::path outdir;
    long seed = 0;
    std::vector<std::string> outputs;

    void write(const std::string& name, const std::string& content) {
        tflocal::io::write_file((outdir / name).string(), content);
        outputs.push_back(name);
    }

    void write_json(const std::string& name, json payload) {
        payload["config_hash"] = hash;
        payload["version"] = tflocal::io::kVersion;
        write(name, payload.dump(2) + "\n");
    }

    void finish(json extra = json::object()) {
        json meta{{"version", tflocal::io::kVersion},
                  {"config_hash", hash},
                  {"command", echo.at("command")},
                  {"config", echo}};
        for (auto& item : extra.items()) meta[item.key()] = item.value();
        meta["outputs"] = outputs;
        meta["outputs"].push_back("meta.json");
        write("meta.json", meta.dump(2) + "\n");
    }
};

RunContext make_context(json echo, const std::string& outdir_cli,
                        std::optional<long> seed_cli, const json& cfg,
                        const std::string& command) {
    if (cfg.contains("command")) {
        if (!cfg.at("command").is_string() || cfg.at("command").get<std::string>() != command)
            throw ConfigError("config field \"command\" disagrees with the subcommand \"" +
                              command + "\"");
    }
    RunContext ctx;
    ctx.seed = seed_cli ? *seed_cli : get_integer_or(cfg, "seed", 0, "config");
    std::string outdir = !outdir_cli.empty()
                             ? outdir_cli
                             : get_string_or(cfg, "output_dir", "tflocal_out", "config");
    echo["command"] = command;
    echo["seed"] = ctx.seed;
    echo["output_dir"] = outdir;
    ctx.echo = std::move(echo);
    ctx.hash = tflocal::io::config_hash(ctx.echo);
    ctx.outdir = outdir;
    fs::create_directories(ctx.outdir);
    return ctx;
}

// Sorted-descending closed spectrum for a centered radial domain, if any.
std::optional<Eigen::VectorXd> fock_closed_spectrum(const tflocal::geom::Domain& dom, int n) {
    auto radial = dom.as_centered_radial();
    if (!radial) return std::nullopt;
    Eigen::VectorXd closed = tflocal::fock::annulus_spectrum_closed(
        radial->first, radial->second, n);
    std::sort(closed.data(), closed.data() + closed.size(), std::greater<double>());
    return closed;
}

std::optional<Eigen::VectorXd> bergman_closed_spectrum(const tflocal::geom::Domain& dom,
                                                       double alpha, int n) {
    auto radial = dom.as_centered_radial();
    if (!radial) return std::nullopt;
    Eigen::VectorXd closed(n);
    for (int k = 0; k < n; ++k) {
        double hi = tflocal::bergman::disc_eigenvalue_closed(radial->second, k, alpha);
        double lo = radial->first > 0.0
                        ? tflocal::bergman::disc_eigenvalue_closed(radial->first, k, alpha)
                        : 0.0;
        closed[k] = hi - lo;
    }
    std::sort(closed.data(), closed.data() + closed.size(), std::greater<double>());
    return closed;
}

// ---------------------------------------------------------------------------
// Commands.

int run_direct(const json& cfg, const std::string& outdir, std::optional<long> seed) {
    check_keys(cfg, {"command", "domain", "basis_size", "quadrature", "route", "seed",
                     "output_dir"},
               "config");
    if (!cfg.contains("domain")) throw ConfigError("config needs field \"domain\"");
    auto dom = parse_domain(cfg.at("domain"), "domain");
    auto quad = parse_quadrature(cfg, "quadrature");
    int basis_size = parse_basis_size(cfg, 24, "config");
    std::string route = get_string_or(cfg, "route", "auto", "config");

    json echo{{"domain", dom.echo},
              {"basis_size", basis_size},
              {"quadrature", quad.echo},
              {"route", route}};
    auto ctx = make_context(std::move(echo), outdir, seed, cfg, "direct");

    auto op = tflocal::fock::assemble_indicator(dom.domain, basis_size, quad.quad,
                                                parse_fock_route(route));
    auto spec = tflocal::eigendecompose(op);
    auto closed = fock_closed_spectrum(dom.domain, basis_size);
    auto rows = tflocal::io::spectrum_rows(op.entries, spec, closed);

    ctx.write("matrix.csv", tflocal::io::matrix_csv(op.entries, ctx.hash));
    ctx.write("spectrum.csv", tflocal::io::spectrum_csv(rows, ctx.hash));
    json extra{{"provenance", op.provenance},
               {"err_estimate", op.err_estimate},
               {"eigen_residual_norm", spec.residual_norm}};
    if (closed) {
        double dev = 0.0;
        for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
            dev = std::max(dev, std::abs(spec.eigenvalues[i] - (*closed)[i]));
        extra["max_closed_form_deviation"] = dev;
    }
    ctx.finish(extra);
    return 0;
}

int run_probe(const json& cfg, const std::string& outdir, std::optional<long> seed) {
    check_keys(cfg, {"command", "hidden_domain", "matrix_file", "basis", "basis_size",
                     "quadrature", "route", "probes", "tolerances", "seed", "output_dir"},
               "config");
    const bool has_domain = cfg.contains("hidden_domain");
    const bool has_file = cfg.contains("matrix_file");
    if (has_domain == has_file)
        throw ConfigError("config needs exactly one of \"hidden_domain\" or \"matrix_file\"");

    json basis_spec = cfg.contains("basis") ? cfg.at("basis") : json{{"type", "fock"}};
    check_keys(basis_spec, {"type", "alpha"}, "basis");
    std::string basis_type = get_string_or(basis_spec, "type", "fock", "basis");
    double alpha = get_number_or(basis_spec, "alpha", 0.0, "basis");
    tflocal::probe::BasisTag tag;
    if (basis_type == "fock") {
        if (basis_spec.contains("alpha"))
            throw ConfigError("basis.alpha only applies to the bergman basis");
        tag = tflocal::probe::BasisTag::fock();
    } else if (basis_type == "bergman") {
        if (!(alpha > -1.0)) throw ConfigError("basis.alpha must exceed -1");
        tag = tflocal::probe::BasisTag::bergman(alpha);
    } else {
        throw ConfigError("basis.type must be \"fock\" or \"bergman\"");
    }
    json basis_echo{{"type", basis_type}};
    if (basis_type == "bergman") basis_echo["alpha"] = alpha;

    json tol_spec = cfg.contains("tolerances") ? cfg.at("tolerances") : json::object();
    check_keys(tol_spec, {"tol", "consistency_tol", "fit_tol"}, "tolerances");
    double tol = get_number_or(tol_spec, "tol", 1e-6, "tolerances");
    double consistency_tol = get_number_or(tol_spec, "consistency_tol", 1e-3, "tolerances");
    double fit_tol = get_number_or(tol_spec, "fit_tol", 1e-4, "tolerances");
    json tol_echo{{"tol", tol}, {"consistency_tol", consistency_tol}, {"fit_tol", fit_tol}};

    std::vector<int> probes;
    if (cfg.contains("probes")) {
        if (!cfg.at("probes").is_array()) throw ConfigError("probes must be an array");
        for (const auto& p : cfg.at("probes")) {
            if (!p.is_number_integer() || p.get<long>() < 0)
                throw ConfigError("probes entries must be nonnegative integers");
            probes.push_back(static_cast<int>(p.get<long>()));
        }
    }
    if (probes.empty())
        for (int n = 0; n < 8; ++n) probes.push_back(n);

    auto quad = parse_quadrature(cfg, "quadrature");
    int basis_size = parse_basis_size(cfg, 48, "config");
    std::string route = get_string_or(cfg, "route", "auto", "config");

    json echo{{"basis", basis_echo},
              {"basis_size", basis_size},
              {"quadrature", quad.echo},
              {"route", route},
              {"probes", probes},
              {"tolerances", tol_echo}};

    Eigen::MatrixXcd entries;
    std::optional<ParsedDomain> dom;
    if (has_domain) {
        dom = parse_domain(cfg.at("hidden_domain"), "hidden_domain");
        echo["hidden_domain"] = dom->echo;
    } else {
        if (!cfg.at("matrix_file").is_string())
            throw ConfigError("matrix_file must be a string path");
        std::string path = cfg.at("matrix_file").get<std::string>();
        echo["matrix_file"] = path;
        try {
            entries = tflocal::io::read_matrix_csv(tflocal::io::read_file(path));
            if (entries.rows() != entries.cols())
                throw std::invalid_argument("matrix file is not square");
        } catch (const std::exception& e) {
            throw ConfigError(std::string("matrix_file: ") + e.what());
        }
    }

    auto ctx = make_context(std::move(echo), outdir, seed, cfg, "probe");

    if (has_domain) {
        if (basis_type == "fock") {
            entries = tflocal::fock::assemble_indicator(dom->domain, basis_size, quad.quad,
                                                        parse_fock_route(route))
                          .entries;
        } else {
            entries = tflocal::bergman::bergman_galerkin(dom->domain, alpha, basis_size,
                                                         quad.quad, parse_bergman_route(route))
                          .entries;
        }
    }
    auto box = tflocal::probe::black_box_from_matrix(entries, tag);
    auto report = tflocal::probe::disk_verdict(box, probes, tol, consistency_tol, fit_tol);

    ctx.write_json("probe_report.json", tflocal::io::probe_report_json(report));
    ctx.finish(json{{"verdict", tflocal::probe::verdict_name(report.verdict)}});
    return 0;
}

int run_symbol(const json& cfg, const std::string& outdir, std::optional<long> seed) {
    check_keys(cfg, {"command", "n_target", "support", "split", "basis_size", "quadrature",
                     "seed", "output_dir"},
               "config");
    long n_target = get_integer_or(cfg, "n_target", 0, "config");
    if (n_target < 0) throw ConfigError("n_target must be nonnegative");
    double a = 0.3, b = 1.5;
    if (cfg.contains("support")) {
        const json& s = cfg.at("support");
        if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
            throw ConfigError("support must be a [inner, outer] pair");
        a = s[0].get<double>();
        b = s[1].get<double>();
    }
    std::optional<double> split;
    if (cfg.contains("split") && !cfg.at("split").is_null()) {
        if (!cfg.at("split").is_number()) throw ConfigError("split must be a number or null");
        split = cfg.at("split").get<double>();
    }
    auto quad = parse_quadrature(cfg, "quadrature");
    int basis_size = parse_basis_size(cfg, static_cast<int>(3 * n_target + 10), "config");
    if (basis_size < 2 * n_target + 2)
        throw ConfigError("basis_size too small to show the coupling pattern");

    tflocal::fock::CounterexampleSymbol built;
    try {
        built = tflocal::fock::build_counterexample_symbol(static_cast<int>(n_target), a, b,
                                                           split);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("counterexample symbol: ") + e.what());
    }

    json echo{{"n_target", n_target},
              {"support", {a, b}},
              {"split", split ? json(*split) : json(nullptr)},
              {"basis_size", basis_size},
              {"quadrature", quad.echo}};
    auto ctx = make_context(std::move(echo), outdir, seed, cfg, "symbol");

    auto op = tflocal::fock::assemble_symbol(built.symbol, basis_size, quad.quad);
    auto spec = tflocal::eigendecompose(op);
    auto rows = tflocal::io::spectrum_rows(op.entries, spec);

    auto column_residual = [&](long k) {
        Eigen::VectorXcd col = op.entries.col(k);
        double lambda = col[k].real();
        col[k] = 0.0;
        return std::make_pair(lambda, col.norm());
    };
    auto [lambda_target, residual_target] = column_residual(n_target);
    auto [lambda_next, residual_next] = column_residual(n_target + 1);

    ctx.write("matrix.csv", tflocal::io::matrix_csv(op.entries, ctx.hash));
    ctx.write("spectrum.csv", tflocal::io::spectrum_csv(rows, ctx.hash));
    ctx.write_json("symbol_report.json",
                   json{{"n_target", n_target},
                        {"support", {built.a, built.b}},
                        {"split", built.c},
                        {"beta", built.beta},
                        {"moment_residual", built.moment_residual},
                        {"lambda_target", lambda_target},
                        {"residual_target", residual_target},
                        {"lambda_next", lambda_next},
                        {"residual_next", residual_next},
                        {"coupling_entry_abs",
                         std::abs(op.entries(2 * n_target + 1, n_target))}});
    ctx.finish(json{{"provenance", op.provenance}, {"err_estimate", op.err_estimate}});
    return 0;
}

int run_wavelet(const json& cfg, const std::string& outdir, std::optional<long> seed) {
    check_keys(cfg, {"command", "domain", "pseudodisk", "alpha", "basis_size", "quadrature",
                     "route", "seed", "output_dir"},
               "config");
    const bool has_domain = cfg.contains("domain");
    const bool has_pseudo = cfg.contains("pseudodisk");
    if (has_domain == has_pseudo)
        throw ConfigError("config needs exactly one of \"domain\" or \"pseudodisk\"");

    double alpha = get_number_or(cfg, "alpha", 0.0, "config");
    if (!(alpha > -1.0)) throw ConfigError("alpha must exceed -1");
    auto quad = parse_quadrature(cfg, "quadrature");
    int basis_size = parse_basis_size(cfg, 24, "config");
    std::string route = get_string_or(cfg, "route", "auto", "config");

    json echo{{"alpha", alpha},
              {"basis_size", basis_size},
              {"quadrature", quad.echo},
              {"route", route}};

    std::optional<tflocal::geom::Domain> domain;
    json extra = json::object();
    if (has_domain) {
        auto dom = parse_domain(cfg.at("domain"), "domain");
        echo["domain"] = dom.echo;
        domain = std::move(dom.domain);
    } else {
        const json& p = cfg.at("pseudodisk");
        check_keys(p, {"center", "rho"}, "pseudodisk");
        if (!p.contains("center")) throw ConfigError("pseudodisk needs field \"center\"");
        cplx c = get_point(p, "center", cplx(0.0, 0.0), "pseudodisk");
        double rho = get_number(p, "rho", "pseudodisk");
        tflocal::bergman::PseudoDisk pd{c, rho};
        try {
            pd.validate();
            domain = tflocal::bergman::map_pseudodisk(pd);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("pseudodisk: ") + e.what());
        }
        echo["pseudodisk"] = tflocal::io::pseudodisk_json(pd);
        const auto& disk = std::get<tflocal::geom::Disk>(domain->shape());
        extra["euclidean_disk"] = json{{"center", {disk.center.real(), disk.center.imag()}},
                                       {"radius", disk.radius}};
    }

    auto ctx = make_context(std::move(echo), outdir, seed, cfg, "wavelet");

    auto op = tflocal::bergman::bergman_galerkin(*domain, alpha, basis_size, quad.quad,
                                                 parse_bergman_route(route));
    auto spec = tflocal::eigendecompose(op);
    auto closed = bergman_closed_spectrum(*domain, alpha, basis_size);
    auto rows = tflocal::io::spectrum_rows(op.entries, spec, closed);

    ctx.write("matrix.csv", tflocal::io::matrix_csv(op.entries, ctx.hash));
    ctx.write("spectrum.csv", tflocal::io::spectrum_csv(rows, ctx.hash));
    extra["provenance"] = op.provenance;
    extra["err_estimate"] = op.err_estimate;
    extra["eigen_residual_norm"] = spec.residual_norm;
    if (closed) {
        double dev = 0.0;
        for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
            dev = std::max(dev, std::abs(spec.eigenvalues[i] - (*closed)[i]));
        extra["max_closed_form_deviation"] = dev;
    }
    ctx.finish(extra);
    return 0;
}

int run_frames(const json& cfg, const std::string& outdir, std::optional<long> seed) {
    check_keys(cfg, {"command", "redundancies", "probe_order", "truncation_radius", "seed",
                     "output_dir"},
               "config");
    std::vector<double> reds = {1.5, 2.0, 3.0};
    if (cfg.contains("redundancies")) {
        if (!cfg.at("redundancies").is_array() || cfg.at("redundancies").empty())
            throw ConfigError("redundancies must be a non-empty array of numbers");
        reds.clear();
        for (const auto& r : cfg.at("redundancies")) {
            if (!r.is_number() || !(r.get<double>() > 1.0))
                throw ConfigError("redundancies entries must be numbers above 1");
            reds.push_back(r.get<double>());
        }
    }
    long probe_order = get_integer_or(cfg, "probe_order", 24, "config");
    double radius = get_number_or(cfg, "truncation_radius", 6.0, "config");
    if (probe_order < 4) throw ConfigError("probe_order must be at least 4");
    if (!(radius >= 6.0)) throw ConfigError("truncation_radius must be at least 6");

    json echo{{"redundancies", reds},
              {"probe_order", probe_order},
              {"truncation_radius", radius}};
    auto ctx = make_context(std::move(echo), outdir, seed, cfg, "frames");

    auto sweep = tflocal::frames::condition_sweep(reds, static_cast<int>(probe_order), radius);
    ctx.write("sweep.csv", tflocal::io::sweep_csv(sweep, ctx.hash));
    ctx.finish(json{
        {"estimator_note",
         "finite-section estimates carry a truncation bias; use them for ordering "
         "comparisons between lattices, not as certified frame bounds"}});
    return 0;
}

int run_validate(const json& cfg, const std::string& outdir, std::optional<long> seed) {
    check_keys(cfg, {"command", "tol", "subset", "seed", "output_dir"}, "config");
    tflocal::validate::SuiteOptions opts;
    opts.tol = get_number_or(cfg, "tol", 1e-8, "config");
    if (!(opts.tol > 0.0)) throw ConfigError("tol must be positive");
    std::vector<int> subset;
    if (cfg.contains("subset")) {
        if (!cfg.at("subset").is_array()) throw ConfigError("subset must be an array");
        for (const auto& k : cfg.at("subset")) {
            if (!k.is_number_integer() || k.get<long>() < 1 || k.get<long>() > 10)
                throw ConfigError("subset entries must be check numbers 1..10");
            subset.push_back(static_cast<int>(k.get<long>()));
        }
    }
    if (subset.empty())
        for (int k = 1; k <= 10; ++k) subset.push_back(k);

    json echo{{"tol", opts.tol}, {"subset", subset}};
    auto ctx = make_context(std::move(echo), outdir, seed, cfg, "validate");
    opts.seed = static_cast<unsigned>(ctx.seed);
    opts.subset = subset;

    auto results = tflocal::validate::run_suite(opts);
    bool all_pass = true;
    json checks = json::array();
    for (const auto& res : results) {
        all_pass = all_pass && res.pass;
        checks.push_back(json{{"number", res.number},
                              {"name", res.name},
                              {"pass", res.pass},
                              {"max_error", res.max_error},
                              {"tolerance", res.tolerance},
                              {"expected_failure", res.expected_failure},
                              {"detail", res.detail}});
    }
    ctx.write_json("validate_report.json",
                   json{{"seed", ctx.seed}, {"tol", opts.tol}, {"checks", checks},
                        {"all_pass", all_pass}});
    ctx.finish(json{{"all_pass", all_pass}});
    return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for time-frequency and wavelet localization"};
    app.require_subcommand(1);

    struct SubArgs {
        std::string config;
        std::string out;
        std::optional<long> seed;
    };
    std::map<std::string, SubArgs> args;
    std::map<std::string, int (*)(const json&, const std::string&, std::optional<long>)>
        handlers{{"direct", run_direct},   {"probe", run_probe},   {"symbol", run_symbol},
                 {"wavelet", run_wavelet}, {"frames", run_frames}, {"validate", run_validate}};
    const std::map<std::string, std::string> blurbs{
        {"direct", "assemble a localization operator and its spectrum"},
        {"probe", "run the shape-from-spectrum probe protocol"},
        {"symbol", "build the non-radial symbol with a basis eigenfunction"},
        {"wavelet", "assemble a disc-model localization operator"},
        {"frames", "compare lattice frame conditioning"},
        {"validate", "run the full invariant suite"}};

    for (const auto& [name, blurb] : blurbs) {
        auto* sub = app.add_subcommand(name, blurb);
        auto& a = args[name];
        sub->add_option("--config", a.config, "experiment config (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "output directory (overrides the config)");
        sub->add_option("--seed", a.seed, "seed for randomized checks (overrides the config)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    const auto& a = args[name];
    try {
        json cfg;
        try {
            cfg = json::parse(tflocal::io::read_file(a.config));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("cannot parse config: ") + e.what());
        }
        return handlers.at(name)(cfg, a.out, a.seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "runtime error: %s\n", e.what());
        return 3;
    }
}
