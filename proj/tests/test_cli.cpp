#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include <tflocal/io.hpp>

using Catch::Matchers::WithinAbs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = "cli_artifacts";

int run_cli(const std::string& args, bool quiet = false) {
    std::string cmd = std::string(TFLOCAL_CLI_PATH) + " " + args;
    if (quiet) cmd += " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const json& cfg) {
    fs::create_directories(kRoot);
    fs::path path = kRoot / name;
    std::ofstream out(path);
    out << cfg.dump(2) << "\n";
    return path;
}

json read_json(const fs::path& path) { return json::parse(tflocal::io::read_file(path)); }

std::string preamble_hash(const fs::path& csv) {
    std::ifstream in(csv);
    std::string line;
    std::getline(in, line);
    auto pos = line.find("config_hash=");
    REQUIRE(pos != std::string::npos);
    auto end = line.find(',', pos);
    return line.substr(pos + 12, end - pos - 12);
}

}  // namespace

TEST_CASE("direct command writes spectrum, matrix, and meta artifacts") {
    auto cfg = write_config("direct_disk.json",
                            json{{"domain", {{"shape", "disk"}, {"radius", 1.0}}}});
    fs::path out = kRoot / "direct_disk";
    REQUIRE(run_cli("direct --config " + cfg.string() + " --out " + out.string()) == 0);

    json meta = read_json(out / "meta.json");
    CHECK(meta.at("version") == "0.1.0");
    CHECK(meta.at("command") == "direct");
    CHECK(meta.at("config").at("basis_size") == 24);
    CHECK(meta.at("config").at("route") == "auto");
    CHECK(meta.at("config").at("quadrature").at("radial_nodes") == 64);
    CHECK(meta.at("config").at("seed") == 0);
    CHECK(meta.at("max_closed_form_deviation").get<double>() <= 1e-12);

    // Every artifact carries the same config hash.
    std::string hash = meta.at("config_hash").get<std::string>();
    CHECK(preamble_hash(out / "matrix.csv") == hash);
    CHECK(preamble_hash(out / "spectrum.csv") == hash);

    // The disk section is diagonal and the spectrum column closes the loop.
    auto m = tflocal::io::read_matrix_csv(tflocal::io::read_file((out / "matrix.csv").string()));
    REQUIRE(m.rows() == 24);
    REQUIRE(m.cols() == 24);
    double offdiag = 0.0;
    for (int i = 0; i < 24; ++i)
        for (int j = 0; j < 24; ++j)
            if (i != j) offdiag = std::max(offdiag, std::abs(m(i, j)));
    CHECK(offdiag == 0.0);

    std::ifstream spec_in(out / "spectrum.csv");
    std::string line;
    std::getline(spec_in, line);
    std::getline(spec_in, line);
    CHECK(line == "index,eigenvalue,residual,closed_form,deviation");
}

TEST_CASE("identical config and seed give byte-identical CSV artifacts") {
    auto cfg = write_config(
        "direct_square.json",
        json{{"domain", {{"shape", "square"}, {"side", 1.2}}}, {"basis_size", 10}});
    fs::path out1 = kRoot / "det_a", out2 = kRoot / "det_b";
    REQUIRE(run_cli("direct --config " + cfg.string() + " --out " + out1.string()) == 0);
    REQUIRE(run_cli("direct --config " + cfg.string() + " --out " + out2.string()) == 0);
    for (const char* name : {"matrix.csv", "spectrum.csv"}) {
        CHECK(tflocal::io::read_file((out1 / name).string()) ==
              tflocal::io::read_file((out2 / name).string()));
    }
    // The hash ignores the output directory, so the two runs share it.
    CHECK(read_json(out1 / "meta.json").at("config_hash") ==
          read_json(out2 / "meta.json").at("config_hash"));
}

TEST_CASE("direct square sections show the mod-4 selection rule") {
    auto cfg = write_config(
        "direct_square_rule.json",
        json{{"domain", {{"shape", "square"}, {"side", 1.77}}}, {"basis_size", 8}});
    fs::path out = kRoot / "square_rule";
    REQUIRE(run_cli("direct --config " + cfg.string() + " --out " + out.string()) == 0);
    auto m = tflocal::io::read_matrix_csv(tflocal::io::read_file((out / "matrix.csv").string()));
    double off_rule = 0.0, on_rule = 0.0;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            if (i == j) continue;
            if ((i - j) % 4 == 0)
                on_rule = std::max(on_rule, std::abs(m(i, j)));
            else
                off_rule = std::max(off_rule, std::abs(m(i, j)));
        }
    CHECK(off_rule <= 1e-12);
    CHECK(on_rule >= 1e-3);
}

TEST_CASE("probe command identifies hidden domains and reads matrix files") {
    SECTION("hidden annulus gives a two-ring verdict") {
        auto cfg = write_config(
            "probe_annulus.json",
            json{{"hidden_domain", {{"shape", "annulus"}, {"r_inner", 0.5}, {"r_outer", 1.0}}},
                 {"basis_size", 32},
                 {"probes", {0, 1, 2, 3, 4, 5}}});
        fs::path out = kRoot / "probe_annulus";
        REQUIRE(run_cli("probe --config " + cfg.string() + " --out " + out.string()) == 0);
        json report = read_json(out / "probe_report.json");
        CHECK(report.at("verdict") == "RadialMultiRing");
        REQUIRE(report.at("rings").size() == 1);
        CHECK_THAT(report.at("rings")[0].at("r_inner").get<double>(), WithinAbs(0.5, 1e-3));
        CHECK_THAT(report.at("rings")[0].at("r_outer").get<double>(), WithinAbs(1.0, 1e-3));
        CHECK(report.at("radius").is_null());
        CHECK(report.at("caveat").get<std::string>().find("simply connected") !=
              std::string::npos);
    }

    SECTION("a matrix file from a direct run becomes a black box") {
        auto direct_cfg = write_config(
            "probe_feed.json", json{{"domain", {{"shape", "disk"}, {"radius", 0.8}}},
                                    {"basis_size", 20}, {"route", "quadrature"}});
        fs::path feed = kRoot / "probe_feed";
        REQUIRE(run_cli("direct --config " + direct_cfg.string() + " --out " + feed.string()) ==
                0);
        auto cfg = write_config(
            "probe_matrix.json",
            json{{"matrix_file", (feed / "matrix.csv").string()}, {"probes", {0, 1, 2, 3}}});
        fs::path out = kRoot / "probe_matrix";
        REQUIRE(run_cli("probe --config " + cfg.string() + " --out " + out.string()) == 0);
        json report = read_json(out / "probe_report.json");
        CHECK(report.at("verdict") == "DiskCentered");
        CHECK_THAT(report.at("radius").get<double>(), WithinAbs(0.8, 1e-6));
    }
}

TEST_CASE("symbol command reports the engineered eigenfunction") {
    auto cfg = write_config("symbol.json", json{{"n_target", 1}});
    fs::path out = kRoot / "symbol";
    REQUIRE(run_cli("symbol --config " + cfg.string() + " --out " + out.string()) == 0);
    json report = read_json(out / "symbol_report.json");
    CHECK(report.at("residual_target").get<double>() <= 1e-6);
    CHECK(report.at("residual_next").get<double>() >= 1e-3);
    CHECK(report.at("coupling_entry_abs").get<double>() <= 1e-8);
    CHECK(report.at("lambda_target").get<double>() > 0.0);
    json meta = read_json(out / "meta.json");
    CHECK(meta.at("config").at("support") == json({0.3, 1.5}));
    CHECK(meta.at("config").at("split").is_null());
}

TEST_CASE("wavelet command maps pseudodisks and closes the spectrum") {
    auto cfg = write_config("wavelet.json",
                            json{{"pseudodisk", {{"center", {0.0, 1.0}}, {"rho", 0.6}}},
                                 {"alpha", 0.5},
                                 {"basis_size", 12}});
    fs::path out = kRoot / "wavelet";
    REQUIRE(run_cli("wavelet --config " + cfg.string() + " --out " + out.string()) == 0);
    json meta = read_json(out / "meta.json");
    CHECK_THAT(meta.at("euclidean_disk").at("center")[0].get<double>(), WithinAbs(0.0, 1e-15));
    CHECK_THAT(meta.at("euclidean_disk").at("center")[1].get<double>(), WithinAbs(0.0, 1e-15));
    CHECK_THAT(meta.at("euclidean_disk").at("radius").get<double>(), WithinAbs(0.6, 1e-15));
    CHECK(meta.at("max_closed_form_deviation").get<double>() <= 1e-12);
    CHECK(meta.at("provenance") == "closed-form");
}

TEST_CASE("frames command tabulates the lattice sweep") {
    auto cfg = write_config("frames.json",
                            json{{"redundancies", {2.0}}, {"probe_order", 12}});
    fs::path out = kRoot / "frames";
    REQUIRE(run_cli("frames --config " + cfg.string() + " --out " + out.string()) == 0);
    std::ifstream in(out / "sweep.csv");
    std::string line;
    std::getline(in, line);  // hash preamble
    std::getline(in, line);
    CHECK(line == "redundancy,rect_cond,hex_cond,ratio");
    std::getline(in, line);
    auto last_comma = line.rfind(',');
    double ratio = std::stod(line.substr(last_comma + 1));
    CHECK(ratio < 1.0);
    json meta = read_json(out / "meta.json");
    CHECK(meta.at("estimator_note").get<std::string>().find("truncation bias") !=
          std::string::npos);
}

TEST_CASE("validate command runs checks and honors seeds") {
    auto cfg = write_config("validate.json", json{{"subset", {4, 9}}});
    fs::path out1 = kRoot / "val_seed1", out2 = kRoot / "val_seed2";
    REQUIRE(run_cli("validate --config " + cfg.string() + " --out " + out1.string() +
                    " --seed 1") == 0);
    REQUIRE(run_cli("validate --config " + cfg.string() + " --out " + out2.string() +
                    " --seed 2") == 0);
    json r1 = read_json(out1 / "validate_report.json");
    json r2 = read_json(out2 / "validate_report.json");
    CHECK(r1.at("all_pass") == true);
    // Non-random checks are untouched by the seed.
    CHECK(r1.at("checks") == r2.at("checks"));
    CHECK(r1.at("seed") == 1);
    CHECK(r2.at("seed") == 2);

    SECTION("a tolerance below the noise floor fails with a flag") {
        auto tight = write_config("validate_tight.json",
                                  json{{"tol", 1e-15}, {"subset", {1}}});
        fs::path out = kRoot / "val_tight";
        REQUIRE(run_cli("validate --config " + tight.string() + " --out " + out.string(),
                        true) == 3);
        json report = read_json(out / "validate_report.json");
        CHECK(report.at("all_pass") == false);
        CHECK(report.at("checks")[0].at("pass") == false);
        CHECK(report.at("checks")[0].at("expected_failure") == true);
    }
}

TEST_CASE("config errors exit with code 2 and never write artifacts") {
    SECTION("unknown fields are rejected") {
        auto cfg = write_config("bad_unknown.json",
                                json{{"domain", {{"shape", "disk"}, {"radius", 1.0}}},
                                     {"bogus", 1}});
        CHECK(run_cli("direct --config " + cfg.string() + " --out " +
                          (kRoot / "never").string(),
                      true) == 2);
        CHECK_FALSE(fs::exists(kRoot / "never"));
    }

    SECTION("domain parameter violations are config errors") {
        auto cfg = write_config("bad_radius.json",
                                json{{"domain", {{"shape", "disk"}, {"radius", -1.0}}}});
        CHECK(run_cli("direct --config " + cfg.string(), true) == 2);
    }

    SECTION("unrecognized shapes are config errors") {
        auto cfg = write_config("bad_shape.json",
                                json{{"domain", {{"shape", "pentagon"}, {"radius", 1.0}}}});
        CHECK(run_cli("direct --config " + cfg.string(), true) == 2);
    }

    SECTION("a non-square matrix file is a config error") {
        fs::create_directories(kRoot);
        std::ofstream rect(kRoot / "rect.csv");
        rect << "row,col,re,im\n0,0,1,0\n0,1,0,0\n";
        rect.close();
        auto cfg = write_config("bad_matrix.json",
                                json{{"matrix_file", (kRoot / "rect.csv").string()}});
        CHECK(run_cli("probe --config " + cfg.string(), true) == 2);
    }

    SECTION("malformed JSON is a config error") {
        fs::create_directories(kRoot);
        std::ofstream bad(kRoot / "broken.json");
        bad << "{ not json";
        bad.close();
        CHECK(run_cli("direct --config " + (kRoot / "broken.json").string(), true) == 2);
    }

    SECTION("a command field that disagrees with the subcommand is rejected") {
        auto cfg = write_config("bad_command.json",
                                json{{"command", "probe"},
                                     {"domain", {{"shape", "disk"}, {"radius", 1.0}}}});
        CHECK(run_cli("direct --config " + cfg.string(), true) == 2);
    }

    SECTION("missing required options are usage errors") {
        CHECK(run_cli("direct", true) == 2);
        CHECK(run_cli("direct --config " + (kRoot / "no_such_file.json").string(), true) == 2);
    }
}

TEST_CASE("numeric failures exit with code 3") {
    // A domain that leaves the unit disc cannot be a disc-model symbol.
    auto cfg = write_config("outside.json",
                            json{{"domain", {{"shape", "disk"}, {"radius", 2.0}}},
                                 {"alpha", 0.5}});
    CHECK(run_cli("wavelet --config " + cfg.string(), true) == 3);
}

TEST_CASE("seed precedence: the command line wins over the config") {
    auto cfg = write_config("seeded.json",
                            json{{"domain", {{"shape", "disk"}, {"radius", 1.0}}},
                                 {"basis_size", 6},
                                 {"seed", 5}});
    fs::path out = kRoot / "seeded";
    REQUIRE(run_cli("direct --config " + cfg.string() + " --out " + out.string() +
                    " --seed 9") == 0);
    CHECK(read_json(out / "meta.json").at("config").at("seed") == 9);

    fs::path out2 = kRoot / "seeded_cfg";
    REQUIRE(run_cli("direct --config " + cfg.string() + " --out " + out2.string()) == 0);
    CHECK(read_json(out2 / "meta.json").at("config").at("seed") == 5);
}
