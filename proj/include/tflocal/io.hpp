#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include <tflocal/bergman_wavelet.hpp>
#include <tflocal/frame_lab.hpp>
#include <tflocal/galerkin.hpp>
#include <tflocal/inverse_probe.hpp>
#include <tflocal/stft.hpp>

namespace tflocal::io {

inline constexpr const char* kVersion = "0.1.0";

// All artifacts are reproducible: same config and seed give the same bytes.
// Numbers are printed with 17 significant digits so doubles survive a
// write/read round trip, and formatting never consults the locale.

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Hash of the fully materialized config. The output directory is excluded so
// the same experiment written to two places produces identical artifacts.
inline std::string config_hash(const nlohmann::json& config) {
    nlohmann::json canon = config;
    canon.erase("output_dir");
    return hex16(fnv1a64(canon.dump()));
}

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string csv_preamble(const std::string& hash) {
    return "# config_hash=" + hash + ",version=" + kVersion + "\n";
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("malformed number in CSV: " + s);
    return v;
}

}  // namespace detail

inline std::string matrix_csv(const Eigen::MatrixXcd& m, const std::string& hash) {
    std::string out = csv_preamble(hash);
    out += "row,col,re,im\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out += std::to_string(r);
            out += ',';
            out += std::to_string(c);
            out += ',';
            out += format_double(m(r, c).real());
            out += ',';
            out += format_double(m(r, c).imag());
            out += '\n';
        }
    return out;
}

inline Eigen::MatrixXcd read_matrix_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    struct Rec {
        long r, c;
        double re, im;
    };
    std::vector<Rec> recs;
    long rmax = -1, cmax = -1;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column header row
            continue;
        }
        auto f = detail::split_csv_line(line);
        if (f.size() != 4) throw std::invalid_argument("matrix CSV rows need 4 fields");
        Rec rec{std::stol(f[0]), std::stol(f[1]), detail::parse_double(f[2]),
                detail::parse_double(f[3])};
        if (rec.r < 0 || rec.c < 0) throw std::invalid_argument("negative matrix index");
        rmax = std::max(rmax, rec.r);
        cmax = std::max(cmax, rec.c);
        recs.push_back(rec);
    }
    if (recs.empty()) throw std::invalid_argument("matrix CSV has no data rows");
    const long rows = rmax + 1, cols = cmax + 1;
    if (static_cast<long>(recs.size()) != rows * cols)
        throw std::invalid_argument("matrix CSV does not cover every entry exactly once");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
    for (const auto& rec : recs) m(rec.r, rec.c) = std::complex<double>(rec.re, rec.im);
    return m;
}

struct SpectrumRow {
    int index = 0;
    double eigenvalue = 0.0;
    double residual = 0.0;                // |A v - lambda v|_2 for this pair
    std::optional<double> closed_form;    // present when a closed form exists
};

inline std::vector<SpectrumRow> spectrum_rows(const Eigen::MatrixXcd& entries,
                                              const Spectrum& spec,
                                              const std::optional<Eigen::VectorXd>& closed = {}) {
    std::vector<SpectrumRow> rows;
    rows.reserve(static_cast<std::size_t>(spec.eigenvalues.size()));
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i) {
        SpectrumRow row;
        row.index = static_cast<int>(i);
        row.eigenvalue = spec.eigenvalues[i];
        const Eigen::VectorXcd v = spec.eigenvectors.col(i);
        row.residual = (entries * v - spec.eigenvalues[i] * v).norm();
        if (closed && i < closed->size()) row.closed_form = (*closed)[i];
        rows.push_back(row);
    }
    return rows;
}

inline std::string spectrum_csv(const std::vector<SpectrumRow>& rows, const std::string& hash) {
    const bool with_closed = !rows.empty() && rows.front().closed_form.has_value();
    std::string out = csv_preamble(hash);
    out += with_closed ? "index,eigenvalue,residual,closed_form,deviation\n"
                       : "index,eigenvalue,residual\n";
    for (const auto& row : rows) {
        out += std::to_string(row.index);
        out += ',';
        out += format_double(row.eigenvalue);
        out += ',';
        out += format_double(row.residual);
        if (with_closed) {
            out += ',';
            out += format_double(*row.closed_form);
            out += ',';
            out += format_double(std::abs(row.eigenvalue - *row.closed_form));
        }
        out += '\n';
    }
    return out;
}

inline std::string signal_csv(const stft::SampledSignal& sig, const std::string& hash) {
    std::string out = csv_preamble(hash);
    out += "re,im\n";
    for (const auto& z : sig.samples) {
        out += format_double(z.real());
        out += ',';
        out += format_double(z.imag());
        out += '\n';
    }
    return out;
}

inline nlohmann::json signal_sidecar(const stft::SampledSignal& sig, const std::string& hash) {
    return nlohmann::json{{"t0", sig.t0},
                          {"dt", sig.dt},
                          {"samples", sig.samples.size()},
                          {"config_hash", hash},
                          {"version", kVersion}};
}

inline stft::SampledSignal read_signal_csv(const std::string& text,
                                           const nlohmann::json& sidecar) {
    stft::SampledSignal sig;
    sig.t0 = sidecar.at("t0").get<double>();
    sig.dt = sidecar.at("dt").get<double>();
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        auto f = detail::split_csv_line(line);
        if (f.size() != 2) throw std::invalid_argument("signal CSV rows need 2 fields");
        sig.samples.emplace_back(detail::parse_double(f[0]), detail::parse_double(f[1]));
    }
    if (sidecar.contains("samples") &&
        sidecar.at("samples").get<std::size_t>() != sig.samples.size())
        throw std::invalid_argument("signal CSV length disagrees with its sidecar");
    return sig;
}

inline std::string sweep_csv(const std::vector<frames::SweepRow>& rows, const std::string& hash) {
    std::string out = csv_preamble(hash);
    out += "redundancy,rect_cond,hex_cond,ratio\n";
    for (const auto& row : rows) {
        out += format_double(row.redundancy);
        out += ',';
        out += format_double(row.rect_cond);
        out += ',';
        out += format_double(row.hex_cond);
        out += ',';
        out += format_double(row.ratio);
        out += '\n';
    }
    return out;
}

inline nlohmann::json probe_report_json(const probe::ProbeReport& report) {
    nlohmann::json probes = nlohmann::json::array();
    for (const auto& rec : report.probes)
        probes.push_back({{"n", rec.n}, {"lambda", rec.lambda_est}, {"residual", rec.residual}});
    nlohmann::json rings = nlohmann::json::array();
    for (const auto& ring : report.ring_estimates)
        rings.push_back({{"r_inner", ring.r_inner}, {"r_outer", ring.r_outer}});
    nlohmann::json out{{"probes", probes},
                       {"verdict", probe::verdict_name(report.verdict)},
                       {"radius", nullptr},
                       {"rings", rings},
                       {"consistency", report.consistency},
                       {"fit_residual", report.fit_residual},
                       {"spectrum_out_of_range", report.spectrum_out_of_range},
                       {"caveat", report.caveat}};
    if (report.radius_estimate) out["radius"] = *report.radius_estimate;
    return out;
}

inline nlohmann::json pseudodisk_json(const bergman::PseudoDisk& pd) {
    return nlohmann::json{{"center", {pd.center.real(), pd.center.imag()}}, {"rho", pd.rho}};
}

}  // namespace tflocal::io
