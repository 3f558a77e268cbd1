#pragma once

/// @file io.hpp
/// @brief CSV and JSON output. CSV follows RFC 4180 (CRLF line ends, '.'
/// decimal separator) with 17 significant digits so values round-trip.

#include "skewsim/collisions.hpp"
#include "skewsim/config_json.hpp"
#include "skewsim/core.hpp"
#include "skewsim/oracles.hpp"
#include "skewsim/skorohod.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#ifndef SKEWSIM_VERSION
#define SKEWSIM_VERSION "0.1.0"
#endif

namespace skewsim {

inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + dir.string() + "': " + ec.message());
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& file) : out_(file, std::ios::binary) {
        if (!out_) throw Error(ErrorCode::Io, "cannot open '" + file.string() + "' for writing");
    }

    void header(std::span<const std::string> names) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out_ << ',';
            out_ << quote(names[i]);
        }
        out_ << "\r\n";
    }

    void row(std::span<const double> values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) out_ << ',';
            out_ << format_number(values[i]);
        }
        out_ << "\r\n";
    }

    void close() {
        out_.close();
        if (out_.fail()) throw Error(ErrorCode::Io, "write failed");
    }

private:
    static std::string quote(std::string_view s) {
        if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + '"';
    }

    std::ofstream out_;
};

/// Columns t, x_1..x_d, l; one row per grid point k = 0..K.
inline void write_path_csv(const std::filesystem::path& file, const ScaledPath& path) {
    CsvWriter csv(file);
    std::vector<std::string> names{"t"};
    for (std::size_t i = 0; i < path.dim; ++i) names.push_back("x_" + std::to_string(i + 1));
    names.emplace_back("l");
    csv.header(names);
    std::vector<double> row(path.dim + 2);
    for (std::int64_t k = 0; k <= path.steps; ++k) {
        row[0] = path.time(k);
        const auto x = path.state(k);
        std::copy(x.begin(), x.end(), row.begin() + 1);
        row[path.dim + 1] = path.l[static_cast<std::size_t>(k)];
        csv.row(row);
    }
    csv.close();
}

/// Columns t, x_1, x_2, l, l_plus, l_minus.
inline void write_particle_csv(const std::filesystem::path& file, const ParticlePath& p) {
    CsvWriter csv(file);
    const std::vector<std::string> names{"t", "x_1", "x_2", "l", "l_plus", "l_minus"};
    csv.header(names);
    for (std::int64_t k = 0; k <= p.steps; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double row[] = {static_cast<double>(k) / static_cast<double>(p.n),
                              p.x1[kk], p.x2[kk], p.l[kk], p.l_plus[kk], p.l_minus[kk]};
        csv.row(row);
    }
    csv.close();
}

/// Columns v_1..v_d (lattice coordinates), mass.
inline void write_law_csv(const std::filesystem::path& file, const LatticeLaw& law) {
    CsvWriter csv(file);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < law.dim; ++i) names.push_back("v_" + std::to_string(i + 1));
    names.emplace_back("mass");
    csv.header(names);
    std::vector<double> row(law.dim + 1);
    for (std::size_t j = 0; j < law.size(); ++j) {
        const auto v = law.state(j);
        for (std::size_t i = 0; i < law.dim; ++i) row[i] = static_cast<double>(v[i]);
        row[law.dim] = law.mass[j];
        csv.row(row);
    }
    csv.close();
}

/// Table with arbitrary columns; NaN cells are written empty.
inline void write_table_csv(const std::filesystem::path& file, std::span<const std::string> names,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + file.string() + "' for writing");
    for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
    out << "\r\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << (std::isnan(r[i]) ? "" : format_number(r[i]));
        out << "\r\n";
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + file.string() + "'");
}

inline void write_json(const std::filesystem::path& file, const json& j) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + file.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + file.string() + "'");
}

/// Record of one CLI invocation. Everything in manifest.json is a function
/// of (config, seed, command); wall-clock timings go to timings.json so the
/// manifest stays byte-identical across reruns and worker counts.
struct RunManifest {
    std::string command;
    json config;
    std::uint64_t seed = 0;
    json results = json::object();
    bool passed = true;
    std::vector<std::string> files;
    json timings = json::object();

    [[nodiscard]] json to_json() const {
        json j;
        j["tool"] = "skewsim";
        j["version"] = SKEWSIM_VERSION;
        j["command"] = command;
        j["seed"] = seed;
        j["config"] = config;
        j["passed"] = passed;
        j["results"] = results;
        j["files"] = files;
        j["timings_file"] = "timings.json";
        return j;
    }

    void write(const std::filesystem::path& dir) const {
        ensure_directory(dir);
        write_json(dir / "manifest.json", to_json());
        write_json(dir / "timings.json", timings);
    }
};

/// JSON number that survives NaN/inf (stored as null).
inline json json_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace skewsim
