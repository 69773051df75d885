#pragma once

// Output helpers: config hashing, CSV with 17 significant digits, JSON files.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "geoq/error.hpp"

namespace geoq::harness {

using json = nlohmann::json;
// Output documents keep insertion order so config_hash leads every file.
using ojson = nlohmann::ordered_json;

inline std::string fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Compact ℏ tag for file names, e.g. 0.05 → "0.05".
inline std::string hbar_tag(double hbar) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", hbar);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& config_hash, const std::vector<std::string>& header)
        : out_(path), columns_(header.size()) {
        if (!out_) throw Error("cannot open " + path.string() + " for writing");
        out_ << "# config_hash=" << config_hash << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }

    /// Cells are written verbatim; use `fmt` for numbers.
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw Error("CSV row has the wrong number of cells");
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(fmt(v));
        row(cells);
    }

private:
    std::ofstream out_;
    std::size_t columns_;
};

/// Non-finite numbers become null so the files stay valid JSON.
inline ojson num(double x) { return std::isfinite(x) ? ojson(x) : ojson(nullptr); }

inline void write_json(const std::filesystem::path& path, const ojson& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

}  // namespace geoq::harness
