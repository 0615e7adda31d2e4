#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace tasep::io {

inline constexpr const char* tool_version = "1.0.0";

/// 64-bit FNV-1a, used as a content digest in run manifests.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex_digest(const std::string& bytes) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << fnv1a(bytes);
    return os.str();
}

inline std::string format_number(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// CSV table with a fixed header and a '#'-prefixed metadata preamble.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

    template <class... Cells>
    void row(const Cells&... cells) {
        std::vector<std::string> r;
        (r.push_back(cell(cells)), ...);
        if (r.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
        rows_.push_back(std::move(r));
    }

    void row_cells(std::vector<std::string> r) {
        if (r.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
        rows_.push_back(std::move(r));
    }

    std::size_t size() const { return rows_.size(); }

    std::string str() const {
        std::ostringstream os;
        for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << "\n";
        join(os, header_);
        for (const auto& r : rows_) join(os, r);
        return os.str();
    }

private:
    static std::string cell(const std::string& s) { return s; }
    static std::string cell(const char* s) { return s; }
    static std::string cell(bool b) { return b ? "1" : "0"; }
    static std::string cell(double v) { return format_number(v); }
    template <class T>
    static std::string cell(const T& v) {
        return std::to_string(v);
    }
    static void join(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << "\n";
    }

    std::vector<std::string> header_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<std::string>> rows_;
};

/// Everything needed to rerun a command: its name, parameters, seed, version, timing and output digests.
struct RunManifest {
    std::string command;
    nlohmann::json parameters = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string version = tool_version;
    double wall_seconds = 0;
    std::map<std::string, std::string> digests;
    std::vector<std::string> flags;  // numerical warnings raised during the run

    nlohmann::json to_json() const {
        return {{"command", command}, {"parameters", parameters}, {"seed", seed},   {"version", version},
                {"wall_seconds", wall_seconds}, {"digests", digests}, {"flags", flags}};
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.parameters = j.at("parameters");
        m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.wall_seconds = j.at("wall_seconds").get<double>();
        m.digests = j.at("digests").get<std::map<std::string, std::string>>();
        m.flags = j.at("flags").get<std::vector<std::string>>();
        return m;
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Writes the content to path and records its digest in the manifest.
inline void write_output(const std::string& path, const std::string& content, RunManifest& manifest) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file " + path);
    f << content;
    manifest.digests[path] = hex_digest(content);
}

/// Sidecar at <path>.manifest.json.
inline void write_manifest(const std::string& path, const RunManifest& manifest) {
    std::ofstream f(path + ".manifest.json");
    if (!f) throw std::runtime_error("cannot open manifest for " + path);
    f << manifest.to_json().dump(2) << "\n";
}

}  // namespace tasep::io
