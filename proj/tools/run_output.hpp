#pragma once

// Artifact writer for CLI runs: report JSON, RFC 4180 CSV series with 17
// significant digits, gnuplot-ready two-column .dat files, and a MANIFEST.txt
// with one sha-256 per file. Data files carry no timestamps so re-running an
// identical config reproduces them byte for byte; the manifest holds the only
// timestamp.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "sha256.hpp"

namespace rbotool {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class RunWriter {
public:
    explicit RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    const std::filesystem::path& dir() const { return dir_; }

    void write_text(const std::string& name, const std::string& content) {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << content;
        hashes_[name] = sha256_hex(content);
    }

    void write_json(const std::string& name, const nlohmann::json& j) {
        write_text(name, j.dump(2) + "\n");
    }

    /// RFC 4180: comma separated, CRLF line endings, '.' decimal separator.
    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows) {
        std::string content;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) content += ',';
            content += header[i];
        }
        content += "\r\n";
        for (const std::vector<double>& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) content += ',';
                content += fmt17(row[i]);
            }
            content += "\r\n";
        }
        write_text(name, content);
    }

    /// Two-column plot data with gnuplot comment headers.
    void write_dat(const std::string& name, const std::string& xlabel,
                   const std::string& ylabel, const std::vector<double>& x,
                   const std::vector<double>& y) {
        std::string content = "# " + xlabel + "  " + ylabel + "\n";
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i)
            content += fmt17(x[i]) + " " + fmt17(y[i]) + "\n";
        write_text(name, content);
    }

    void finalize_manifest() {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char stamp[64];
        std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        std::string content = std::string("# generated ") + stamp + "\n";
        for (const auto& [name, hash] : hashes_) content += hash + "  " + name + "\n";
        std::ofstream out(dir_ / "MANIFEST.txt", std::ios::binary);
        out << content;
    }

private:
    std::filesystem::path dir_;
    std::map<std::string, std::string> hashes_;  // ordered for determinism
};

}  // namespace rbotool
