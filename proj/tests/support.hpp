#pragma once

// Shared helpers for the test binaries: scratch directories, deterministic
// randomness, and small independent oracles (rounding, CSV, Turtle).

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>
#include <vector>

namespace testsupport {

/// Scratch directory under the system temp root, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        const auto base = std::filesystem::temp_directory_path();
        path_ = base / ("pidtwin-" + tag + "-" + std::to_string(::getpid()) + "-" +
                        std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Round to 4 decimal places, the precision the reported metrics are frozen at.
inline double round4(double v) { return std::floor(v * 10000.0 + 0.5) / 10000.0; }

/// One parsed Turtle statement.
struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;
};

/// Minimal Turtle reader for the flat subset the exporter emits: @prefix
/// lines plus one "S P O ." statement per line, tokens being prefixed names
/// or <IRI>s. Written independently of the exporter on purpose.
inline std::vector<Triple> parse_turtle(const std::string& text) {
    std::vector<Triple> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("@prefix", 0) == 0) continue;
        std::vector<std::string> tokens;
        size_t i = 0;
        while (i < line.size()) {
            if (line[i] == ' ') {
                ++i;
                continue;
            }
            if (line[i] == '<') {
                const size_t close = line.find('>', i);
                if (close == std::string::npos) throw std::runtime_error("unclosed IRI");
                tokens.push_back(line.substr(i, close - i + 1));
                i = close + 1;
            } else {
                size_t end = i;
                while (end < line.size() && line[end] != ' ') ++end;
                tokens.push_back(line.substr(i, end - i));
                i = end;
            }
        }
        if (tokens.empty()) continue;
        if (tokens.size() != 4 || tokens.back() != ".")
            throw std::runtime_error("not a flat triple line: " + line);
        out.push_back({tokens[0], tokens[1], tokens[2]});
    }
    return out;
}

/// Splits one CSV record; handles the doubled-quote escaping used in the
/// exports. No embedded newlines (the exporters never emit them).
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

} // namespace testsupport
