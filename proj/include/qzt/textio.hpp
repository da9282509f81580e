#pragma once

// Small text helpers shared by the file formats: shortest round-trip
// number formatting, strict number parsing, and key=value records.

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "qzt/error.hpp"

namespace qzt {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("write failed for " + path);
}

// Ordered key=value record. Lines starting with '#' and blank lines are
// ignored on parse; duplicate keys are rejected.
struct KeyValues {
    std::vector<std::pair<std::string, std::string>> entries;

    void set(const std::string& k, const std::string& v) {
        for (auto& [key, val] : entries)
            if (key == k) {
                val = v;
                return;
            }
        entries.emplace_back(k, v);
    }
    void set(const std::string& k, double v) { set(k, format_double(v)); }
    void set(const std::string& k, long long v) { set(k, std::to_string(v)); }
    void set(const std::string& k, int v) { set(k, std::to_string(v)); }
    void set(const std::string& k, std::size_t v) { set(k, std::to_string(v)); }
    void set(const std::string& k, const char* v) { set(k, std::string(v)); }

    const std::string* find(std::string_view k) const {
        for (const auto& [key, val] : entries)
            if (key == k) return &val;
        return nullptr;
    }

    std::string render(const std::string& schema_line) const {
        std::string out = schema_line + "\n";
        for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
        return out;
    }

    static KeyValues parse(std::string_view text, const std::string& source) {
        KeyValues kv;
        std::map<std::string, int> seen;
        int lineno = 0;
        for (const auto& raw : split(text, '\n')) {
            ++lineno;
            const auto line = trim(raw);
            if (line.empty() || line.front() == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
            std::string key(trim(line.substr(0, eq)));
            if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
            if (seen.count(key)) throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key " + key);
            seen[key] = lineno;
            kv.entries.emplace_back(key, std::string(trim(line.substr(eq + 1))));
        }
        return kv;
    }
};

}  // namespace qzt
