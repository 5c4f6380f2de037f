#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ogpred/errors.hpp"

namespace ogpred {

/// Parsed `key = value` file: one pair per line, '#' comments, blank lines
/// ignored. This is the format shared by run configs, grid files, and
/// dataset manifests.
class ConfigMap {
public:
    ConfigMap() = default;
    explicit ConfigMap(std::map<std::string, std::string> values)
        : values_(std::move(values)) {}

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Comma-separated list of integers.
    std::vector<int> get_int_list(const std::string& key) const;
    /// Comma-separated list of doubles.
    std::vector<double> get_double_list(const std::string& key) const;
    /// Semicolon-separated list of comma-separated integer lists, e.g.
    /// "600,75; 225" -> {{600,75},{225}}.
    std::vector<std::vector<int>> get_int_list_list(const std::string& key) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

ConfigMap load_config_file(const std::filesystem::path& path);
ConfigMap parse_config_text(const std::string& text, const std::string& origin = "<text>");

std::string trim_copy(const std::string& s);
std::vector<std::string> split_on(const std::string& s, char sep);

} // namespace ogpred
