#include "ogpred/config_file.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ogpred {

std::string trim_copy(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string part;
    std::istringstream is(s);
    while (std::getline(is, part, sep)) out.push_back(trim_copy(part));
    return out;
}

ConfigMap parse_config_text(const std::string& text, const std::string& origin) {
    std::map<std::string, std::string> values;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim_copy(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": expected 'key = value', got '" + line + "'");
        const std::string key = trim_copy(line.substr(0, eq));
        const std::string value = trim_copy(line.substr(eq + 1));
        if (key.empty())
            throw ParseError(origin + ":" + std::to_string(line_no) + ": empty key");
        values[key] = value;
    }
    return ConfigMap(std::move(values));
}

ConfigMap load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config file not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path.string());
}

std::string ConfigMap::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

long long ConfigMap::get_int(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not an integer: '" + raw + "'");
    }
}

long long ConfigMap::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

double ConfigMap::get_double(const std::string& key) const {
    const std::string raw = get_string(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument(raw);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "' is not a number: '" + raw + "'");
    }
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string raw = get_string(key);
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw ConfigError("config key '" + key + "' is not a boolean: '" + raw + "'");
}

std::vector<int> ConfigMap::get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const std::string& part : split_on(get_string(key), ',')) {
        if (part.empty()) continue;
        try {
            out.push_back(std::stoi(part));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad integer '" + part + "'");
        }
    }
    return out;
}

std::vector<double> ConfigMap::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& part : split_on(get_string(key), ',')) {
        if (part.empty()) continue;
        try {
            out.push_back(std::stod(part));
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': bad number '" + part + "'");
        }
    }
    return out;
}

std::vector<std::vector<int>> ConfigMap::get_int_list_list(const std::string& key) const {
    std::vector<std::vector<int>> out;
    for (const std::string& group : split_on(get_string(key), ';')) {
        if (group.empty()) continue;
        std::vector<int> values;
        for (const std::string& part : split_on(group, ',')) {
            if (part.empty()) continue;
            try {
                values.push_back(std::stoi(part));
            } catch (const std::exception&) {
                throw ConfigError("config key '" + key + "': bad integer '" + part + "'");
            }
        }
        if (!values.empty()) out.push_back(std::move(values));
    }
    return out;
}

} // namespace ogpred
