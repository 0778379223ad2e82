#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "confspace/errors.hpp"

namespace confspace {

/// Value of one config key: scalar, string, boolean, or a homogeneous array.
struct ConfigValue {
    std::variant<std::int64_t, double, bool, std::string, std::vector<double>,
                 std::vector<std::string>>
        v;

    double as_number(const std::string& key) const {
        if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        if (const auto* d = std::get_if<double>(&v)) return *d;
        throw ConfigError("config key '" + key + "' must be a number");
    }
    std::int64_t as_int(const std::string& key) const {
        if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
        throw ConfigError("config key '" + key + "' must be an integer");
    }
    bool as_bool(const std::string& key) const {
        if (const auto* b = std::get_if<bool>(&v)) return *b;
        throw ConfigError("config key '" + key + "' must be a boolean");
    }
    const std::string& as_string(const std::string& key) const {
        if (const auto* s = std::get_if<std::string>(&v)) return *s;
        throw ConfigError("config key '" + key + "' must be a string");
    }
    const std::vector<double>& as_numbers(const std::string& key) const {
        if (const auto* a = std::get_if<std::vector<double>>(&v)) return *a;
        throw ConfigError("config key '" + key + "' must be an array of numbers");
    }
    const std::vector<std::string>& as_strings(const std::string& key) const {
        if (const auto* a = std::get_if<std::vector<std::string>>(&v)) return *a;
        throw ConfigError("config key '" + key + "' must be an array of strings");
    }
};

/// One section of key/value pairs.
struct ConfigTable {
    std::map<std::string, ConfigValue> entries;

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    const ConfigValue& at(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) throw ConfigError("missing config key '" + key + "'");
        return it->second;
    }

    double number(const std::string& key) const { return at(key).as_number(key); }
    double number_or(const std::string& key, double dflt) const {
        return has(key) ? number(key) : dflt;
    }
    std::int64_t integer(const std::string& key) const { return at(key).as_int(key); }
    std::int64_t integer_or(const std::string& key, std::int64_t dflt) const {
        return has(key) ? integer(key) : dflt;
    }
    const std::string& str(const std::string& key) const { return at(key).as_string(key); }
    std::string str_or(const std::string& key, const std::string& dflt) const {
        return has(key) ? str(key) : dflt;
    }
    bool boolean_or(const std::string& key, bool dflt) const {
        return has(key) ? at(key).as_bool(key) : dflt;
    }
    std::vector<double> numbers(const std::string& key) const { return at(key).as_numbers(key); }
    std::vector<std::string> strings(const std::string& key) const {
        return at(key).as_strings(key);
    }
};

/// Parsed experiment manifest: named [section] tables plus ordered [[check]]
/// entries. The accepted grammar is the key/value subset of TOML used by the
/// shipped configs: sections, array-of-table headers, strings, numbers,
/// booleans, and flat arrays.
struct ConfigDocument {
    std::map<std::string, ConfigTable> tables;
    std::vector<ConfigTable> checks;

    const ConfigTable& table(const std::string& name) const {
        auto it = tables.find(name);
        if (it == tables.end()) throw ConfigError("missing config section [" + name + "]");
        return it->second;
    }
    bool has_table(const std::string& name) const { return tables.count(name) > 0; }
    ConfigTable table_or_empty(const std::string& name) const {
        auto it = tables.find(name);
        return it == tables.end() ? ConfigTable{} : it->second;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

inline ConfigValue parse_scalar(const std::string& raw, int lineno) {
    const std::string s = trim(raw);
    if (s.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
        return ConfigValue{s.substr(1, s.size() - 2)};
    }
    if (s == "true") return ConfigValue{true};
    if (s == "false") return ConfigValue{false};
    // integer if it survives a full int parse without '.', 'e', 'E'
    if (s.find_first_of(".eE") == std::string::npos) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used == s.size()) return ConfigValue{static_cast<std::int64_t>(v)};
        } catch (const std::exception&) {
        }
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return ConfigValue{v};
    } catch (const std::exception&) {
    }
    throw ConfigError("line " + std::to_string(lineno) + ": cannot parse value '" + s + "'");
}

inline ConfigValue parse_value(const std::string& raw, int lineno) {
    const std::string s = trim(raw);
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']')
            throw ConfigError("line " + std::to_string(lineno) + ": unterminated array");
        const std::string body = s.substr(1, s.size() - 2);
        std::vector<std::string> cells;
        std::string cur;
        bool in_str = false;
        for (char c : body) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                cells.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!trim(cur).empty() || !cells.empty()) cells.push_back(cur);
        std::vector<double> nums;
        std::vector<std::string> strs;
        bool numeric = true;
        for (const auto& cell : cells) {
            const auto v = parse_scalar(cell, lineno);
            if (const auto* d = std::get_if<double>(&v.v)) {
                nums.push_back(*d);
            } else if (const auto* i = std::get_if<std::int64_t>(&v.v)) {
                nums.push_back(static_cast<double>(*i));
            } else if (const auto* str = std::get_if<std::string>(&v.v)) {
                numeric = false;
                strs.push_back(*str);
            } else {
                throw ConfigError("line " + std::to_string(lineno) + ": unsupported array element");
            }
        }
        if (numeric) return ConfigValue{std::move(nums)};
        if (strs.size() != cells.size())
            throw ConfigError("line " + std::to_string(lineno) + ": mixed array types");
        return ConfigValue{std::move(strs)};
    }
    return parse_scalar(s, lineno);
}

}  // namespace detail

inline ConfigDocument parse_config(const std::string& text) {
    ConfigDocument doc;
    ConfigTable* current = nullptr;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = detail::trim(detail::strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.size() > 3 && line[1] == '[') {
                if (line.substr(line.size() - 2) != "]]")
                    throw ConfigError("line " + std::to_string(lineno) + ": malformed [[section]]");
                const std::string name = detail::trim(line.substr(2, line.size() - 4));
                if (name != "check")
                    throw ConfigError("line " + std::to_string(lineno) +
                                      ": only [[check]] arrays are supported, got [[" + name + "]]");
                doc.checks.emplace_back();
                current = &doc.checks.back();
            } else {
                if (line.back() != ']')
                    throw ConfigError("line " + std::to_string(lineno) + ": malformed [section]");
                const std::string name = detail::trim(line.substr(1, line.size() - 2));
                if (name.empty())
                    throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
                current = &doc.tables[name];
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (current == nullptr)
            throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
        current->entries[key] = detail::parse_value(line.substr(eq + 1), lineno);
    }
    return doc;
}

inline ConfigDocument load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace confspace
