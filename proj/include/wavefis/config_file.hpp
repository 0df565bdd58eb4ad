#pragma once

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "wavefis/csv.hpp"
#include "wavefis/errors.hpp"

namespace wavefis {

/// Flat `key = value` config reader with optional [section] headers that
/// prefix keys as "section.key". Values are strings (optionally quoted),
/// numbers, booleans, or [comma, separated, lists].
class ConfigFile {
public:
    ConfigFile() = default;

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) fail(Errc::invalid_config, "cannot open config '" + path + "'");
        ConfigFile cfg;
        std::string line, section;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const std::string where = path + ":" + std::to_string(line_no);
            std::string text = strip_comment(line);
            text = trim(text);
            if (text.empty()) continue;
            if (text.front() == '[') {
                if (text.back() != ']') fail(Errc::invalid_config, "bad section at " + where);
                section = trim(text.substr(1, text.size() - 2));
                continue;
            }
            const size_t eq = text.find('=');
            if (eq == std::string::npos)
                fail(Errc::invalid_config, "expected key = value at " + where);
            std::string key = trim(text.substr(0, eq));
            std::string value = trim(text.substr(eq + 1));
            if (key.empty() || value.empty())
                fail(Errc::invalid_config, "empty key or value at " + where);
            if (!section.empty()) key = section + "." + key;
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return unquote(it->second);
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(it->second, "config key '" + key + "'");
    }

    long get_int(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const double v = parse_double(it->second, "config key '" + key + "'");
        if (v != static_cast<double>(static_cast<long>(v)))
            fail(Errc::invalid_config, "key '" + key + "' is not an integer");
        return static_cast<long>(v);
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::string v = trim(it->second);
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            fail(Errc::invalid_config, "key '" + key + "' is not a list");
        std::vector<std::string> out;
        std::string item;
        for (char c : v.substr(1, v.size() - 2)) {
            if (c == ',') {
                out.push_back(unquote(trim(item)));
                item.clear();
            } else {
                item.push_back(c);
            }
        }
        if (!trim(item).empty()) out.push_back(unquote(trim(item)));
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static std::string strip_comment(const std::string& s) {
        bool quoted = false;
        for (size_t i = 0; i < s.size(); ++i) {
            if (s[i] == '"') quoted = !quoted;
            if (s[i] == '#' && !quoted) return s.substr(0, i);
        }
        return s;
    }

    static std::string unquote(const std::string& s) {
        if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
            return s.substr(1, s.size() - 2);
        return s;
    }

    std::map<std::string, std::string> values_;
};

}  // namespace wavefis
