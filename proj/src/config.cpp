#include "contact/config.hpp"

#include "contact/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace contact {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& body, int line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(body);
    while (std::getline(in, cur, ',')) {
        cur = trim(cur);
        if (cur.empty())
            throw ConfigError("empty list element", line);
        out.push_back(cur);
    }
    return out;
}

} // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string raw, section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto hash = raw.find('#');
        std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty())
            continue;
        if (s.front() == '[' && s.find('=') == std::string::npos) {
            if (s.back() != ']')
                throw ConfigError("unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty())
                throw ConfigError("empty section name", line);
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line);
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        if (key.empty())
            throw ConfigError("missing key", line);
        if (val.empty())
            throw ConfigError("missing value for '" + key + "'", line);
        Entry e;
        e.line = line;
        if (val.front() == '[') {
            if (val.back() != ']')
                throw ConfigError("unterminated list for '" + key + "'", line);
            e.is_list = true;
            std::string body = trim(val.substr(1, val.size() - 2));
            if (!body.empty())
                e.items = split_list(body, line);
        } else {
            e.items = {val};
        }
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.entries_.count(full))
            throw ConfigError("duplicate key '" + full + "'", line);
        cfg.entries_[full] = std::move(e);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

const ConfigFile::Entry& ConfigFile::at(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end())
        throw ConfigError("missing required key '" + key + "'");
    return it->second;
}

int ConfigFile::line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
}

double parse_double(const std::string& token, int line) {
    double v = 0.0;
    const char* b = token.data();
    const char* e = b + token.size();
    if (b != e && *b == '+')
        ++b;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e)
        throw ConfigError("not a number: '" + token + "'", line);
    return v;
}

long long parse_int(const std::string& token, int line) {
    long long v = 0;
    auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || p != token.data() + token.size())
        throw ConfigError("not an integer: '" + token + "'", line);
    return v;
}

double ConfigFile::get_double(const std::string& key) const {
    const auto& e = at(key);
    if (e.is_list || e.items.size() != 1)
        throw ConfigError("'" + key + "' must be a scalar", e.line);
    return parse_double(e.items[0], e.line);
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long ConfigFile::get_int(const std::string& key) const {
    const auto& e = at(key);
    if (e.is_list || e.items.size() != 1)
        throw ConfigError("'" + key + "' must be a scalar", e.line);
    return parse_int(e.items[0], e.line);
}

long long ConfigFile::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::string ConfigFile::get_string(const std::string& key, const std::string& fallback) const {
    if (!has(key))
        return fallback;
    const auto& e = at(key);
    if (e.is_list || e.items.size() != 1)
        throw ConfigError("'" + key + "' must be a scalar", e.line);
    return e.items[0];
}

std::vector<double> ConfigFile::get_doubles(const std::string& key) const {
    const auto& e = at(key);
    std::vector<double> out;
    for (const auto& t : e.items)
        out.push_back(parse_double(t, e.line));
    return out;
}

std::vector<double> ConfigFile::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? get_doubles(key) : fallback;
}

std::vector<long long> ConfigFile::get_ints(const std::string& key, const std::vector<long long>& fallback) const {
    if (!has(key))
        return fallback;
    const auto& e = at(key);
    std::vector<long long> out;
    for (const auto& t : e.items)
        out.push_back(parse_int(t, e.line));
    return out;
}

std::vector<std::string> ConfigFile::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        out.push_back(k);
    return out;
}

SystemSpec system_from_config(const ConfigFile& cfg) {
    auto key = [&](const std::string& k) { return cfg.has("system." + k) ? "system." + k : k; };
    const long long n = cfg.get_int(key("n"));
    const auto masses = cfg.get_doubles(key("masses"));
    const double g = cfg.get_double(key("g"));
    if (n < 2)
        throw ConfigError("n must be at least 2", cfg.line_of(key("n")));
    if (static_cast<long long>(masses.size()) != n)
        throw ConfigError("masses has " + std::to_string(masses.size()) + " entries but n = " + std::to_string(n),
                          cfg.line_of(key("masses")));
    try {
        return SystemSpec::make(static_cast<int>(n), masses, g);
    } catch (const ConfigError& e) {
        throw ConfigError(e.what(), cfg.line_of(key("masses")));
    }
}

} // namespace contact
