#pragma once

#include "contact/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace contact {

// Parsed `key = value` text with optional `[section]` headers. Values are a
// scalar token or a bracketed comma list. Comments start with '#'.
//
//   [system]
//   n = 2
//   masses = [1, 1]
//   g = 1
//
// Keys before the first header belong to section "". Lookups are by
// "section.key" (or bare "key" for the unnamed section).
class ConfigFile {
public:
    struct Entry {
        std::vector<std::string> items; // one item for scalars
        bool is_list = false;
        int line = 0;
    };

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    const Entry& at(const std::string& key) const;
    int line_of(const std::string& key) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<long long> get_ints(const std::string& key, const std::vector<long long>& fallback) const;

    std::vector<std::string> keys() const;

private:
    std::map<std::string, Entry> entries_;
};

// Exact decimal parsing: the full token must be consumed and the result is the
// correctly rounded double.
double parse_double(const std::string& token, int line = 0);
long long parse_int(const std::string& token, int line = 0);

// Reads n, masses and g from section [system] (or the unnamed section).
SystemSpec system_from_config(const ConfigFile& cfg);

} // namespace contact
