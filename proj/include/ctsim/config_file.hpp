#pragma once

#include <string>
#include <vector>

namespace ctsim {

// Sectioned key/value text format shared by the level-graph and experiment
// loaders.  Sections may repeat ([level] appears once per level, etc.) and
// every entry remembers its source line so loaders can point at the exact
// spot that broke.
//
//   # comment
//   [section]
//   key = value

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct ConfigSection {
    std::string name;
    int line = 0;
    std::string source;  // file name (or pseudo-name) for error messages
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }
    std::vector<const ConfigEntry*> all(const std::string& key) const;

    // Typed getters.  The no-fallback forms treat a missing key as an error;
    // all of them report malformed values as "source:line: ...".
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;

    [[noreturn]] void fail_at(const std::string& key, const std::string& msg) const;
};

struct ConfigFile {
    std::string source;
    std::vector<ConfigSection> sections;

    std::vector<const ConfigSection*> sections_named(const std::string& name) const;
    // Returns nullptr when the section is absent, errors when it repeats.
    const ConfigSection* unique_section(const std::string& name) const;
};

ConfigFile parse_config_text(const std::string& text, const std::string& source_name);
ConfigFile load_config_file(const std::string& path);

}  // namespace ctsim
