#include "ctsim/config_file.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ctsim/common.hpp"

namespace ctsim {
namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail_line(const std::string& source, int line, const std::string& msg) {
    fail(source + ":" + std::to_string(line) + ": " + msg);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

}  // namespace

const ConfigEntry* ConfigSection::find(const std::string& key) const {
    for (const auto& e : entries) {
        if (e.key == key) return &e;
    }
    return nullptr;
}

std::vector<const ConfigEntry*> ConfigSection::all(const std::string& key) const {
    std::vector<const ConfigEntry*> out;
    for (const auto& e : entries) {
        if (e.key == key) out.push_back(&e);
    }
    return out;
}

void ConfigSection::fail_at(const std::string& key, const std::string& msg) const {
    const ConfigEntry* e = find(key);
    fail_line(source, e ? e->line : line, "[" + name + "] " + msg);
}

std::string ConfigSection::get_string(const std::string& key) const {
    const ConfigEntry* e = find(key);
    if (!e) fail_line(source, line, "[" + name + "] missing required key '" + key + "'");
    return e->value;
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) const {
    const ConfigEntry* e = find(key);
    return e ? e->value : fallback;
}

double ConfigSection::get_double(const std::string& key) const {
    const ConfigEntry* e = find(key);
    if (!e) fail_line(source, line, "[" + name + "] missing required key '" + key + "'");
    const char* s = e->value.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        fail_line(source, e->line, "'" + key + "' is not a number: '" + e->value + "'");
    return v;
}

double ConfigSection::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long ConfigSection::get_int(const std::string& key) const {
    const ConfigEntry* e = find(key);
    if (!e) fail_line(source, line, "[" + name + "] missing required key '" + key + "'");
    const char* s = e->value.c_str();
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end == s || *end != '\0')
        fail_line(source, e->line, "'" + key + "' is not an integer: '" + e->value + "'");
    return v;
}

long ConfigSection::get_int(const std::string& key, long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool ConfigSection::get_bool(const std::string& key) const {
    const ConfigEntry* e = find(key);
    if (!e) fail_line(source, line, "[" + name + "] missing required key '" + key + "'");
    const std::string& v = e->value;
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    fail_line(source, e->line, "'" + key + "' is not a boolean: '" + v + "'");
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::vector<const ConfigSection*> ConfigFile::sections_named(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections) {
        if (s.name == name) out.push_back(&s);
    }
    return out;
}

const ConfigSection* ConfigFile::unique_section(const std::string& name) const {
    auto hits = sections_named(name);
    if (hits.empty()) return nullptr;
    if (hits.size() > 1) {
        fail(source + ":" + std::to_string(hits[1]->line) + ": duplicate [" + name +
             "] section (first at line " + std::to_string(hits[0]->line) + ")");
    }
    return hits[0];
}

ConfigFile parse_config_text(const std::string& text, const std::string& source_name) {
    ConfigFile cf;
    cf.source = source_name;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    ConfigSection* current = nullptr;

    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                fail_line(source_name, line_no, "unterminated section header: '" + trim(raw) + "'");
            std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name))
                fail_line(source_name, line_no, "bad section name: '" + name + "'");
            ConfigSection sec;
            sec.name = name;
            sec.line = line_no;
            sec.source = source_name;
            cf.sections.push_back(std::move(sec));
            current = &cf.sections.back();
            continue;
        }

        size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail_line(source_name, line_no, "expected 'key = value': '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key)) fail_line(source_name, line_no, "bad key: '" + key + "'");
        if (value.empty()) fail_line(source_name, line_no, "empty value for key '" + key + "'");
        if (!current) fail_line(source_name, line_no, "key '" + key + "' appears before any [section]");
        current->entries.push_back({key, value, line_no});
    }
    return cf;
}

ConfigFile load_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config_text(buf.str(), path);
}

}  // namespace ctsim
