#include "licon/config.hpp"

#include "licon/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace licon {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config::Config(std::vector<ConfigKey> schema) : schema_(std::move(schema)) {
    for (const auto& k : schema_) {
        if (!defaults_.emplace(k.name, k.default_value).second)
            throw ConfigError("config schema lists '" + k.name + "' twice");
    }
}

const ConfigKey& Config::lookup(const std::string& key) const {
    for (const auto& k : schema_)
        if (k.name == key) return k;
    throw ConfigError("unknown config key '" + key + "'");
}

void Config::parse(std::istream& is, const std::string& source) {
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const std::string where = source + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (!defaults_.count(key)) throw ConfigError(where + ": unknown config key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
        values_[key] = value;
    }
}

void Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
    lookup(key);
    values_[key] = value;
}

void Config::set_defaults(const std::map<std::string, std::string>& values) {
    for (const auto& [k, v] : values) {
        lookup(k);
        defaults_[k] = v;
    }
}

bool Config::explicitly_set(const std::string& key) const {
    lookup(key);
    return values_.count(key) != 0;
}

const std::string& Config::str(const std::string& key) const {
    lookup(key);
    const auto it = values_.find(key);
    return it != values_.end() ? it->second : defaults_.at(key);
}

double Config::num(const std::string& key) const {
    const std::string& s = str(key);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("config key '" + key + "': '" + s + "' is not a finite number");
    return v;
}

long long Config::integer(const std::string& key) const {
    const std::string& s = str(key);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': '" + s + "' is not an integer");
    return v;
}

std::uint64_t Config::seed(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) throw ConfigError("config key '" + key + "': seeds must be nonnegative");
    return static_cast<std::uint64_t>(v);
}

bool Config::flag(const std::string& key) const {
    const std::string& s = str(key);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw ConfigError("config key '" + key + "': '" + s + "' is not a boolean (true/false)");
}

std::vector<std::string> Config::list(const std::string& key) const {
    const std::string& s = str(key);
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = s.find(',', pos);
        const std::string item = trim(s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (item.empty()) throw ConfigError("config key '" + key + "': empty list entry in '" + s + "'");
        out.push_back(item);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<double> Config::num_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) {
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (*end != '\0' || !std::isfinite(v))
            throw ConfigError("config key '" + key + "': '" + item + "' is not a finite number");
        out.push_back(v);
    }
    return out;
}

void Config::write_resolved(std::ostream& os) const {
    std::vector<std::string> keys;
    for (const auto& k : schema_) keys.push_back(k.name);
    std::sort(keys.begin(), keys.end());
    os << "# resolved configuration\n";
    for (const auto& k : keys) os << k << " = " << str(k) << '\n';
}

void Config::write_resolved(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    write_resolved(out);
}

}  // namespace licon
