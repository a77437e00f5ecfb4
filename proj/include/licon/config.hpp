#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace licon {

/// Known keys with their default values and a one-line description.
struct ConfigKey {
    std::string name;
    std::string default_value;
    std::string help;
};

/// key = value experiment configuration. Blank lines and lines starting with
/// '#' are ignored; unknown keys, duplicates and lines without '=' throw
/// ConfigError naming the line.
class Config {
public:
    explicit Config(std::vector<ConfigKey> schema);

    void parse(std::istream& is, const std::string& source = "<config>");
    void parse_file(const std::string& path);
    /// Sets one key, overriding file values; unknown keys throw.
    void set(const std::string& key, const std::string& value);
    /// Replaces defaults (not explicit values) for the listed keys.
    void set_defaults(const std::map<std::string, std::string>& values);

    bool explicitly_set(const std::string& key) const;
    const std::string& str(const std::string& key) const;
    double num(const std::string& key) const;
    long long integer(const std::string& key) const;
    std::uint64_t seed(const std::string& key) const;
    bool flag(const std::string& key) const;
    /// Comma-separated values; an empty value gives an empty list.
    std::vector<std::string> list(const std::string& key) const;
    std::vector<double> num_list(const std::string& key) const;

    /// Every key with its resolved value, sorted by name.
    void write_resolved(std::ostream& os) const;
    void write_resolved(const std::string& path) const;

    const std::vector<ConfigKey>& schema() const noexcept { return schema_; }

private:
    const ConfigKey& lookup(const std::string& key) const;

    std::vector<ConfigKey> schema_;
    std::map<std::string, std::string> defaults_;
    std::map<std::string, std::string> values_;
};

}  // namespace licon
