#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stereoranger {

/// Line-oriented `key = value` configuration with `[section]` headers and
/// '#' comments. Keys are addressed as "section.key".
class ConfigFile {
public:
    ConfigFile() = default;
    static ConfigFile parse(std::istream& in);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Whitespace-separated numeric list.
    std::vector<double> get_doubles(const std::string& key) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace stereoranger
