#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace fuzzyduo {

/// Shortest decimal text for v with 17 significant digits ("%.17g"), which
/// reads back to the same double.
std::string format_real(double v);

/// Fixed-point text with `decimals` digits after the point.
std::string format_fixed(double v, int decimals);

double parse_real(std::string_view text, std::string_view context);
long long parse_integer(std::string_view text, std::string_view context);
bool parse_bool(std::string_view text, std::string_view context);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Flat key=value text. Blank lines and lines starting with '#' are ignored.
/// Keys are unique; a repeated key is a parse error.
class KeyValueFile {
public:
    static KeyValueFile parse(std::string_view text, std::string_view source);
    static KeyValueFile load(const std::filesystem::path& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    // Applies "key=value" overrides, e.g. from repeated --set flags.
    void apply_overrides(const std::vector<std::string>& assignments);

    double get_real(const std::string& key, double fallback) const;
    long long get_integer(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    // Keys not in `known`; the CLI rejects these so typos do not pass silently.
    std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

    const std::string& source() const { return source_; }
    const std::map<std::string, std::string>& values() const { return values_; }

private:
    std::string source_;
    std::map<std::string, std::string> values_;
};

} // namespace fuzzyduo
