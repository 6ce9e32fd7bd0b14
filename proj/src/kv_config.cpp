#include "fuzzyduo/kv_config.hpp"

#include "fuzzyduo/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fuzzyduo {

std::string format_real(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string format_fixed(double v, int decimals)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return parts;
}

double parse_real(std::string_view text, std::string_view context)
{
    const auto t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ParseError(std::string(context) + ": expected a real number, got '" + std::string(text) + "'");
    return v;
}

long long parse_integer(std::string_view text, std::string_view context)
{
    const auto t = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ParseError(std::string(context) + ": expected an integer, got '" + std::string(text) + "'");
    return v;
}

bool parse_bool(std::string_view text, std::string_view context)
{
    const auto t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on")
        return true;
    if (t == "false" || t == "0" || t == "no" || t == "off")
        return false;
    throw ParseError(std::string(context) + ": expected a boolean, got '" + std::string(text) + "'");
}

KeyValueFile KeyValueFile::parse(std::string_view text, std::string_view source)
{
    KeyValueFile kv;
    kv.source_ = source;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto eq = t.find('=');
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        if (eq == std::string_view::npos)
            throw ParseError(where + ": expected key=value");
        std::string key(trim(t.substr(0, eq)));
        if (key.empty())
            throw ParseError(where + ": empty key");
        if (kv.values_.count(key))
            throw ParseError(where + ": duplicate key '" + key + "'");
        kv.values_[key] = std::string(trim(t.substr(eq + 1)));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

const std::string& KeyValueFile::get(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end())
        throw ParseError(source_ + ": missing key '" + key + "'");
    return it->second;
}

void KeyValueFile::apply_overrides(const std::vector<std::string>& assignments)
{
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ParseError("override '" + a + "' is not key=value");
        values_[std::string(trim(std::string_view(a).substr(0, eq)))] =
            std::string(trim(std::string_view(a).substr(eq + 1)));
    }
}

double KeyValueFile::get_real(const std::string& key, double fallback) const
{
    return has(key) ? parse_real(get(key), source_ + ": " + key) : fallback;
}

long long KeyValueFile::get_integer(const std::string& key, long long fallback) const
{
    return has(key) ? parse_integer(get(key), source_ + ": " + key) : fallback;
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const
{
    return has(key) ? parse_bool(get(key), source_ + ": " + key) : fallback;
}

std::string KeyValueFile::get_string(const std::string& key, const std::string& fallback) const
{
    return has(key) ? get(key) : fallback;
}

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string>& known) const
{
    std::vector<std::string> out;
    for (const auto& [key, value] : values_)
        if (std::find(known.begin(), known.end(), key) == known.end())
            out.push_back(key);
    return out;
}

} // namespace fuzzyduo
