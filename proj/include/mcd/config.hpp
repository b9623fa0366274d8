#pragma once

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

//! Flat key = value configuration files with one section per run mode.
//! Lines outside any section set defaults; a `[section]` header scopes the
//! keys that follow to that mode, and lookups fall back from the section
//! to the defaults.  '#' starts a comment, blank lines are ignored.

namespace mcd {

//! Parsed configuration: per-section key/value maps plus shared defaults.
class ConfigFile
{
public:
    ConfigFile() = default;

    //! Parses configuration text.
    //! @throw std::runtime_error naming the line on malformed input.
    static ConfigFile parse_string(const std::string& text,
                                   const std::string& origin = "<string>")
    {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty())
                continue;
            if (line.front() == '[') {
                if (line.back() != ']' || line.size() < 3)
                    fail(origin, lineno, "malformed section header '" + line + "'");
                section = trim(line.substr(1, line.size() - 2));
                cfg.sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                fail(origin, lineno, "expected key = value, got '" + line + "'");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty())
                fail(origin, lineno, "empty key");
            cfg.sections_[section][key] = value;
        }
        return cfg;
    }

    //! Parses a configuration file from disk.
    //! @throw std::runtime_error when the file cannot be read.
    static ConfigFile parse_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("config: cannot open '" + path + "'");
        std::ostringstream text;
        text << in.rdbuf();
        return parse_string(text.str(), path);
    }

    //! True when the key is visible from `section` (directly or inherited).
    bool has(const std::string& section, const std::string& key) const
    {
        return find(section, key) != nullptr;
    }

    //! String lookup with fallback from the section to the defaults.
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const
    {
        const std::string* v = find(section, key);
        return v ? *v : fallback;
    }

    //! Required-string lookup.
    //! @throw std::runtime_error when the key is absent.
    std::string require_string(const std::string& section,
                               const std::string& key) const
    {
        const std::string* v = find(section, key);
        if (!v)
            throw std::runtime_error("config: missing required key '" + key
                                     + "' (section '" + section + "')");
        return *v;
    }

    //! Floating-point lookup.
    //! @throw std::runtime_error when the value does not parse.
    double get_double(const std::string& section, const std::string& key,
                      double fallback) const
    {
        const std::string* v = find(section, key);
        return v ? to_double(key, *v) : fallback;
    }

    //! Integer lookup.
    //! @throw std::runtime_error when the value does not parse.
    long long get_int(const std::string& section, const std::string& key,
                      long long fallback) const
    {
        const std::string* v = find(section, key);
        return v ? to_int(key, *v) : fallback;
    }

    //! Boolean lookup; accepts true/false, yes/no, on/off, 1/0.
    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const
    {
        const std::string* v = find(section, key);
        if (!v)
            return fallback;
        const std::string s = lower(*v);
        if (s == "true" || s == "yes" || s == "on" || s == "1")
            return true;
        if (s == "false" || s == "no" || s == "off" || s == "0")
            return false;
        throw std::runtime_error("config: key '" + key
                                 + "' is not a boolean: '" + *v + "'");
    }

    //! Comma-separated list of doubles (empty when the key is absent).
    std::vector<double> get_double_list(const std::string& section,
                                        const std::string& key) const
    {
        std::vector<double> out;
        for (const auto& item : get_string_list(section, key))
            out.push_back(to_double(key, item));
        return out;
    }

    //! Comma-separated list of strings (empty when the key is absent).
    std::vector<std::string> get_string_list(const std::string& section,
                                             const std::string& key) const
    {
        std::vector<std::string> out;
        const std::string* v = find(section, key);
        if (!v)
            return out;
        std::string::size_type start = 0;
        while (true) {
            const auto comma = v->find(',', start);
            const std::string item =
                trim(comma == std::string::npos ? v->substr(start)
                                                : v->substr(start, comma - start));
            if (!item.empty())
                out.push_back(item);
            if (comma == std::string::npos)
                break;
            start = comma + 1;
        }
        return out;
    }

    //! Overrides (or sets) a key in the given section.
    void set(const std::string& section, const std::string& key,
             const std::string& value)
    {
        sections_[section][key] = value;
    }

private:
    static std::string trim(const std::string& s)
    {
        const auto begin = s.find_first_not_of(" \t\r\n");
        if (begin == std::string::npos)
            return "";
        const auto end = s.find_last_not_of(" \t\r\n");
        return s.substr(begin, end - begin + 1);
    }

    static std::string lower(std::string s)
    {
        for (auto& c : s)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    }

    [[noreturn]] static void fail(const std::string& origin, std::size_t lineno,
                                  const std::string& what)
    {
        std::ostringstream msg;
        msg << "config: " << origin << ":" << lineno << ": " << what;
        throw std::runtime_error(msg.str());
    }

    static double to_double(const std::string& key, const std::string& value)
    {
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(value.c_str(), &end);
        if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE)
            throw std::runtime_error("config: key '" + key
                                     + "' is not a number: '" + value + "'");
        return v;
    }

    static long long to_int(const std::string& key, const std::string& value)
    {
        char* end = nullptr;
        errno = 0;
        const long long v = std::strtoll(value.c_str(), &end, 10);
        if (value.empty() || end != value.c_str() + value.size() || errno == ERANGE)
            throw std::runtime_error("config: key '" + key
                                     + "' is not an integer: '" + value + "'");
        return v;
    }

    const std::string* find(const std::string& section,
                            const std::string& key) const
    {
        if (!section.empty()) {
            const auto sec = sections_.find(section);
            if (sec != sections_.end()) {
                const auto it = sec->second.find(key);
                if (it != sec->second.end())
                    return &it->second;
            }
        }
        const auto def = sections_.find("");
        if (def != sections_.end()) {
            const auto it = def->second.find(key);
            if (it != def->second.end())
                return &it->second;
        }
        return nullptr;
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace mcd
