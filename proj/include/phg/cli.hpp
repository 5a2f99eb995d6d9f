#pragma once

// Command-line entry point: INI-style configuration, subcommand dispatch,
// trace/report emission.  Exit codes: 0 success / all checks pass, 1 check
// failure, 2 usage or configuration error.

#include <map>
#include <string>
#include <vector>

namespace phg {

// Flat INI: section -> key -> value.  Strict mode: unknown keys are errors.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;
    // line numbers for error messages
    std::map<std::string, int> key_lines;

    static IniFile parse_file(const std::string& path);
    static IniFile parse_string(const std::string& text, const std::string& origin);

    bool has(const std::string& sec, const std::string& key) const;
    std::string get(const std::string& sec, const std::string& key,
                    const std::string& fallback) const;
    double get_double(const std::string& sec, const std::string& key, double fallback) const;
    long get_long(const std::string& sec, const std::string& key, long fallback) const;
    // throws std::invalid_argument naming the first unknown key
    void check_known(const std::map<std::string, std::vector<std::string>>& schema) const;
};

// Atomic write: temp file in the same directory, then rename.
void atomic_write(const std::string& path, const std::string& contents);

int cli_main(int argc, const char* const* argv);

}  // namespace phg
