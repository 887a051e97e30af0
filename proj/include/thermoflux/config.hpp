#pragma once

// Run configuration: `key = value` lines with `#` comments, command-line
// overrides, and the translation into mesh, coefficients and solver options.

#include "thermoflux/coupling.hpp"
#include "thermoflux/verify.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace thermoflux {

class Config {
public:
    /// Throws ParseError with the line number of a malformed or duplicate entry.
    static Config parse(std::istream& in, std::filesystem::path base_dir = ".");
    /// Throws Error naming the path when the file cannot be read.
    static Config load(const std::filesystem::path& path);

    /// `key=value` from the command line; replaces any value from the file.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const { return entries_.count(key) > 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::optional<double> get_optional(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    /// Throws ParseError for the first key outside the known set.
    void reject_unknown() const;

    const std::filesystem::path& base_dir() const { return base_dir_; }

private:
    struct Entry {
        std::string value;
        int line = 0;  ///< 0 for overrides
    };
    const Entry* find(const std::string& key) const;
    [[noreturn]] void bad_value(const std::string& key, const std::string& expected) const;

    std::map<std::string, Entry> entries_;
    std::filesystem::path base_dir_ = ".";
};

/// Everything a command needs, resolved from a Config.
struct Setup {
    TriMesh mesh;
    CoefficientModel coeffs;
    ProblemData data;
    PicardOptions picard;
    verify::AuditOptions audit;
    std::optional<double> eps;  ///< constants report margin
    double s = 2.0;
    bool report_timing = false;
    verify::MmsCase mms;
};

/// Builds the setup, validating coefficients on the mesh. Input problems
/// raise ParseError, InvariantError or DomainError.
Setup build_setup(const Config& cfg);

} // namespace thermoflux
