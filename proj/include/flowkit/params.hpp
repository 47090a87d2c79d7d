#pragma once

#include "flowkit/composer.hpp"

#include <map>
#include <string>
#include <vector>

namespace flowkit::params {

using composer::ParamType;
using composer::SimulationManifest;

/// A literal as read from a parfile or TOML file: the classified kind plus the
/// original spelling, which generated files preserve byte-for-byte.
struct Literal {
    ParamType kind = ParamType::Real;
    std::string text;       // original spelling, strings include their quotes
    double real = 0.0;
    long long integer = 0;
    bool boolean = false;
    std::string str;        // unquoted payload for strings

    static Literal classify(const std::string& text, int line);
};

struct ParfileEntry {
    std::string name;
    Literal value;
    int line = 0;
};

struct Parfile {
    std::vector<ParfileEntry> entries;        // in file order, duplicates kept
    std::vector<std::string> warnings;        // duplicate-assignment notes
    std::map<std::string, Literal> effective; // last assignment wins
};

Parfile parse_parfile(std::string_view text);

/// One runtime parameter value after validation.
struct Value {
    ParamType type = ParamType::Real;
    double real = 0.0;
    long long integer = 0;
    bool boolean = false;
    std::string str;
    bool from_default = true;
};

class ParameterSet {
public:
    const Value& get(const std::string& name) const;
    bool has(const std::string& name) const { return values_.count(name) != 0; }
    double real(const std::string& name) const;
    long long integer(const std::string& name) const;
    bool boolean(const std::string& name) const;
    const std::string& str(const std::string& name) const;
    size_t explicit_count() const;
    const std::map<std::string, Value>& values() const { return values_; }

    void set(const std::string& name, Value v) { values_[name] = std::move(v); }

private:
    std::map<std::string, Value> values_;
};

struct ParamError : std::runtime_error {
    explicit ParamError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Check names/types against the manifest schema and fill unset parameters
/// from their declared defaults. Integer literals coerce to REAL parameters;
/// no other coercion is allowed.
ParameterSet validate(const std::map<std::string, Literal>& assignments,
                      const SimulationManifest& manifest);

// ---- TOML subset ------------------------------------------------------------
//
// Tables of scalar keys only: [Name] headers, `key = value` lines, # comments.

struct TomlTable {
    std::string name;
    std::vector<std::pair<std::string, Literal>> entries;  // in file order
};

struct TomlDoc {
    std::vector<TomlTable> tables;  // in file order
    const TomlTable* find(const std::string& name) const;
};

TomlDoc parse_toml_subset(std::string_view text);

///// Render a parameter file from a TOML document: `# <Unit>` headers in
/// manifest unit order, keys sorted within each unit, literals preserved.
/// Keys must belong to the unit table they appear under.
std::string generate_parfile(const TomlDoc& doc, const SimulationManifest& manifest);

}  // namespace flowkit::params
