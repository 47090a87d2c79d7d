#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowkit::composer {

// ---- Config DSL -------------------------------------------------------------

enum class ParamType { Real, Integer, String, Boolean };

const char* param_type_name(ParamType t);
std::optional<ParamType> param_type_from(std::string_view s);

enum class Centering { Center, FaceX, FaceY, FaceZ };

const char* centering_name(Centering c);
std::optional<Centering> centering_from(std::string_view s);

struct ParameterDecl {
    std::string name;
    ParamType type = ParamType::Real;
    std::string default_literal;
    std::string doc;    // trailing comment on the declaration, may be empty
    std::string owner;  // unit path, filled during resolution
};

struct VariableDecl {
    std::string name;
    Centering centering = Centering::Center;
};

struct ConfigSpec {
    std::vector<std::string> defaults;                     // DEFAULT lines, in file order
    std::vector<std::string> requires_units;               // REQUIRES lines (absolute unit paths)
    std::vector<std::vector<std::string>> exclusive;       // EXCLUSIVE groups (child names)
    std::vector<ParameterDecl> parameters;
    std::vector<VariableDecl> variables;
};

struct ConfigError : std::runtime_error {
    ConfigError(int line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

/// Parse one Config file. Throws ConfigError with a line number on bad syntax,
/// unknown keywords, or defaults that do not parse as their declared type.
ConfigSpec parse_config(std::string_view text);

/// Check that a literal is valid for the given parameter type.
bool literal_matches_type(std::string_view literal, ParamType type);

// ---- unit tree ---------------------------------------------------------------

struct UnitNode {
    std::string path;  // "" is the root; otherwise e.g. "physics/IncompNS/IncompNSMain"
    ConfigSpec config;
    std::vector<std::string> implementations;  // sorted implementation keys
};

class UnitTree {
public:
    /// Load a tree from a directory. A subdirectory is a unit node iff it
    /// contains a file named Config; files named <key>.impl declare the node's
    /// implementation keys. Other files and directories are ignored.
    static UnitTree load(const std::filesystem::path& root);

    /// Build a tree from explicit nodes (fixtures and property tests).
    static UnitTree from_nodes(std::vector<UnitNode> nodes);

    const UnitNode* find(const std::string& path) const;
    const UnitNode& at(const std::string& path) const;
    bool contains(const std::string& path) const { return find(path) != nullptr; }

    /// Direct children of a node, sorted with *Main-suffixed names first and
    /// alphabetically within each class.
    std::vector<std::string> children(const std::string& path) const;

    static std::string parent_of(const std::string& path);
    static std::string leaf_name(const std::string& path);

    const std::map<std::string, UnitNode>& nodes() const { return nodes_; }

    /// Stable content hash over (path, config text when loaded, implementations).
    uint64_t content_hash() const { return hash_; }

private:
    std::map<std::string, UnitNode> nodes_;  // keyed by path
    uint64_t hash_ = 0;
    void rehash(const std::map<std::string, std::string>& raw_configs);
};

// ---- setup request & shortcuts ------------------------------------------------

struct SetupRequest {
    std::string application;  // path under Simulation/SimulationMain, e.g. "incompFlow/ChannelFlow"
    bool auto_deps = false;
    int dims = 2;
    int nxb = 8, nyb = 8, nzb = 1;
    int maxblocks = 1000;
    std::string site;
    std::vector<std::string> units;  // explicit unit selections (absolute paths)
    std::string echo;                // original command tokens, space separated
};

/// A shortcut maps "+name" to a list of raw setup tokens.
using ShortcutTable = std::map<std::string, std::vector<std::string>>;

ShortcutTable parse_shortcut_table(std::string_view text);

/// Expand +shortcut tokens in place (left to right); unknown shortcut throws.
std::vector<std::string> expand_shortcuts(const std::vector<std::string>& tokens,
                                          const ShortcutTable& table);

/// Parse setup-style tokens (after shortcut expansion) into a request.
SetupRequest parse_setup_tokens(const std::vector<std::string>& tokens);

/// Expand shortcuts and parse, keeping the pre-expansion tokens as the echo.
SetupRequest parse_setup_command(const std::vector<std::string>& raw_tokens,
                                 const ShortcutTable& table);

// ---- manifest ------------------------------------------------------------------

struct GeometrySpec {
    int dims = 2;
    int nxb = 8, nyb = 8, nzb = 1;
    int maxblocks = 1000;
};

struct SimulationManifest {
    std::vector<std::string> resolved_units;          // root-to-leaf order
    std::map<std::string, std::string> bindings;      // implementation key -> unit path
    std::vector<ParameterDecl> parameter_schema;      // sorted by name
    std::vector<VariableDecl> field_registry;         // sorted by name
    GeometrySpec geometry;
    std::string request_echo;
    std::string tree_hash;
    std::string site;

    const ParameterDecl* find_param(const std::string& name) const;
};

struct CompositionError : std::runtime_error {
    enum class Kind {
        UnknownApplication,
        MissingDependency,
        ExclusivityViolation,
        DuplicateParameter,
        DuplicateVariable,
        ConflictingBinding,
        BadRequest,
    };
    CompositionError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
    Kind kind;
};

/// Resolve a setup request against a unit tree into a manifest.
SimulationManifest resolve(const UnitTree& tree, const SetupRequest& request);

/// Byte-deterministic "key = value" rendering, sorted by key, with a header
/// comment echoing the request and the tree hash.
std::string emit_manifest(const SimulationManifest& m);

SimulationManifest parse_manifest(std::string_view text);

/// Unit grouping used for parameter files: the first path component that
/// starts with an uppercase letter ("physics/sourceTerms/Outlet/..." -> "Outlet").
std::string param_group(const std::string& owner_path);

}  // namespace flowkit::composer
