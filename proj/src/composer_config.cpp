#include "flowkit/composer.hpp"
#include "flowkit/util.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace flowkit::composer {

const char* param_type_name(ParamType t) {
    switch (t) {
        case ParamType::Real: return "REAL";
        case ParamType::Integer: return "INTEGER";
        case ParamType::String: return "STRING";
        case ParamType::Boolean: return "BOOLEAN";
    }
    return "?";
}

std::optional<ParamType> param_type_from(std::string_view s) {
    if (s == "REAL") return ParamType::Real;
    if (s == "INTEGER") return ParamType::Integer;
    if (s == "STRING") return ParamType::String;
    if (s == "BOOLEAN") return ParamType::Boolean;
    return std::nullopt;
}

const char* centering_name(Centering c) {
    switch (c) {
        case Centering::Center: return "CENTER";
        case Centering::FaceX: return "FACEX";
        case Centering::FaceY: return "FACEY";
        case Centering::FaceZ: return "FACEZ";
    }
    return "?";
}

std::optional<Centering> centering_from(std::string_view s) {
    if (s == "CENTER") return Centering::Center;
    if (s == "FACEX") return Centering::FaceX;
    if (s == "FACEY") return Centering::FaceY;
    if (s == "FACEZ") return Centering::FaceZ;
    return std::nullopt;
}

namespace {

bool parse_integer_literal(std::string_view s, long long* out = nullptr) {
    if (s.empty()) return false;
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return false;
    if (out) *out = v;
    return true;
}

bool parse_real_literal(std::string_view s, double* out = nullptr) {
    if (s.empty()) return false;
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return false;
    if (out) *out = v;
    return true;
}

}  // namespace

bool literal_matches_type(std::string_view literal, ParamType type) {
    switch (type) {
        case ParamType::Integer:
            return parse_integer_literal(literal);
        case ParamType::Real:
            // An integer literal is an acceptable real default.
            return parse_real_literal(literal);
        case ParamType::Boolean:
            return literal == "true" || literal == "false";
        case ParamType::String:
            return literal.size() >= 2 && literal.front() == '"' && literal.back() == '"' &&
                   literal.find('"', 1) == literal.size() - 1;
    }
    return false;
}

ConfigSpec parse_config(std::string_view text) {
    ConfigSpec spec;
    std::set<std::string> param_names, var_names;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int lineno = static_cast<int>(li) + 1;
        std::string comment;
        std::string code = trim(strip_comment(lines[li], &comment));
        if (code.empty()) continue;
        auto tokens = split_ws(code);
        const std::string& kw = tokens[0];

        if (kw == "DEFAULT") {
            if (tokens.size() != 2 || !is_identifier(tokens[1]))
                throw ConfigError(lineno, "DEFAULT expects one child name");
            spec.defaults.push_back(tokens[1]);
        } else if (kw == "REQUIRES") {
            if (tokens.size() != 2)
                throw ConfigError(lineno, "REQUIRES expects one unit path");
            spec.requires_units.push_back(tokens[1]);
        } else if (kw == "EXCLUSIVE") {
            if (tokens.size() < 3)
                throw ConfigError(lineno, "EXCLUSIVE expects at least two child names");
            std::vector<std::string> group(tokens.begin() + 1, tokens.end());
            for (const auto& g : group)
                if (!is_identifier(g)) throw ConfigError(lineno, "bad EXCLUSIVE member '" + g + "'");
            spec.exclusive.push_back(std::move(group));
        } else if (kw == "PARAMETER") {
            // PARAMETER <name> <TYPE> <default literal>
            if (tokens.size() < 3)
                throw ConfigError(lineno, "PARAMETER expects <name> <type> <default>");
            ParameterDecl decl;
            decl.name = tokens[1];
            if (!is_identifier(decl.name))
                throw ConfigError(lineno, "bad parameter name '" + decl.name + "'");
            auto type = param_type_from(tokens[2]);
            if (!type)
                throw ConfigError(lineno, "unknown parameter type '" + tokens[2] + "'");
            decl.type = *type;
            // Re-join the remainder so quoted string defaults keep their spaces.
            size_t pos = code.find(tokens[1], 9);  // after "PARAMETER"
            pos = code.find(tokens[2], pos + tokens[1].size());
            std::string rest = trim(code.substr(pos + tokens[2].size()));
            if (rest.empty())
                throw ConfigError(lineno, "PARAMETER " + decl.name + " is missing a default");
            decl.default_literal = rest;
            decl.doc = comment;
            if (!literal_matches_type(decl.default_literal, decl.type))
                throw ConfigError(lineno, "default '" + decl.default_literal + "' does not parse as " +
                                              param_type_name(decl.type));
            if (!param_names.insert(decl.name).second)
                throw ConfigError(lineno, "duplicate PARAMETER '" + decl.name + "'");
            spec.parameters.push_back(std::move(decl));
        } else if (kw == "VARIABLE") {
            if (tokens.size() != 3)
                throw ConfigError(lineno, "VARIABLE expects <name> <centering>");
            VariableDecl decl;
            decl.name = tokens[1];
            if (!is_identifier(decl.name))
                throw ConfigError(lineno, "bad variable name '" + decl.name + "'");
            auto c = centering_from(tokens[2]);
            if (!c) throw ConfigError(lineno, "unknown centering '" + tokens[2] + "'");
            decl.centering = *c;
            if (!var_names.insert(decl.name).second)
                throw ConfigError(lineno, "duplicate VARIABLE '" + decl.name + "'");
            spec.variables.push_back(std::move(decl));
        } else {
            throw ConfigError(lineno, "unknown keyword '" + kw + "'");
        }
    }
    return spec;
}

}  // namespace flowkit::composer
