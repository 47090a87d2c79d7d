#include "flowkit/params.hpp"
#include "flowkit/util.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace flowkit::params {

using composer::param_group;
using composer::ParameterDecl;
using composer::param_type_name;

Literal Literal::classify(const std::string& text, int line) {
    Literal lit;
    lit.text = text;
    auto fail = [&](const std::string& msg) {
        throw ParamError("line " + std::to_string(line) + ": " + msg);
    };
    if (text.empty()) fail("empty value");

    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"' || text.find('"', 1) != text.size() - 1)
            fail("unterminated or malformed string " + text);
        lit.kind = ParamType::String;
        lit.str = text.substr(1, text.size() - 2);
        return lit;
    }
    if (text == "true" || text == "false") {
        lit.kind = ParamType::Boolean;
        lit.boolean = text == "true";
        return lit;
    }
    // Integer first; anything else numeric must parse fully as a real.
    {
        long long v = 0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec == std::errc() && res.ptr == text.data() + text.size()) {
            lit.kind = ParamType::Integer;
            lit.integer = v;
            lit.real = static_cast<double>(v);
            return lit;
        }
    }
    {
        double v = 0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec == std::errc() && res.ptr == text.data() + text.size()) {
            lit.kind = ParamType::Real;
            lit.real = v;
            return lit;
        }
    }
    fail("cannot parse value '" + text + "'");
    return lit;
}

Parfile parse_parfile(std::string_view text) {
    Parfile pf;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int lineno = static_cast<int>(li) + 1;
        std::string code = trim(strip_comment(lines[li]));
        if (code.empty()) continue;
        size_t eq = code.find('=');
        if (eq == std::string::npos)
            throw ParamError("line " + std::to_string(lineno) + ": expected name = value");
        std::string name = trim(code.substr(0, eq));
        std::string value = trim(code.substr(eq + 1));
        if (!is_identifier(name))
            throw ParamError("line " + std::to_string(lineno) + ": bad parameter name '" + name + "'");
        Literal lit = Literal::classify(value, lineno);
        if (pf.effective.count(name))
            pf.warnings.push_back("parameter '" + name + "' reassigned at line " +
                                  std::to_string(lineno) + "; last value wins");
        pf.entries.push_back({name, lit, lineno});
        pf.effective[name] = std::move(lit);
    }
    return pf;
}

const Value& ParameterSet::get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end()) throw ParamError("unknown runtime parameter '" + name + "'");
    return it->second;
}

double ParameterSet::real(const std::string& name) const {
    const Value& v = get(name);
    if (v.type != ParamType::Real) throw ParamError("parameter '" + name + "' is not REAL");
    return v.real;
}

long long ParameterSet::integer(const std::string& name) const {
    const Value& v = get(name);
    if (v.type != ParamType::Integer) throw ParamError("parameter '" + name + "' is not INTEGER");
    return v.integer;
}

bool ParameterSet::boolean(const std::string& name) const {
    const Value& v = get(name);
    if (v.type != ParamType::Boolean) throw ParamError("parameter '" + name + "' is not BOOLEAN");
    return v.boolean;
}

const std::string& ParameterSet::str(const std::string& name) const {
    const Value& v = get(name);
    if (v.type != ParamType::String) throw ParamError("parameter '" + name + "' is not STRING");
    return v.str;
}

size_t ParameterSet::explicit_count() const {
    size_t n = 0;
    for (const auto& [name, v] : values_)
        if (!v.from_default) ++n;
    return n;
}

namespace {

Value value_from_literal(const std::string& name, const Literal& lit, ParamType declared) {
    Value v;
    v.type = declared;
    v.from_default = false;
    switch (declared) {
        case ParamType::Real:
            if (lit.kind == ParamType::Real) v.real = lit.real;
            else if (lit.kind == ParamType::Integer) v.real = static_cast<double>(lit.integer);
            else throw ParamError("parameter '" + name + "' expects a REAL value, got " + lit.text);
            return v;
        case ParamType::Integer:
            if (lit.kind != ParamType::Integer)
                throw ParamError("parameter '" + name + "' expects an INTEGER value, got " + lit.text);
            v.integer = lit.integer;
            return v;
        case ParamType::Boolean:
            if (lit.kind != ParamType::Boolean)
                throw ParamError("parameter '" + name + "' expects a BOOLEAN value, got " + lit.text);
            v.boolean = lit.boolean;
            return v;
        case ParamType::String:
            if (lit.kind != ParamType::String)
                throw ParamError("parameter '" + name + "' expects a STRING value, got " + lit.text);
            v.str = lit.str;
            return v;
    }
    throw ParamError("bad parameter type");
}

}  // namespace

ParameterSet validate(const std::map<std::string, Literal>& assignments,
                      const SimulationManifest& manifest) {
    ParameterSet set;
    for (const auto& [name, lit] : assignments) {
        const ParameterDecl* decl = manifest.find_param(name);
        if (!decl) throw ParamError("unknown runtime parameter '" + name + "'");
        set.set(name, value_from_literal(name, lit, decl->type));
    }
    // Defaults for everything the input did not mention.
    for (const auto& decl : manifest.parameter_schema) {
        if (set.has(decl.name)) continue;
        Literal lit = Literal::classify(decl.default_literal, 0);
        Value v = value_from_literal(decl.name, lit, decl.type);
        v.from_default = true;
        set.set(decl.name, v);
    }
    return set;
}

const TomlTable* TomlDoc::find(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

TomlDoc parse_toml_subset(std::string_view text) {
    TomlDoc doc;
    TomlTable* current = nullptr;
    std::set<std::string> seen_tables;
    auto lines = split_lines(text);
    for (size_t li = 0; li < lines.size(); ++li) {
        int lineno = static_cast<int>(li) + 1;
        std::string code = trim(strip_comment(lines[li]));
        if (code.empty()) continue;
        if (code.front() == '[') {
            if (code.back() != ']')
                throw ParamError("line " + std::to_string(lineno) + ": malformed table header");
            std::string name = trim(code.substr(1, code.size() - 2));
            if (!is_identifier(name))
                throw ParamError("line " + std::to_string(lineno) + ": bad table name '" + name + "'");
            if (!seen_tables.insert(name).second)
                throw ParamError("line " + std::to_string(lineno) + ": repeated table [" + name + "]");
            doc.tables.push_back({name, {}});
            current = &doc.tables.back();
            continue;
        }
        size_t eq = code.find('=');
        if (eq == std::string::npos)
            throw ParamError("line " + std::to_string(lineno) + ": expected key = value");
        if (!current)
            throw ParamError("line " + std::to_string(lineno) + ": key outside any table");
        std::string name = trim(code.substr(0, eq));
        std::string value = trim(code.substr(eq + 1));
        if (!is_identifier(name))
            throw ParamError("line " + std::to_string(lineno) + ": bad key '" + name + "'");
        for (const auto& [k, v] : current->entries)
            if (k == name)
                throw ParamError("line " + std::to_string(lineno) + ": repeated key '" + name + "'");
        current->entries.emplace_back(name, Literal::classify(value, lineno));
    }
    return doc;
}

std::string generate_parfile(const TomlDoc& doc, const SimulationManifest& manifest) {
    // Unit groups in manifest order (first appearance among resolved units).
    std::vector<std::string> group_order;
    std::set<std::string> group_seen;
    for (const auto& unit : manifest.resolved_units) {
        std::string g = param_group(unit);
        if (group_seen.insert(g).second) group_order.push_back(g);
    }

    // Check tables and keys against the schema.
    std::map<std::string, std::vector<std::pair<std::string, const Literal*>>> by_group;
    for (const auto& table : doc.tables) {
        if (!group_seen.count(table.name))
            throw ParamError("unknown unit table [" + table.name + "]");
        for (const auto& [key, lit] : table.entries) {
            const ParameterDecl* decl = manifest.find_param(key);
            if (!decl) throw ParamError("unknown parameter '" + key + "' in [" + table.name + "]");
            std::string owner_group = param_group(decl->owner);
            if (owner_group != table.name)
                throw ParamError("parameter '" + key + "' belongs under [" + owner_group +
                                 "], not [" + table.name + "]");
            value_from_literal(key, lit, decl->type);  // type check only
            by_group[table.name].emplace_back(key, &lit);
        }
    }

    // Every parameter-owning unit keeps its header even when no value is given.
    std::set<std::string> owning;
    for (const auto& decl : manifest.parameter_schema) owning.insert(param_group(decl.owner));

    std::ostringstream out;
    bool first = true;
    for (const auto& group : group_order) {
        if (!owning.count(group)) continue;
        if (!first) out << "\n";
        first = false;
        out << "# " << group << "\n";
        auto it = by_group.find(group);
        if (it == by_group.end()) continue;
        auto entries = it->second;
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [key, lit] : entries) out << key << " = " << lit->text << "\n";
    }
    return out.str();
}

}  // namespace flowkit::params
