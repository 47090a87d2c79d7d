#include "flowkit/composer.hpp"
#include "flowkit/util.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace flowkit::composer {

std::string emit_manifest(const SimulationManifest& m) {
    std::ostringstream out;
    out << "# setup " << m.request_echo << "\n";
    out << "# tree " << m.tree_hash << "\n";

    // Lines are written in globally sorted key order.
    for (const auto& [key, path] : m.bindings) out << "binding." << key << " = " << path << "\n";

    out << "geometry.dims = " << m.geometry.dims << "\n";
    out << "geometry.maxblocks = " << m.geometry.maxblocks << "\n";
    out << "geometry.nxb = " << m.geometry.nxb << "\n";
    out << "geometry.nyb = " << m.geometry.nyb << "\n";
    out << "geometry.nzb = " << m.geometry.nzb << "\n";

    for (const auto& p : m.parameter_schema) {
        out << "param." << p.name << ".default = " << p.default_literal << "\n";
        if (!p.doc.empty()) out << "param." << p.name << ".doc = " << p.doc << "\n";
        out << "param." << p.name << ".owner = " << p.owner << "\n";
        out << "param." << p.name << ".type = " << param_type_name(p.type) << "\n";
    }

    out << "provenance.request = " << m.request_echo << "\n";
    if (!m.site.empty()) out << "provenance.site = " << m.site << "\n";
    out << "provenance.tree_hash = " << m.tree_hash << "\n";

    for (size_t i = 0; i < m.resolved_units.size(); ++i)
        out << "unit." << zero_pad(static_cast<int>(i), 4) << " = " << m.resolved_units[i] << "\n";

    for (const auto& v : m.field_registry) {
        out << "var." << v.name << ".centering = " << centering_name(v.centering) << "\n";
        out << "var." << v.name << ".persistence = checkpoint\n";
    }
    return out.str();
}

SimulationManifest parse_manifest(std::string_view text) {
    SimulationManifest m;
    std::map<std::string, ParameterDecl> params;
    std::map<std::string, VariableDecl> vars;
    std::map<int, std::string> units;

    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        size_t sep = line.find(" = ");
        if (sep == std::string::npos) throw std::runtime_error("bad manifest line: " + line);
        std::string key = line.substr(0, sep);
        std::string value = line.substr(sep + 3);

        if (starts_with(key, "binding.")) {
            m.bindings[key.substr(8)] = value;
        } else if (key == "geometry.dims") {
            m.geometry.dims = std::stoi(value);
        } else if (key == "geometry.maxblocks") {
            m.geometry.maxblocks = std::stoi(value);
        } else if (key == "geometry.nxb") {
            m.geometry.nxb = std::stoi(value);
        } else if (key == "geometry.nyb") {
            m.geometry.nyb = std::stoi(value);
        } else if (key == "geometry.nzb") {
            m.geometry.nzb = std::stoi(value);
        } else if (starts_with(key, "param.")) {
            size_t dot = key.rfind('.');
            std::string name = key.substr(6, dot - 6);
            std::string field = key.substr(dot + 1);
            ParameterDecl& p = params[name];
            p.name = name;
            if (field == "default") p.default_literal = value;
            else if (field == "doc") p.doc = value;
            else if (field == "owner") p.owner = value;
            else if (field == "type") {
                auto t = param_type_from(value);
                if (!t) throw std::runtime_error("bad parameter type in manifest: " + value);
                p.type = *t;
            } else throw std::runtime_error("unknown manifest key: " + key);
        } else if (key == "provenance.request") {
            m.request_echo = value;
        } else if (key == "provenance.site") {
            m.site = value;
        } else if (key == "provenance.tree_hash") {
            m.tree_hash = value;
        } else if (starts_with(key, "unit.")) {
            units[std::stoi(key.substr(5))] = value;
        } else if (starts_with(key, "var.")) {
            size_t dot = key.rfind('.');
            std::string name = key.substr(4, dot - 4);
            std::string field = key.substr(dot + 1);
            VariableDecl& v = vars[name];
            v.name = name;
            if (field == "centering") {
                auto c = centering_from(value);
                if (!c) throw std::runtime_error("bad centering in manifest: " + value);
                v.centering = *c;
            } else if (field == "persistence") {
                if (value != "checkpoint") throw std::runtime_error("bad persistence in manifest: " + value);
            } else throw std::runtime_error("unknown manifest key: " + key);
        } else {
            throw std::runtime_error("unknown manifest key: " + key);
        }
    }

    for (auto& [name, p] : params) {
        if (!literal_matches_type(p.default_literal, p.type))
            throw std::runtime_error("manifest default for '" + name + "' does not parse as " +
                                     param_type_name(p.type));
        m.parameter_schema.push_back(p);
    }
    for (auto& [name, v] : vars) m.field_registry.push_back(v);
    int expect = 0;
    for (auto& [idx, path] : units) {
        if (idx != expect++) throw std::runtime_error("manifest unit list has a gap");
        m.resolved_units.push_back(path);
    }
    return m;
}

}  // namespace flowkit::composer
