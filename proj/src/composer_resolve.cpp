#include "flowkit/composer.hpp"
#include "flowkit/util.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace flowkit::composer {

namespace {

bool valid_unit_path(const std::string& path) {
    if (path.empty()) return false;
    size_t start = 0;
    while (start <= path.size()) {
        size_t end = path.find('/', start);
        std::string comp = path.substr(start, end == std::string::npos ? end : end - start);
        if (!is_identifier(comp)) return false;
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return true;
}

}  // namespace

ShortcutTable parse_shortcut_table(std::string_view text) {
    ShortcutTable table;
    for (const auto& raw : split_lines(text)) {
        std::string code = trim(strip_comment(raw));
        if (code.empty()) continue;
        auto tokens = split_ws(code);
        if (tokens.size() < 2 || !is_identifier(tokens[0]))
            throw std::runtime_error("bad shortcut line: " + std::string(raw));
        std::vector<std::string> expansion(tokens.begin() + 1, tokens.end());
        table[tokens[0]] = std::move(expansion);
    }
    return table;
}

std::vector<std::string> expand_shortcuts(const std::vector<std::string>& tokens,
                                          const ShortcutTable& table) {
    std::vector<std::string> out;
    for (const auto& tok : tokens) {
        if (!tok.empty() && tok[0] == '+') {
            auto it = table.find(tok.substr(1));
            if (it == table.end())
                throw CompositionError(CompositionError::Kind::BadRequest,
                                       "unknown shortcut '" + tok + "'");
            out.insert(out.end(), it->second.begin(), it->second.end());
        } else {
            out.push_back(tok);
        }
    }
    return out;
}

SetupRequest parse_setup_tokens(const std::vector<std::string>& tokens) {
    SetupRequest req;
    std::ostringstream echo;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) echo << " ";
        echo << tokens[i];
    }
    req.echo = echo.str();

    auto bad = [](const std::string& msg) {
        throw CompositionError(CompositionError::Kind::BadRequest, msg);
    };
    auto int_arg = [&](const std::string& tok, const std::string& prefix) {
        std::string v = tok.substr(prefix.size());
        try {
            size_t pos = 0;
            int n = std::stoi(v, &pos);
            if (pos != v.size() || n <= 0) bad("bad value in '" + tok + "'");
            return n;
        } catch (const CompositionError&) {
            throw;
        } catch (...) {
            bad("bad value in '" + tok + "'");
        }
        return 0;
    };

    for (const auto& tok : tokens) {
        if (tok.empty()) continue;
        if (tok[0] == '+') bad("unexpanded shortcut '" + tok + "'");
        if (tok[0] != '-') {
            if (!req.application.empty()) bad("more than one application given: '" + tok + "'");
            req.application = tok;
            continue;
        }
        if (tok == "-auto") req.auto_deps = true;
        else if (tok == "-2d") { req.dims = 2; }
        else if (tok == "-3d") { req.dims = 3; }
        else if (starts_with(tok, "-nxb=")) req.nxb = int_arg(tok, "-nxb=");
        else if (starts_with(tok, "-nyb=")) req.nyb = int_arg(tok, "-nyb=");
        else if (starts_with(tok, "-nzb=")) req.nzb = int_arg(tok, "-nzb=");
        else if (starts_with(tok, "-maxblocks=")) req.maxblocks = int_arg(tok, "-maxblocks=");
        else if (starts_with(tok, "-site=")) req.site = tok.substr(6);
        else if (starts_with(tok, "-unit=")) {
            std::string path = tok.substr(6);
            if (!valid_unit_path(path)) bad("bad unit path in '" + tok + "'");
            req.units.push_back(path);
        } else {
            bad("unknown setup flag '" + tok + "'");
        }
    }
    if (req.application.empty()) bad("no application given");
    if (!valid_unit_path(req.application)) bad("bad application path '" + req.application + "'");
    return req;
}

SetupRequest parse_setup_command(const std::vector<std::string>& raw_tokens,
                                 const ShortcutTable& table) {
    SetupRequest req = parse_setup_tokens(expand_shortcuts(raw_tokens, table));
    std::ostringstream echo;
    for (size_t i = 0; i < raw_tokens.size(); ++i) {
        if (i) echo << " ";
        echo << raw_tokens[i];
    }
    req.echo = echo.str();
    return req;
}

namespace {

struct Selector {
    const UnitTree& tree;
    bool auto_deps;
    std::set<std::string> selected;

    // Add a node and its ancestors. `origin` names the requester for errors.
    void add(const std::string& path, const std::string& origin,
             CompositionError::Kind missing_kind) {
        std::string cur = path;
        std::vector<std::string> chain;
        while (true) {
            chain.push_back(cur);
            if (cur.empty()) break;
            cur = UnitTree::parent_of(cur);
        }
        if (!tree.contains(path))
            throw CompositionError(missing_kind, "unknown unit '" + path + "'" +
                                                     (origin.empty() ? "" : " (from " + origin + ")"));
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            if (!tree.contains(*it))
                throw CompositionError(missing_kind, "unit '" + path + "' has no node '" + *it + "'");
            selected.insert(*it);
        }
    }

    bool requires_pass() {
        bool grew = false;
        // Iterate over a snapshot; the set only grows.
        std::vector<std::string> snap(selected.begin(), selected.end());
        for (const auto& path : snap) {
            for (const auto& dep : tree.at(path).config.requires_units) {
                if (selected.count(dep)) continue;
                if (!auto_deps) {
                    if (!tree.contains(dep))
                        throw CompositionError(CompositionError::Kind::MissingDependency,
                                               "unit '" + path + "' requires unknown unit '" + dep + "'");
                    throw CompositionError(CompositionError::Kind::MissingDependency,
                                           "unit '" + path + "' requires '" + dep +
                                               "', which is not selected (no -auto)");
                }
                add(dep, path, CompositionError::Kind::MissingDependency);
                grew = true;
            }
        }
        return grew;
    }

    bool defaults_pass() {
        bool grew = false;
        std::vector<std::string> snap(selected.begin(), selected.end());
        for (const auto& path : snap) {
            const UnitNode& node = tree.at(path);
            if (node.config.defaults.empty()) continue;
            // First DEFAULT line wins; an explicitly selected child overrides it.
            bool child_selected = false;
            for (const auto& child : tree.children(path)) {
                std::string cp = path.empty() ? child : path + "/" + child;
                if (selected.count(cp)) { child_selected = true; break; }
            }
            if (child_selected) continue;
            const std::string& name = node.config.defaults.front();
            std::string cp = path.empty() ? name : path + "/" + name;
            if (!tree.contains(cp))
                throw CompositionError(CompositionError::Kind::MissingDependency,
                                       "unit '" + path + "' declares DEFAULT '" + name +
                                           "' but has no such child");
            selected.insert(cp);
            grew = true;
        }
        return grew;
    }

    void run(const std::string& app_path, const std::vector<std::string>& extra_units) {
        add(app_path, "", CompositionError::Kind::UnknownApplication);
        for (const auto& u : extra_units)
            add(u, "request", CompositionError::Kind::MissingDependency);
        for (;;) {
            while (requires_pass()) {}
            if (!defaults_pass()) break;
        }
        // Exclusivity is checked on the final selection.
        for (const auto& path : selected) {
            const UnitNode& node = tree.at(path);
            for (const auto& group : node.config.exclusive) {
                std::vector<std::string> hit;
                for (const auto& member : group) {
                    std::string cp = path.empty() ? member : path + "/" + member;
                    if (selected.count(cp)) hit.push_back(member);
                }
                if (hit.size() > 1) {
                    std::ostringstream msg;
                    msg << "exclusive implementations selected under '" << path << "':";
                    for (const auto& h : hit) msg << " " << h;
                    throw CompositionError(CompositionError::Kind::ExclusivityViolation, msg.str());
                }
            }
        }
    }
};

void order_units(const UnitTree& tree, const std::set<std::string>& selected,
                 const std::string& path, std::vector<std::string>& out) {
    for (const auto& child : tree.children(path)) {
        std::string cp = path.empty() ? child : path + "/" + child;
        if (!selected.count(cp)) continue;
        out.push_back(cp);
        order_units(tree, selected, cp, out);
    }
}

}  // namespace

SimulationManifest resolve(const UnitTree& tree, const SetupRequest& request) {
    std::string app_path = "Simulation/SimulationMain/" + request.application;
    if (!tree.contains(app_path))
        throw CompositionError(CompositionError::Kind::UnknownApplication,
                               "unknown application '" + request.application + "'");

    Selector sel{tree, request.auto_deps, {}};
    sel.run(app_path, request.units);

    SimulationManifest m;
    order_units(tree, sel.selected, "", m.resolved_units);

    // Implementation bindings: deepest selected provider wins along a lineage;
    // unrelated providers of the same key are a tree defect.
    for (const auto& path : sel.selected) {
        if (path.empty()) continue;
        for (const auto& key : tree.at(path).implementations) {
            auto it = m.bindings.find(key);
            if (it == m.bindings.end()) {
                m.bindings[key] = path;
                continue;
            }
            const std::string& prev = it->second;
            if (starts_with(path, prev + "/")) {
                it->second = path;  // deeper node supersedes its ancestor
            } else if (starts_with(prev, path + "/")) {
                // keep the deeper previous binding
            } else {
                throw CompositionError(CompositionError::Kind::ConflictingBinding,
                                       "implementation key '" + key + "' provided by unrelated units '" +
                                           prev + "' and '" + path + "'");
            }
        }
    }

    // Merge parameter declarations and field variables.
    std::map<std::string, std::string> param_owner, var_owner;
    for (const auto& path : m.resolved_units) {
        const UnitNode& node = tree.at(path);
        for (const auto& decl : node.config.parameters) {
            auto [it, fresh] = param_owner.emplace(decl.name, path);
            if (!fresh)
                throw CompositionError(CompositionError::Kind::DuplicateParameter,
                                       "parameter '" + decl.name + "' declared by both '" + it->second +
                                           "' and '" + path + "'");
            ParameterDecl owned = decl;
            owned.owner = path;
            m.parameter_schema.push_back(std::move(owned));
        }
        for (const auto& var : node.config.variables) {
            auto [it, fresh] = var_owner.emplace(var.name, path);
            if (!fresh)
                throw CompositionError(CompositionError::Kind::DuplicateVariable,
                                       "variable '" + var.name + "' declared by both '" + it->second +
                                           "' and '" + path + "'");
            m.field_registry.push_back(var);
        }
    }
    std::sort(m.parameter_schema.begin(), m.parameter_schema.end(),
              [](const ParameterDecl& a, const ParameterDecl& b) { return a.name < b.name; });
    std::sort(m.field_registry.begin(), m.field_registry.end(),
              [](const VariableDecl& a, const VariableDecl& b) { return a.name < b.name; });

    m.geometry.dims = request.dims;
    m.geometry.nxb = request.nxb;
    m.geometry.nyb = request.nyb;
    m.geometry.nzb = request.dims == 3 ? request.nzb : 1;
    m.geometry.maxblocks = request.maxblocks;
    m.request_echo = request.echo;
    m.site = request.site;
    m.tree_hash = hex64(tree.content_hash());
    return m;
}

}  // namespace flowkit::composer
