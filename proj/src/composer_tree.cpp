#include "flowkit/composer.hpp"
#include "flowkit/util.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace flowkit::composer {

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Canonical text used for hashing nodes that were built in memory.
std::string render_spec(const ConfigSpec& s) {
    std::ostringstream out;
    for (const auto& d : s.defaults) out << "DEFAULT " << d << "\n";
    for (const auto& r : s.requires_units) out << "REQUIRES " << r << "\n";
    for (const auto& g : s.exclusive) {
        out << "EXCLUSIVE";
        for (const auto& m : g) out << " " << m;
        out << "\n";
    }
    for (const auto& p : s.parameters)
        out << "PARAMETER " << p.name << " " << param_type_name(p.type) << " "
            << p.default_literal << (p.doc.empty() ? "" : " # " + p.doc) << "\n";
    for (const auto& v : s.variables)
        out << "VARIABLE " << v.name << " " << centering_name(v.centering) << "\n";
    return out.str();
}

void scan_dir(const fs::path& dir, const std::string& path, std::map<std::string, UnitNode>& nodes,
              std::map<std::string, std::string>& raw) {
    fs::path config = dir / "Config";
    if (!fs::exists(config)) return;

    UnitNode node;
    node.path = path;
    std::string text = read_file(config);
    try {
        node.config = parse_config(text);
    } catch (const ConfigError& e) {
        throw std::runtime_error((dir / "Config").string() + ": " + e.what());
    }

    std::vector<std::string> subdirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (entry.is_directory()) {
            subdirs.push_back(name);
        } else if (entry.is_regular_file() && ends_with(name, ".impl")) {
            std::string key = name.substr(0, name.size() - 5);
            if (!is_identifier(key))
                throw std::runtime_error(entry.path().string() + ": bad implementation key");
            node.implementations.push_back(key);
        }
    }
    std::sort(node.implementations.begin(), node.implementations.end());
    raw[path] = text;
    nodes[path] = std::move(node);

    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& sub : subdirs)
        scan_dir(dir / sub, path.empty() ? sub : path + "/" + sub, nodes, raw);
}

}  // namespace

void UnitTree::rehash(const std::map<std::string, std::string>& raw_configs) {
    uint64_t h = fnv1a64("unit-tree-v1");
    for (const auto& [path, node] : nodes_) {
        h = fnv1a64(path, h);
        h = fnv1a64("\x01", h);
        auto it = raw_configs.find(path);
        h = fnv1a64(it != raw_configs.end() ? it->second : render_spec(node.config), h);
        for (const auto& impl : node.implementations) {
            h = fnv1a64("\x02", h);
            h = fnv1a64(impl, h);
        }
        h = fnv1a64("\n", h);
    }
    hash_ = h;
}

UnitTree UnitTree::load(const fs::path& root) {
    if (!fs::is_directory(root))
        throw std::runtime_error("unit tree root is not a directory: " + root.string());
    UnitTree tree;
    std::map<std::string, std::string> raw;
    scan_dir(root, "", tree.nodes_, raw);
    if (tree.nodes_.empty())
        throw std::runtime_error("no Config found under " + root.string());
    tree.rehash(raw);
    return tree;
}

UnitTree UnitTree::from_nodes(std::vector<UnitNode> nodes) {
    UnitTree tree;
    for (auto& n : nodes) {
        std::sort(n.implementations.begin(), n.implementations.end());
        std::string path = n.path;
        if (!tree.nodes_.emplace(path, std::move(n)).second)
            throw std::runtime_error("duplicate unit path '" + path + "'");
    }
    if (!tree.nodes_.count(""))
        tree.nodes_[""] = UnitNode{"", {}, {}};
    // Every non-root node must hang off an existing parent chain.
    for (const auto& [path, node] : tree.nodes_) {
        if (path.empty()) continue;
        std::string parent = parent_of(path);
        if (!tree.nodes_.count(parent))
            throw std::runtime_error("unit '" + path + "' has no parent node '" + parent + "'");
    }
    tree.rehash({});
    return tree;
}

const UnitNode* UnitTree::find(const std::string& path) const {
    auto it = nodes_.find(path);
    return it == nodes_.end() ? nullptr : &it->second;
}

const UnitNode& UnitTree::at(const std::string& path) const {
    const UnitNode* n = find(path);
    if (!n) throw std::runtime_error("no unit '" + path + "'");
    return *n;
}

std::string UnitTree::parent_of(const std::string& path) {
    size_t pos = path.rfind('/');
    return pos == std::string::npos ? std::string() : path.substr(0, pos);
}

std::string UnitTree::leaf_name(const std::string& path) {
    size_t pos = path.rfind('/');
    return pos == std::string::npos ? path : path.substr(pos + 1);
}

std::vector<std::string> UnitTree::children(const std::string& path) const {
    std::vector<std::string> names;
    std::string prefix = path.empty() ? "" : path + "/";
    for (auto it = nodes_.lower_bound(prefix); it != nodes_.end(); ++it) {
        const std::string& p = it->first;
        if (p.compare(0, prefix.size(), prefix) != 0) break;  // past the subtree
        if (p.size() == prefix.size()) continue;              // the node itself
        if (p.find('/', prefix.size()) == std::string::npos) names.push_back(p.substr(prefix.size()));
    }
    // A unit's Main node sorts before its sibling auxiliaries.
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        bool am = ends_with(a, "Main"), bm = ends_with(b, "Main");
        if (am != bm) return am;
        return a < b;
    });
    return names;
}

const ParameterDecl* SimulationManifest::find_param(const std::string& name) const {
    for (const auto& p : parameter_schema)
        if (p.name == name) return &p;
    return nullptr;
}

std::string param_group(const std::string& owner_path) {
    size_t start = 0;
    while (start < owner_path.size()) {
        size_t end = owner_path.find('/', start);
        std::string comp = owner_path.substr(start, end == std::string::npos ? end : end - start);
        if (!comp.empty() && std::isupper(static_cast<unsigned char>(comp[0]))) return comp;
        if (end == std::string::npos) break;
        start = end + 1;
    }
    return owner_path;
}

}  // namespace flowkit::composer
