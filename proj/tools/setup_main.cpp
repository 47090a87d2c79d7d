#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "flowkit/composer.hpp"
#include "flowkit/util.hpp"

namespace fs = std::filesystem;
using namespace flowkit;
using namespace flowkit::composer;

namespace {

void usage(std::ostream& os) {
    os << "usage: setup <application> [-auto] [-2d|-3d] [-nxb=N -nyb=N -nzb=N]\n"
          "             [-maxblocks=N] [-site=NAME] [-unit=PATH ...] [+shortcut ...]\n"
          "             [-source=DIR] [-objdir=DIR]\n"
          "\n"
          "Resolves the requested application against the unit tree under DIR\n"
          "(default ./source) and writes <objdir>/manifest.txt (default ./object),\n"
          "along with copies of the application's runtime input files.\n";
}

}  // namespace

int main(int argc, char** argv) {
    std::string source_dir = "source";
    std::string obj_dir = "object";
    std::vector<std::string> tokens;
    for (int i = 1; i < argc; ++i) {
        std::string tok = argv[i];
        if (tok == "-h" || tok == "--help") {
            usage(std::cout);
            return 0;
        }
        if (starts_with(tok, "-source=")) {
            source_dir = tok.substr(8);
        } else if (starts_with(tok, "-objdir=")) {
            obj_dir = tok.substr(8);
        } else {
            tokens.push_back(tok);
        }
    }
    if (tokens.empty()) {
        usage(std::cerr);
        return 2;
    }

    try {
        ShortcutTable shortcuts;
        fs::path table_path = fs::path(source_dir) / "shortcuts.txt";
        if (fs::exists(table_path)) shortcuts = parse_shortcut_table(read_file(table_path.string()));

        SetupRequest request = parse_setup_command(tokens, shortcuts);
        UnitTree tree = UnitTree::load(source_dir);
        SimulationManifest manifest = resolve(tree, request);

        fs::create_directories(obj_dir);
        fs::path manifest_path = fs::path(obj_dir) / "manifest.txt";
        write_file(manifest_path.string(), emit_manifest(manifest));

        // Stage the application's runtime inputs (parfile, body/heater tables, ...)
        // next to the manifest. Config and *.impl are composition inputs, not
        // runtime files, so they stay behind.
        fs::path app_dir = fs::path(source_dir) / "Simulation" / "SimulationMain";
        for (const auto& part : fs::path(request.application)) app_dir /= part;
        int staged = 0;
        for (const auto& entry : fs::directory_iterator(app_dir)) {
            if (!entry.is_regular_file()) continue;
            std::string name = entry.path().filename().string();
            if (name == "Config" || ends_with(name, ".impl")) continue;
            fs::copy_file(entry.path(), fs::path(obj_dir) / name,
                          fs::copy_options::overwrite_existing);
            ++staged;
        }

        std::cout << "resolved " << manifest.resolved_units.size() << " units for "
                  << request.application << "\n"
                  << "wrote " << manifest_path.string();
        if (staged) std::cout << " and staged " << staged << " input file" << (staged == 1 ? "" : "s");
        std::cout << "\n";
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "setup: config error: " << e.what() << "\n";
        return 1;
    } catch (const CompositionError& e) {
        std::cerr << "setup: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "setup: " << e.what() << "\n";
        return 2;
    }
}
