#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "flowkit/composer.hpp"
#include "flowkit/params.hpp"
#include "flowkit/util.hpp"

using namespace flowkit;
using namespace flowkit::composer;

int main(int argc, char** argv) {
    CLI::App app{"Render a runtime parameter file from a TOML job description"};

    std::string manifest_path;
    std::string toml_path;
    std::string out_path;
    app.add_option("--manifest", manifest_path, "manifest.txt produced by setup")->required();
    app.add_option("--toml", toml_path, "TOML job description")->required();
    app.add_option("--out", out_path, "output parfile (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        SimulationManifest manifest = parse_manifest(read_file(manifest_path));
        params::TomlDoc doc = params::parse_toml_subset(read_file(toml_path));
        std::string parfile = params::generate_parfile(doc, manifest);
        if (out_path.empty())
            std::cout << parfile;
        else
            write_file(out_path, parfile);
        return 0;
    } catch (const params::ParamError& e) {
        std::cerr << "pargen: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "pargen: " << e.what() << "\n";
        return 2;
    }
}
