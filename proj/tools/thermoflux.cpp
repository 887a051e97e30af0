#include "thermoflux/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    thermoflux::cli::Invocation inv;
    std::string config;
    std::string out = ".";

    CLI::App app{"Coupled thermoelectric solver with radiation boundary conditions"};
    app.add_option("command", inv.command, "solve | constants | verify | mms")
        ->required()
        ->check(CLI::IsMember({"solve", "constants", "verify", "mms"}));
    app.add_option("--config", config, "key = value configuration file")->required();
    app.add_option("--out", out, "output directory");
    app.add_option("--set", inv.overrides, "override a configuration entry, key=value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : thermoflux::cli::kInputError;
    }
    inv.config = config;
    inv.out = out;
    return thermoflux::cli::run(inv, std::cout, std::cerr);
}
