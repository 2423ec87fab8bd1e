#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "lanemden/pipeline.hpp"

using namespace lanemden;

int main(int argc, char** argv) {
    CLI::App app{"Sub/supersolution solver for singular quasilinear Neumann systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::map<std::string, CLI::App*> commands;
    for (const auto& [kind, name] : subcommand_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "run directory")->required();
        sub->add_option("--seed", seed, "random seed (overrides the config)");
        commands[name] = sub;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_status::config;
    }

    RunOptions opt;
    opt.out = out_dir;
    for (const auto& [name, sub] : commands)
        if (sub->parsed()) {
            opt.command = subcommand_from_string(name);
            if (sub->count("--seed")) opt.seed = seed;
        }

    std::string text;
    try {
        opt.threads = resolve_threads(std::getenv("LE_THREADS"));
        text = read_text(config_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_status::config;
    }

    const RunResult r = run_text(text, opt);
    if (r.manifest.contains("error")) std::cerr << "error: " << r.manifest["error"].value("message", "") << '\n';
    std::cout << to_string(opt.command) << ": exit " << r.exit_code << ", manifest in " << opt.out.string() << '\n';
    return r.exit_code;
}
