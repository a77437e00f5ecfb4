#include "licon/commands.hpp"
#include "licon/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Learning-informed PDE control and qMRI experiments"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out;
    std::string scale = "desk";
    long long seed = -1;
    std::vector<std::string> overrides;
    for (const auto& name : licon::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "key = value configuration file");
        sub->add_option("--seed", seed, "single training seed (replaces the seeds list)")->check(CLI::NonNegativeNumber);
        sub->add_option("--out", out, "output directory");
        sub->add_option("--scale", scale, "default preset")->check(CLI::IsMember({"paper", "desk"}));
        sub->add_option("--set", overrides, "key=value override, repeatable");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        licon::Config cfg = licon::experiment_config();
        licon::apply_scale(cfg, scale);
        if (!config_path.empty()) cfg.parse_file(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw licon::ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed >= 0) cfg.set("seeds", std::to_string(seed));
        if (!out.empty()) cfg.set("out", out);
        licon::run_command(command, cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "licon " << command << ": " << e.what() << '\n';
        return licon::exit_code_for(e);
    }
    return 0;
}
