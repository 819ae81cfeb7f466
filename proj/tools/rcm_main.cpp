#include "rcm/cli.hpp"
#include "rcm/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

// Command-line flag -> config key. Flags given on the command line override
// values read from --config.
const std::vector<std::pair<std::string, std::string>> kFlags = {
    {"--seed", "seed"},         {"--replicas", "replicas"}, {"--kernel", "kernel"},   {"--alpha", "alpha"},
    {"--trunc-M", "trunc_M"},   {"--blob-R", "blob_R"},     {"--norm", "norm"},       {"--rho", "rho"},
    {"--d", "d"},               {"--horizon", "horizon"},   {"--radii", "radii"},     {"--epsilon", "epsilon"},
    {"--beta", "beta"},         {"--half-width", "half_width"}, {"--boundary", "boundary"},
};

struct SubOptions {
    std::string config;
    std::string out;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random connection model simulator"};
    app.require_subcommand(1);
    unsigned workers = 0;
    app.add_option("--workers", workers, "Worker threads (0 = all cores); results do not depend on it");

    std::map<std::string, SubOptions> subs;
    for (const auto& name : rcm::cli::subcommands()) {
        auto* sc = app.add_subcommand(name, "Run the " + name + " experiment");
        auto& o = subs[name];
        sc->add_option("--config", o.config, "key=value config file");
        sc->add_option("--out", o.out, "Output directory")->default_val("out");
        sc->add_option("--set", o.sets, "Extra key=value overrides");
        for (const auto& [flag, key] : kFlags) {
            sc->add_option_function<std::string>(flag, [&o, key = key](const std::string& v) { o.flags[key] = v; });
        }
    }
    std::string manifest;
    std::string replay_out = "replay";
    auto* replay = app.add_subcommand("replay", "Re-run an experiment from its manifest.txt");
    replay->add_option("manifest", manifest, "Manifest file")->required();
    replay->add_option("--out", replay_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : rcm::cli::config_error;
    }
    rcm::parallel_workers() = workers;

    try {
        rcm::cli::ExperimentConfig cfg;
        if (replay->parsed()) {
            cfg = rcm::cli::load_config(manifest);
            cfg.out_dir = replay_out;
        } else {
            const auto name = app.get_subcommands().front()->get_name();
            const auto& o = subs.at(name);
            if (!o.config.empty()) cfg = rcm::cli::load_config(o.config);
            if (!cfg.command.empty() && cfg.command != name) {
                std::cerr << "config error: config file is for '" << cfg.command << "', not '" << name << "'\n";
                return rcm::cli::config_error;
            }
            cfg.command = name;
            for (const auto& s : o.sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) {
                    std::cerr << "config error: --set expects key=value, got '" << s << "'\n";
                    return rcm::cli::config_error;
                }
                cfg.values[s.substr(0, eq)] = s.substr(eq + 1);
            }
            for (const auto& [k, v] : o.flags) cfg.values[k] = v;
            cfg.out_dir = o.out;
        }
        return rcm::cli::run(cfg, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return rcm::cli::config_error;
    }
}
