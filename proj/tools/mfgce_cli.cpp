#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfgce/commands.hpp"
#include "mfgce/error.hpp"
#include "mfgce/parallel.hpp"

namespace {

int report(const std::string& module, const std::string& message, int line = -1, int column = -1) {
    nlohmann::ordered_json err{{"module", module}, {"message", message}};
    err["line"] = line >= 0 ? nlohmann::ordered_json(line) : nlohmann::ordered_json(nullptr);
    err["column"] = column >= 0 ? nlohmann::ordered_json(column) : nlohmann::ordered_json(nullptr);
    std::cerr << nlohmann::ordered_json{{"error", err}}.dump() << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-fuel mean-field capacity expansion: solver and game harness"};
    app.require_subcommand(1);

    std::string config, out;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    for (const char* name : {"validate", "solve", "iterate", "game", "study"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "YAML run configuration")->required();
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "master seed (overrides the config)");
        sub->add_option("--threads", threads, "worker cap; results do not depend on it")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        return report("cli", e.what());
    }

    CLI::App* sub = app.get_subcommands().front();
    mfgce::CommandOptions opts;
    opts.config = config;
    if (sub->count("--out")) opts.out = out;
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--threads")) mfgce::set_thread_cap(threads);

    try {
        return mfgce::run_command(sub->get_name(), opts, std::cout);
    } catch (const mfgce::ConfigError& e) {
        return report(e.module(), e.what(), e.line(), e.column());
    } catch (const mfgce::Error& e) {
        report(e.module(), e.what());
        return 1;
    } catch (const std::exception& e) {
        report("internal", e.what());
        return 1;
    }
}
