#include <iostream>

#include <CLI11.hpp>

#include "abelu/runner.hpp"

namespace {

int run_subcommand(const std::string& sub, const std::string& config, const std::string& out, long bits, bool verbose) {
    using namespace abelu;
    try {
        ExperimentConfig cfg = load_config(config);
        if (subcommand_for(cfg.kind) != sub)
            throw ConfigError("config kind '" + to_string(cfg.kind) + "' belongs to subcommand '" + subcommand_for(cfg.kind) + "'");
        if (!out.empty()) cfg.out_dir = out;
        if (bits > 0) cfg.precision_bits = bits;
        validate(cfg);
        auto log = [verbose](const std::string& msg) {
            if (verbose) std::cerr << msg << "\n";
        };
        RunReport rr = run(cfg, log);
        for (const auto& a : rr.assertions)
            if (verbose || !a.pass) std::cerr << (a.pass ? "pass " : "FAIL ") << a.name << "\n";
        if (rr.runtime_failure) std::cerr << "runtime failure: " << rr.message << "\n";
        std::cout << (rr.passed() ? "ok" : "failed") << " " << cfg.out_dir.string() << "\n";
        return rr.exit_code();
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"abelu: Abel-universal polynomial constructions and diagnostics"};
    app.require_subcommand(1);

    std::string config, out, artifact;
    long bits = 0;
    bool verbose = false;
    std::string chosen;

    for (const char* name : {"construct", "diagnose", "capacity", "approx"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "experiment config (JSON)")->required();
        sub->add_option("--out", out, "output directory (overrides the config)");
        sub->add_option("--precision-bits", bits, "working precision in bits")->check(CLI::Range(16L, 1L << 20));
        sub->add_flag("--verbose", verbose, "log progress to stderr");
        sub->callback([&chosen, name] { chosen = name; });
    }
    auto* desc = app.add_subcommand("describe", "summarize an artifact file or output directory");
    desc->add_option("artifact", artifact, "f.json, report.json, or an output directory")->required();
    desc->callback([&chosen] { chosen = "describe"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (chosen == "describe") {
        try {
            std::cout << abelu::describe(artifact);
            return 0;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    }
    return run_subcommand(chosen, config, out, bits, verbose);
}
