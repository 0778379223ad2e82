#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "confspace/runner.hpp"

namespace {

// Exit codes: 0 all pass (inconclusive closability counts as pass with a
// warning), 1 verdict failure, 2 configuration error, 3 execution error.
int run_command(const std::string& config_path, int workers, const std::string& out_dir) {
    confspace::ConfigDocument doc;
    try {
        doc = confspace::load_config_file(config_path);
    } catch (const confspace::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    confspace::RunOptions opt;
    opt.workers = workers;
    opt.out_dir_override = out_dir;
    confspace::RunSummary summary;
    try {
        summary = confspace::run_experiment(doc, opt);
    } catch (const confspace::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "execution error: " << e.what() << "\n";
        return 3;
    }
    for (const auto& check : summary.report["checks"]) {
        const bool pass = check.value("pass", false);
        std::cout << (pass ? "PASS " : "FAIL ") << check.value("identity", "?");
        if (check.contains("paired"))
            std::cout << "  |paired diff| = " << std::abs(check["paired"]["mean"].get<double>())
                      << " vs threshold " << check["threshold"].get<double>();
        if (check.value("inconclusive", false)) std::cout << "  (inconclusive)";
        std::cout << "\n";
    }
    std::cout << (summary.all_pass ? "all checks passed" : "some checks FAILED") << " ("
              << summary.checks_run << " checks, reports in " << summary.out_dir << ")\n";
    if (summary.any_inconclusive)
        std::cout << "warning: at least one closability verdict was inconclusive\n";
    return summary.all_pass ? 0 : 1;
}

int sample_command(const std::string& config_path, const std::string& out_path) {
    confspace::ConfigDocument doc;
    try {
        doc = confspace::load_config_file(config_path);
    } catch (const confspace::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        const std::string csv = confspace::sample_to_csv(doc);
        if (out_path.empty() || out_path == "-") {
            std::cout << csv;
        } else {
            std::ofstream out(out_path);
            if (!out) {
                std::cerr << "execution error: cannot write '" << out_path << "'\n";
                return 3;
            }
            out << csv;
        }
    } catch (const confspace::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "execution error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"confspace: Monte Carlo verification of point-process calculus identities"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_path;
    int workers = 0;

    auto* run = app.add_subcommand("run", "run every check of an experiment config");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--workers", workers, "worker thread cap (default: CONFSPACE_WORKERS or auto)");
    run->add_option("--out", out_dir, "output directory override");

    auto* list = app.add_subcommand("list", "list available check tags");

    std::string tag;
    auto* describe = app.add_subcommand("describe", "describe one check tag");
    describe->add_option("tag", tag, "check tag")->required();

    auto* sample = app.add_subcommand("sample", "draw one configuration and write it as CSV");
    sample->add_option("config", config_path, "experiment config file")->required();
    sample->add_option("--out", out_path, "output CSV path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return run_command(config_path, workers, out_dir);
    if (list->parsed()) {
        for (const auto& [name, text] : confspace::check_catalog()) {
            std::cout << name << "\n";
            (void)text;
        }
        return 0;
    }
    if (describe->parsed()) {
        try {
            std::cout << tag << ": " << confspace::describe_check(tag) << "\n";
        } catch (const confspace::ConfigError& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
        return 0;
    }
    if (sample->parsed()) return sample_command(config_path, out_path);
    return 0;
}
