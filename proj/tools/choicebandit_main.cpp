#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "choicebandit/harness.hpp"

namespace cb = choicebandit;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitVerifyFailure = 3;

struct RunOptions {
    uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool fast = false;
    std::string out;
    std::string format;
};

void apply_overrides(cb::ExperimentConfig& config, const RunOptions& opt) {
    if (opt.seed_set) config.seed = opt.seed;
    if (!opt.out.empty()) config.out_dir = opt.out;
    if (opt.fast) config.replications = std::min<long>(config.replications, 200);
    if (!opt.format.empty()) {
        config.write_csv = opt.format == "csv" || opt.format == "both";
        config.write_svg = opt.format == "svg" || opt.format == "both";
        if (!config.write_csv && !config.write_svg)
            throw std::invalid_argument("format must be csv, svg or both");
    }
}

int execute(const cb::ExperimentConfig& config, const RunOptions& opt) {
    std::filesystem::create_directories(config.out_dir);
    if (config.kind == cb::ExperimentKind::Stochastic) {
        const cb::AggregateResult result = cb::run_experiment(config, opt.threads);
        if (config.write_csv) {
            const std::string path = config.out_dir + "/" + config.name + ".csv";
            cb::emit_csv(result, path);
            std::cout << "wrote " << path << '\n';
        }
        if (config.write_svg) {
            for (const std::string& f : cb::emit_svg(result, config.out_dir))
                std::cout << "wrote " << f << '\n';
        }
        const std::string meta = config.out_dir + "/" + config.name + "-meta.json";
        std::ofstream(meta) << cb::metadata_json(config, result).dump(2) << '\n';
        std::cout << "wrote " << meta << '\n';
        for (const cb::VariantAggregate& v : result.variants)
            std::cout << v.name << ": avg reward " << v.avg_reward
                      << ", final optimal share " << v.final_pct_optimal << '\n';
        return 0;
    }
    const cb::RegretSummary summary = cb::run_regret_experiment(config, opt.threads);
    const cb::BoundReport report = cb::check_bounds(config, summary);
    if (config.write_csv) {
        const std::string path = config.out_dir + "/" + config.name + "-regret.csv";
        cb::emit_regret_csv(summary, path);
        std::cout << "wrote " << path << '\n';
    }
    for (const cb::RegretEntry& e : report.entries)
        std::cout << e.variant << " / " << e.sequence << ": measured " << e.measured
                  << " vs bound " << e.bound << " (margin " << e.margin << ")"
                  << (e.measured > e.bound ? "  ** VIOLATION **" : "") << '\n';
    std::cout << (report.any_violation ? "bound violations detected"
                                       : "all bounds respected")
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-choice bandit simulator"};
    app.require_subcommand(1);

    RunOptions opt;
    std::string config_path;
    std::string preset_name;

    auto add_common = [&opt](CLI::App* cmd) {
        cmd->add_option("--seed", opt.seed, "master seed override")
            ->each([&opt](const std::string&) { opt.seed_set = true; });
        cmd->add_option("--threads", opt.threads, "worker threads (0 = hardware)");
        cmd->add_flag("--fast", opt.fast, "cap replications at 200");
        cmd->add_option("--out", opt.out, "output directory override");
        cmd->add_option("--format", opt.format, "csv | svg | both");
    };

    CLI::App* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("--config", config_path, "config file")->required();
    add_common(run);

    CLI::App* presets = app.add_subcommand("presets", "shipped experiments");
    CLI::App* presets_list = presets->add_subcommand("list", "list preset names");
    CLI::App* presets_run = presets->add_subcommand("run", "run one preset");
    presets_run->add_option("name", preset_name, "preset name")->required();
    add_common(presets_run);
    presets->require_subcommand(1);

    CLI::App* verify = app.add_subcommand("verify", "run the self-check suites");
    bool verify_fast = false;
    int verify_threads = 0;
    verify->add_flag("--fast", verify_fast, "reduced scale");
    verify->add_option("--threads", verify_threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        if (run->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("cannot open config '" + config_path + "'");
            nlohmann::json spec;
            in >> spec;
            cb::ExperimentConfig config = cb::ExperimentConfig::from_json(spec);
            apply_overrides(config, opt);
            return execute(config, opt);
        }
        if (presets_list->parsed()) {
            for (const cb::ExperimentConfig& c : cb::preset_experiments())
                std::cout << c.name << "  (steps " << c.steps << ", replications "
                          << c.replications << ", variants " << c.variants.size() << ")\n";
            return 0;
        }
        if (presets_run->parsed()) {
            for (cb::ExperimentConfig& c : cb::preset_experiments()) {
                if (c.name == preset_name) {
                    apply_overrides(c, opt);
                    return execute(c, opt);
                }
            }
            throw std::invalid_argument("unknown preset '" + preset_name + "'");
        }
        if (verify->parsed()) {
            const int failures =
                cb::run_verification(verify_fast, std::cout, verify_threads);
            return failures == 0 ? 0 : kExitVerifyFailure;
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
    return 0;
}
