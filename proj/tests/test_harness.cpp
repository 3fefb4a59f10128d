#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "choicebandit/harness.hpp"

using namespace choicebandit;

namespace {

ExperimentConfig small_stochastic() {
    ExperimentConfig config;
    config.name = "unit-small";
    config.kind = ExperimentKind::Stochastic;
    config.env_family = EnvFamily::Nl;
    config.steps = 50;
    config.replications = 40;
    config.seed = 321;
    config.variants.push_back(VariantConfig("mnl-gb", "classical-gb", GnlModel::mnl(9, 1.0)));
    config.variants.push_back(VariantConfig(
        "nl-045", "nl-gb",
        GnlModel::nested({0.45, 0.45, 0.45}, {{0, 3, 4}, {1, 5, 6}, {2, 7, 8}})));
    return config;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        std::vector<std::string> cells;
        std::istringstream cs(line);
        std::string cell;
        while (std::getline(cs, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

// Minimal well-formedness scan: tags balance and nothing escapes the root.
bool xml_balanced(const std::string& text) {
    std::vector<std::string> stack;
    size_t pos = 0;
    while ((pos = text.find('<', pos)) != std::string::npos) {
        const size_t end = text.find('>', pos);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(pos + 1, end - pos - 1);
        pos = end + 1;
        if (tag.empty() || tag[0] == '?' || tag[0] == '!') continue;
        const bool closing = tag[0] == '/';
        const bool self_closing = tag.back() == '/';
        if (closing) tag = tag.substr(1);
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
    }
    return stack.empty();
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("deterministic single-step run on a noise-free environment") {
    ExperimentConfig config;
    config.name = "tiny";
    config.kind = ExperimentKind::Stochastic;
    config.env_family = EnvFamily::Custom;
    config.custom_env = make_custom_env({2.0, -1.0, 0.5}, 0.0);
    config.steps = 1;
    config.replications = 1;
    config.seed = 5;
    config.variants.push_back(VariantConfig("gb", "classical-gb", GnlModel::mnl(3, 1.0)));
    const AggregateResult result = run_experiment(config, 1);
    const double r = result.variants[0].mean_reward[0];
    CHECK((r == 2.0 || r == -1.0 || r == 0.5));
    const AggregateResult again = run_experiment(config, 1);
    CHECK(again.variants[0].mean_reward[0] == r);
}

TEST_CASE("aggregate equals the mean of per-replication series") {
    const ExperimentConfig config = small_stochastic();
    const AggregateResult result = run_experiment(config, 3);
    for (size_t v = 0; v < config.variants.size(); ++v) {
        std::vector<double> reward(config.steps, 0.0), optimal(config.steps, 0.0);
        for (long rep = 0; rep < config.replications; ++rep) {
            const ReplicationSeries series =
                run_single_replication(config, config.variants[v], rep);
            for (long t = 0; t < config.steps; ++t) {
                reward[t] += series.reward[t];
                optimal[t] += series.optimal[t];
            }
        }
        for (long t = 0; t < config.steps; ++t) {
            CHECK(std::fabs(result.variants[v].mean_reward[t] -
                            reward[t] / config.replications) <= 1e-12);
            CHECK(std::fabs(result.variants[v].pct_optimal[t] -
                            optimal[t] / config.replications) <= 1e-12);
        }
    }
}

TEST_CASE("thread count does not change the bytes") {
    const ExperimentConfig config = small_stochastic();
    const std::string one = csv_text(run_experiment(config, 1));
    const std::string three = csv_text(run_experiment(config, 3));
    CHECK(one == three);
}

TEST_CASE("flat learner and its singleton-nest twin produce one curve") {
    ExperimentConfig config;
    config.name = "twin";
    config.kind = ExperimentKind::Stochastic;
    config.env_family = EnvFamily::Mnl;
    config.steps = 60;
    config.replications = 30;
    config.seed = 77;
    config.variants.push_back(VariantConfig("mnl-gb", "classical-gb", GnlModel::mnl(10, 1.0)));
    std::vector<std::vector<int>> cells(10);
    for (int i = 0; i < 10; ++i) cells[i] = {i};
    config.variants.push_back(VariantConfig(
        "nl-trivial", "nl-gb", GnlModel::nested(std::vector<double>(10, 1.0), cells)));
    const AggregateResult result = run_experiment(config, 2);
    for (long t = 0; t < config.steps; ++t) {
        CHECK(std::fabs(result.variants[0].mean_reward[t] -
                        result.variants[1].mean_reward[t]) <= 1e-12);
        CHECK(std::fabs(result.variants[0].pct_optimal[t] -
                        result.variants[1].pct_optimal[t]) <= 1e-12);
    }
}

TEST_CASE("csv layout and round trip") {
    const ExperimentConfig config = small_stochastic();
    const AggregateResult result = run_experiment(config, 2);
    const std::string text = csv_text(result);
    const auto rows = parse_csv(text);
    CHECK(rows.size() == static_cast<size_t>(config.steps * 2 + 1));
    CHECK(rows[0] == std::vector<std::string>{"step", "variant", "mean_reward",
                                              "pct_optimal"});
    CHECK(text.find('\r') == std::string::npos);
    for (size_t r = 1; r < rows.size(); ++r) CHECK(rows[r].size() == 4);

    // Values round-trip through the 9-significant-digit format.
    const long t = 17;
    const auto& row = rows[1 + t];
    CHECK(row[0] == std::to_string(t + 1));
    CHECK(row[1] == "mnl-gb");
    CHECK(std::stod(row[2]) ==
          doctest::Approx(result.variants[0].mean_reward[t]).epsilon(1e-8));
    CHECK(std::stod(row[3]) ==
          doctest::Approx(result.variants[0].pct_optimal[t]).epsilon(1e-8));
}

TEST_CASE("svg output is well formed and covers the data") {
    const ExperimentConfig config = small_stochastic();
    const AggregateResult result = run_experiment(config, 2);
    const std::string dir = "unit_svg_out";
    std::filesystem::create_directories(dir);
    const auto files = emit_svg(result, dir);
    CHECK(files.size() == 3);
    for (const std::string& path : files) {
        std::ifstream in(path);
        REQUIRE(in.good());
        std::stringstream buf;
        buf << in.rdbuf();
        const std::string svg = buf.str();
        CHECK(xml_balanced(svg));
        CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") !=
              std::string::npos);
        const size_t polylines = count_occurrences(svg, "<polyline");
        if (path.find("learned-values") != std::string::npos)
            CHECK(polylines == config.variants.size() + 1);  // + environment reference
        else
            CHECK(polylines == config.variants.size());
        CHECK(count_occurrences(svg, "<text") >= 12);  // ticks, labels, legend
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("presets match the shipped experiment grid") {
    const auto presets = preset_experiments();
    REQUIRE(presets.size() == 5);

    const ExperimentConfig& e1 = presets[0];
    CHECK(e1.name == "e1-mnl");
    CHECK(e1.variants.size() == 4);
    CHECK(e1.steps == 1000);
    CHECK(e1.replications == 2000);
    CHECK(e1.env_family == EnvFamily::Mnl);
    CHECK(e1.variants[2].model.nests().size() == 5);
    for (const auto& nest : e1.variants[2].model.nests()) {
        CHECK(nest.members.size() == 2);
        CHECK(nest.mu_ell == doctest::Approx(0.8));
    }

    const ExperimentConfig& e2 = presets[1];
    CHECK(e2.env_family == EnvFamily::Nl);
    CHECK(e2.variants.size() == 4);
    for (size_t v = 1; v < 4; ++v) {
        REQUIRE(e2.variants[v].model.nests().size() == 3);
        for (const auto& nest : e2.variants[v].model.nests())
            CHECK(nest.members.size() == 3);
    }

    CHECK(presets[2].name == "e3-learned-1000");
    CHECK(presets[2].replications == 1);
    CHECK(presets[3].name == "e3-learned-2000");
    CHECK(presets[3].steps == 2000);

    const ExperimentConfig& e4 = presets[4];
    CHECK(e4.env_family == EnvFamily::NlLarge);
    CHECK(e4.num_arms() == 25);
    for (size_t v = 1; v < 4; ++v) {
        const auto& nests = e4.variants[v].model.nests();
        REQUIRE(nests.size() == 3);
        CHECK(nests[0].members.size() == 5);
        CHECK(nests[1].members.size() == 10);
        CHECK(nests[2].members.size() == 10);
    }
    for (const auto& preset : presets)
        for (const auto& v : preset.variants) CHECK(v.alpha == doctest::Approx(0.1));
}

TEST_CASE("config json parsing") {
    const auto spec = nlohmann::json::parse(R"({
        "name": "custom-run",
        "kind": "stochastic",
        "env": {"family": "custom", "means": [1.0, 2.0], "noise_sd": 0.0},
        "steps": 5,
        "replications": 2,
        "seed": 9,
        "formats": ["csv"],
        "variants": [
            {"name": "gb", "algorithm": "classical-gb",
             "model": {"mnl": {"n": 2, "mu": 1.0}}, "alpha": 0.2}
        ]})");
    const ExperimentConfig config = ExperimentConfig::from_json(spec);
    CHECK(config.name == "custom-run");
    CHECK(config.custom_env.means.size() == 2);
    CHECK(config.write_csv);
    CHECK_FALSE(config.write_svg);
    CHECK(config.variants[0].alpha == doctest::Approx(0.2));
    CHECK_NOTHROW(run_experiment(config, 1));

    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::parse(R"({"kind":"x"})")),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        ExperimentConfig::from_json(nlohmann::json::parse(
            R"({"kind":"stochastic","env":{"family":"mnl"},"variants":[]})")),
        std::invalid_argument);

    // Round trip through to_json keeps the run definition.
    const ExperimentConfig echo = ExperimentConfig::from_json(config.to_json());
    CHECK(echo.name == config.name);
    CHECK(echo.variants[0].model.fingerprint() == config.variants[0].model.fingerprint());
}

TEST_CASE("config validation failures") {
    ExperimentConfig config = small_stochastic();
    config.variants.push_back(config.variants[0]);  // duplicate name
    CHECK_THROWS_AS(run_experiment(config, 1), std::invalid_argument);

    ExperimentConfig wrong_arms = small_stochastic();
    wrong_arms.variants[0] = VariantConfig("bad", "classical-gb", GnlModel::mnl(4, 1.0));
    CHECK_THROWS_AS(run_experiment(wrong_arms, 1), std::invalid_argument);

    ExperimentConfig bad_algo = small_stochastic();
    bad_algo.variants[0].algorithm = "gev-bandit";
    CHECK_THROWS_AS(run_experiment(bad_algo, 1), std::invalid_argument);
}

TEST_CASE("adversarial harness: bounds hold with room to spare") {
    ExperimentConfig config;
    config.name = "adv-small";
    config.kind = ExperimentKind::Adversarial;
    config.steps = 80;
    config.replications = 30;
    config.seed = 17;
    config.loss_kinds = {LossKind::UniformRandom, LossKind::SingleBestArm};
    config.variants.push_back(VariantConfig("mnl", "gev-bandit", GnlModel::mnl(4, 1.0)));
    config.variants.push_back(VariantConfig(
        "nl", "gev-bandit", GnlModel::nested({0.5, 0.5}, {{0, 1}, {2, 3}})));
    const RegretSummary summary = run_regret_experiment(config, 2);
    CHECK(summary.entries.size() == 4);  // 2 loss kinds x 2 variants
    const BoundReport report = check_bounds(config, summary);
    CHECK_FALSE(report.any_violation);
    for (const RegretEntry& e : report.entries) {
        CHECK(e.margin > 0.0);
        CHECK(e.eta > 0.0);
    }

    // Reruns reproduce the numbers exactly.
    const RegretSummary again = run_regret_experiment(config, 1);
    for (size_t i = 0; i < summary.entries.size(); ++i)
        CHECK(summary.entries[i].measured == again.entries[i].measured);
}

TEST_CASE("experts harness: sequence classes and margins") {
    ExperimentConfig config;
    config.name = "experts-small";
    config.kind = ExperimentKind::Experts;
    config.steps = 200;
    config.replications = 20;  // random sequences
    config.seed = 23;
    config.reward_bound = 1.0;
    config.variants.push_back(VariantConfig("mnl", "experts", GnlModel::mnl(10, 1.0)));
    const RegretSummary summary = run_regret_experiment(config, 1);
    CHECK(summary.entries.size() == 4);  // random + three adversarial classes
    const BoundReport report = check_bounds(config, summary);
    CHECK_FALSE(report.any_violation);

    // Single alternative: regret identically zero, bound nonnegative.
    ExperimentConfig solo = config;
    solo.variants.clear();
    solo.variants.push_back(VariantConfig("solo", "experts", GnlModel::mnl(1, 1.0)));
    const RegretSummary solo_summary = run_regret_experiment(solo, 1);
    for (const RegretEntry& e : solo_summary.entries) {
        CHECK(e.measured == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(e.bound >= 0.0);
    }
}

TEST_CASE("reward sequences respect the cap") {
    std::mt19937_64 rng(29);
    for (RewardSeqKind kind : {RewardSeqKind::UniformRandom, RewardSeqKind::Alternating,
                               RewardSeqKind::SingleSpike, RewardSeqKind::DelayedLeader}) {
        const auto seq = make_reward_sequence(kind, 6, 120, 0.8, rng);
        CHECK(seq.size() == 120);
        for (const auto& row : seq) {
            CHECK(row.size() == 6);
            for (double v : row) CHECK(std::fabs(v) <= 0.8 + 1e-12);
        }
    }
}

TEST_CASE("regret csv") {
    RegretSummary summary;
    summary.experiment = "x";
    summary.entries.push_back({"v", "uniform-random", 1.5, 0.1, 10.0, 2.0, 8.5});
    const std::string path = "unit_regret.csv";
    emit_regret_csv(summary, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "variant,sequence,measured,se,bound,eta,margin");
    CHECK(row == "v,uniform-random,1.5,0.1,10,2,8.5");
    std::filesystem::remove(path);
}

TEST_CASE("verification suite passes") {
    std::ostringstream log;
    const int failures = run_verification(true, log, 2);
    INFO(log.str());
    CHECK(failures == 0);
    CHECK(count_occurrences(log.str(), "PASS") >= 10);
}
