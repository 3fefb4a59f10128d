#include "choicebandit/harness.hpp"

namespace choicebandit {

namespace {

using nlohmann::json;

json mnl_spec(int n) { return json{{"mnl", {{"n", n}, {"mu", 1.0}}}}; }

json nl_spec(const std::vector<double>& mu_ell,
             const std::vector<std::vector<int>>& partition) {
    return json{{"nl", {{"mu_ell", mu_ell}, {"partition", partition}}}};
}

json singleton_spec(int n) {
    std::vector<double> ones(n, 1.0);
    std::vector<std::vector<int>> cells;
    for (int i = 0; i < n; ++i) cells.push_back({i});
    return nl_spec(ones, cells);
}

VariantConfig gb_variant(const std::string& name, const std::string& algorithm,
                         const json& model_spec, double alpha) {
    VariantConfig v(name, algorithm, GnlModel::from_json(model_spec));
    v.alpha = alpha;
    v.model_json = model_spec;
    return v;
}

ExperimentConfig base_config(const std::string& name, EnvFamily family, long steps,
                             long replications) {
    ExperimentConfig c;
    c.name = name;
    c.kind = ExperimentKind::Stochastic;
    c.env_family = family;
    c.steps = steps;
    c.replications = replications;
    return c;
}

}  // namespace

std::vector<ExperimentConfig> preset_experiments() {
    const double alpha = 0.1;
    std::vector<ExperimentConfig> presets;

    // Unstructured 10-arm testbed: the flat learner, its exclusive-nest
    // twin, pairwise nests, and a deliberately over-structured nesting.
    {
        ExperimentConfig c = base_config("e1-mnl", EnvFamily::Mnl, 1000, 2000);
        c.variants.push_back(gb_variant("mnl-gb", "classical-gb", mnl_spec(10), alpha));
        c.variants.push_back(gb_variant("nl-trivial", "nl-gb", singleton_spec(10), alpha));
        c.variants.push_back(gb_variant(
            "nl-1", "nl-gb",
            nl_spec({0.8, 0.8, 0.8, 0.8, 0.8},
                    {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}}),
            alpha));
        c.variants.push_back(gb_variant(
            "nl-2", "nl-gb",
            nl_spec({0.3, 0.45, 0.3, 0.45}, {{0, 1}, {2, 3, 4}, {5, 6}, {7, 8, 9}}),
            alpha));
        presets.push_back(std::move(c));
    }

    // 9 arms, three strong ones; each nest pairs one strong arm with two
    // weak ones, swept over nest scales.
    const std::vector<std::vector<int>> nl_partition = {{0, 3, 4}, {1, 5, 6}, {2, 7, 8}};
    {
        ExperimentConfig c = base_config("e2-nl", EnvFamily::Nl, 1000, 2000);
        c.variants.push_back(gb_variant("mnl-gb", "classical-gb", mnl_spec(9), alpha));
        c.variants.push_back(gb_variant(
            "nl-025", "nl-gb", nl_spec({0.25, 0.25, 0.25}, nl_partition), alpha));
        c.variants.push_back(
            gb_variant("nl-070", "nl-gb", nl_spec({0.7, 0.7, 0.7}, nl_partition), alpha));
        c.variants.push_back(gb_variant(
            "nl-045", "nl-gb", nl_spec({0.45, 0.45, 0.45}, nl_partition), alpha));
        presets.push_back(std::move(c));
    }

    // Single-run studies of the learned per-arm rewards.
    for (long steps : {1000L, 2000L}) {
        ExperimentConfig c = base_config("e3-learned-" + std::to_string(steps),
                                         EnvFamily::Nl, steps, 1);
        c.variants.push_back(gb_variant("mnl-gb", "classical-gb", mnl_spec(9), alpha));
        c.variants.push_back(gb_variant(
            "nl-045", "nl-gb", nl_spec({0.45, 0.45, 0.45}, nl_partition), alpha));
        presets.push_back(std::move(c));
    }

    // 25 arms with a pinned best arm inside the first nest.
    {
        std::vector<std::vector<int>> cells(3);
        for (int i = 0; i < 5; ++i) cells[0].push_back(i);
        for (int i = 5; i < 15; ++i) cells[1].push_back(i);
        for (int i = 15; i < 25; ++i) cells[2].push_back(i);
        ExperimentConfig c = base_config("e4-nl-large", EnvFamily::NlLarge, 1000, 2000);
        c.variants.push_back(gb_variant("mnl-gb", "classical-gb", mnl_spec(25), alpha));
        c.variants.push_back(
            gb_variant("nl-1", "nl-gb", nl_spec({0.95, 0.35, 0.35}, cells), alpha));
        c.variants.push_back(
            gb_variant("nl-2", "nl-gb", nl_spec({0.95, 0.25, 0.25}, cells), alpha));
        c.variants.push_back(
            gb_variant("nl-3", "nl-gb", nl_spec({0.65, 0.2, 0.2}, cells), alpha));
        presets.push_back(std::move(c));
    }
    return presets;
}

}  // namespace choicebandit
