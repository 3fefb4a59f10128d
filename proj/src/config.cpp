#include <stdexcept>

#include "choicebandit/harness.hpp"

namespace choicebandit {

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "stochastic") return ExperimentKind::Stochastic;
    if (s == "adversarial") return ExperimentKind::Adversarial;
    if (s == "experts") return ExperimentKind::Experts;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

std::string kind_to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Stochastic: return "stochastic";
        case ExperimentKind::Adversarial: return "adversarial";
        case ExperimentKind::Experts: return "experts";
    }
    return "stochastic";
}

EnvFamily family_from_string(const std::string& s) {
    if (s == "mnl") return EnvFamily::Mnl;
    if (s == "nl") return EnvFamily::Nl;
    if (s == "nl-large") return EnvFamily::NlLarge;
    if (s == "custom") return EnvFamily::Custom;
    throw std::invalid_argument("unknown environment family '" + s + "'");
}

std::string family_to_string(EnvFamily f) {
    switch (f) {
        case EnvFamily::Mnl: return "mnl";
        case EnvFamily::Nl: return "nl";
        case EnvFamily::NlLarge: return "nl-large";
        case EnvFamily::Custom: return "custom";
    }
    return "custom";
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& spec) {
    if (!spec.is_object()) throw std::invalid_argument("config must be a JSON object");
    ExperimentConfig config;
    config.name = spec.value("name", "experiment");
    config.kind = kind_from_string(spec.value("kind", "stochastic"));
    config.steps = spec.value("steps", 1000L);
    config.replications = spec.value("replications", 2000L);
    config.seed = spec.value("seed", static_cast<uint64_t>(7));
    config.out_dir = spec.value("out", "results");
    config.reward_bound = spec.value("reward_bound", 1.0);
    if (spec.contains("formats")) {
        config.write_csv = false;
        config.write_svg = false;
        for (const auto& f : spec.at("formats")) {
            const std::string fmt = f.get<std::string>();
            if (fmt == "csv")
                config.write_csv = true;
            else if (fmt == "svg")
                config.write_svg = true;
            else
                throw std::invalid_argument("unknown output format '" + fmt + "'");
        }
    }
    if (config.kind == ExperimentKind::Stochastic) {
        if (!spec.contains("env"))
            throw std::invalid_argument("stochastic config needs \"env\"");
        const auto& env = spec.at("env");
        config.env_family = family_from_string(env.value("family", "custom"));
        if (config.env_family == EnvFamily::Custom) config.custom_env = env_from_json(env);
    } else if (config.kind == ExperimentKind::Adversarial && spec.contains("losses")) {
        const auto& losses = spec.at("losses");
        if (losses.contains("csv")) config.loss_csv = losses.at("csv").get<std::string>();
        if (losses.contains("kinds"))
            for (const auto& k : losses.at("kinds"))
                config.loss_kinds.push_back(loss_kind_from_string(k.get<std::string>()));
    }
    if (!spec.contains("variants") || spec.at("variants").empty())
        throw std::invalid_argument("config needs a nonempty \"variants\" list");
    for (const auto& v : spec.at("variants")) {
        if (!v.contains("name") || !v.contains("algorithm") || !v.contains("model"))
            throw std::invalid_argument(
                "each variant needs \"name\", \"algorithm\" and \"model\"");
        VariantConfig variant(v.at("name").get<std::string>(),
                              v.at("algorithm").get<std::string>(),
                              GnlModel::from_json(v.at("model")));
        variant.alpha = v.value("alpha", 0.1);
        variant.eta = v.value("eta", 0.0);
        variant.model_json = v.at("model");
        config.variants.push_back(std::move(variant));
    }
    return config;
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["kind"] = kind_to_string(kind);
    j["steps"] = steps;
    j["replications"] = replications;
    j["seed"] = seed;
    if (kind == ExperimentKind::Stochastic) {
        j["env"]["family"] = family_to_string(env_family);
        if (env_family == EnvFamily::Custom) {
            j["env"]["means"] = custom_env.means;
            j["env"]["noise_sd"] = custom_env.noise_sd;
        }
    }
    if (kind == ExperimentKind::Adversarial) {
        for (const LossKind k : loss_kinds)
            j["losses"]["kinds"].push_back(to_string(k));
        if (!loss_csv.empty()) j["losses"]["csv"] = loss_csv;
    }
    if (kind == ExperimentKind::Experts) j["reward_bound"] = reward_bound;
    for (const VariantConfig& v : variants) {
        nlohmann::json vj;
        vj["name"] = v.name;
        vj["algorithm"] = v.algorithm;
        vj["model"] = v.model_json;
        if (v.algorithm == "gev-bandit" || v.algorithm == "experts")
            vj["eta"] = v.eta;
        else
            vj["alpha"] = v.alpha;
        j["variants"].push_back(std::move(vj));
    }
    return j;
}

}  // namespace choicebandit
