#include "choicebandit/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace choicebandit {

namespace {

int argmax(const std::vector<double>& values) {
    return static_cast<int>(std::max_element(values.begin(), values.end()) -
                            values.begin());
}

double clamp_loss(double v) { return std::clamp(v, -1.0, 0.0); }

}  // namespace

StochasticEnv make_custom_env(std::vector<double> means, double noise_sd) {
    if (means.empty()) throw std::invalid_argument("environment needs at least one arm");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise scale must be nonnegative");
    StochasticEnv env;
    env.means = std::move(means);
    env.noise_sd = noise_sd;
    env.optimal_arm = argmax(env.means);
    return env;
}

StochasticEnv make_mnl_env(std::mt19937_64& rng) {
    std::vector<double> means(10);
    for (double& m : means) m = 4.0 + standard_normal(rng);
    return make_custom_env(std::move(means), 1.0);
}

StochasticEnv make_nl_env(std::mt19937_64& rng) {
    std::vector<double> means(9);
    for (int i = 0; i < 3; ++i) means[i] = 7.5 + standard_normal(rng);
    for (int i = 3; i < 9; ++i) means[i] = 2.5 + standard_normal(rng);
    return make_custom_env(std::move(means), 1.0);
}

StochasticEnv make_nl_large_env(std::mt19937_64& rng) {
    std::vector<double> means(25);
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 1; i < 25; ++i) {
        means[i] = 2.5 + standard_normal(rng);
        top = std::max(top, means[i]);
    }
    means[0] = top + 2.0;
    return make_custom_env(std::move(means), 1.0);
}

double draw_reward(const StochasticEnv& env, int arm, std::mt19937_64& rng) {
    if (arm < 0 || arm >= env.num_arms()) throw std::out_of_range("arm index out of range");
    return env.means[arm] + env.noise_sd * standard_normal(rng);
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "uniform-random") return LossKind::UniformRandom;
    if (name == "single-best-arm") return LossKind::SingleBestArm;
    if (name == "switching-best") return LossKind::SwitchingBest;
    throw std::invalid_argument("unknown loss kind '" + name + "'");
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::UniformRandom: return "uniform-random";
        case LossKind::SingleBestArm: return "single-best-arm";
        case LossKind::SwitchingBest: return "switching-best";
    }
    return "unknown";
}

LossMatrix make_adversarial_losses(LossKind kind, int n, long horizon,
                                   std::mt19937_64& rng) {
    if (n < 1 || horizon < 0) throw std::invalid_argument("bad loss-matrix shape");
    LossMatrix losses(static_cast<size_t>(horizon), std::vector<double>(n, 0.0));
    auto unit = [&rng] { return unit_from_bits(rng()); };
    switch (kind) {
        case LossKind::UniformRandom:
            for (auto& row : losses)
                for (double& v : row) v = -unit();
            break;
        case LossKind::SingleBestArm: {
            const int best = static_cast<int>(rng() % static_cast<uint64_t>(n));
            for (auto& row : losses)
                for (int i = 0; i < n; ++i)
                    row[i] = clamp_loss((i == best ? -0.1 : -0.9) + 0.1 * (unit() - 0.5));
            break;
        }
        case LossKind::SwitchingBest: {
            const long stretch = std::max<long>(1, horizon / 4);
            const int start = static_cast<int>(rng() % static_cast<uint64_t>(n));
            for (long t = 0; t < horizon; ++t) {
                const int best = static_cast<int>((start + t / stretch) % n);
                for (int i = 0; i < n; ++i)
                    losses[t][i] =
                        clamp_loss((i == best ? -0.1 : -0.9) + 0.1 * (unit() - 0.5));
            }
            break;
        }
    }
    return losses;
}

StochasticEnv env_from_json(const nlohmann::json& spec) {
    if (!spec.contains("means"))
        throw std::invalid_argument("custom environment needs \"means\"");
    return make_custom_env(spec.at("means").get<std::vector<double>>(),
                           spec.value("noise_sd", 1.0));
}

LossMatrix losses_from_csv(const std::string& text) {
    LossMatrix losses;
    std::istringstream stream(text);
    std::string line;
    size_t width = 0;
    while (std::getline(stream, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            size_t pos = 0;
            double v = std::stod(cell, &pos);
            if (!(v >= -1.0 && v <= 0.0))
                throw std::invalid_argument("loss values must lie in [-1, 0]");
            row.push_back(v);
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::invalid_argument("ragged loss CSV");
        losses.push_back(std::move(row));
    }
    if (losses.empty()) throw std::invalid_argument("empty loss CSV");
    return losses;
}

}  // namespace choicebandit
