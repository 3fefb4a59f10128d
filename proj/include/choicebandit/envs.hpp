#pragma once

#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "choicebandit/adv_bandit.hpp"
#include "choicebandit/rng.hpp"

namespace choicebandit {

// Stationary Gaussian testbed: fixed per-arm means, shared noise scale.
struct StochasticEnv {
    std::vector<double> means;
    double noise_sd = 1.0;
    int optimal_arm = 0;

    int num_arms() const { return static_cast<int>(means.size()); }
};

StochasticEnv make_custom_env(std::vector<double> means, double noise_sd);

// 10 arms, means drawn i.i.d. from Normal(4, 1).
StochasticEnv make_mnl_env(std::mt19937_64& rng);

// 9 arms; the first three means from Normal(7.5, 1), the rest from
// Normal(2.5, 1).
StochasticEnv make_nl_env(std::mt19937_64& rng);

// 25 arms; arms 2..25 from Normal(2.5, 1), arm 1 pinned to the sampled
// maximum plus 2 so it is always optimal.
StochasticEnv make_nl_large_env(std::mt19937_64& rng);

double draw_reward(const StochasticEnv& env, int arm, std::mt19937_64& rng);

// mean + sd * z for an externally supplied standard normal draw.
inline double reward_from_gaussian(const StochasticEnv& env, int arm, double z) {
    return env.means[arm] + env.noise_sd * z;
}

enum class LossKind { UniformRandom, SingleBestArm, SwitchingBest };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

// T x n loss matrix with every entry in [-1, 0]: uniform noise, one
// persistently cheap arm, or a cheap arm that rotates every quarter of
// the horizon.
LossMatrix make_adversarial_losses(LossKind kind, int n, long horizon,
                                   std::mt19937_64& rng);

// Loads {"means": [...], "noise_sd": number}.
StochasticEnv env_from_json(const nlohmann::json& spec);

// Parses a loss matrix from CSV text (rows = steps, columns = arms).
LossMatrix losses_from_csv(const std::string& text);

}  // namespace choicebandit
