#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "choicebandit/envs.hpp"
#include "choicebandit/experts.hpp"
#include "choicebandit/gnl.hpp"
#include "choicebandit/grad_bandit.hpp"

namespace choicebandit {

enum class ExperimentKind { Stochastic, Adversarial, Experts };
enum class EnvFamily { Mnl, Nl, NlLarge, Custom };

struct VariantConfig {
    std::string name;
    std::string algorithm;  // classical-gb | gnl-gb | nl-gb | gev-bandit | experts
    GnlModel model;
    double alpha = 0.1;  // gradient bandits
    double eta = 0.0;    // experts / adversarial; 0 selects the bound-optimal value
    nlohmann::json model_json;

    VariantConfig(std::string name_, std::string algorithm_, GnlModel model_);

    // Stream key for the per-variant random draws: variants with equal
    // sampling behavior (same canonical model, same step size) share
    // their streams, genuinely different variants get independent ones.
    uint64_t stream_key() const;
};

struct ExperimentConfig {
    std::string name;
    ExperimentKind kind = ExperimentKind::Stochastic;
    EnvFamily env_family = EnvFamily::Mnl;
    StochasticEnv custom_env;          // used when env_family == Custom
    std::vector<LossKind> loss_kinds;  // adversarial runs
    std::string loss_csv;              // optional fixed loss matrix (CSV text path)
    double reward_bound = 1.0;         // experts sup-norm cap K
    long steps = 1000;
    long replications = 2000;
    uint64_t seed = 7;
    std::string out_dir = "results";
    bool write_csv = true;
    bool write_svg = true;
    std::vector<VariantConfig> variants;

    static ExperimentConfig from_json(const nlohmann::json& spec);
    nlohmann::json to_json() const;
    int num_arms() const;  // arms implied by the environment family / variants
};

struct VariantAggregate {
    std::string name;
    std::vector<double> mean_reward;  // per step, averaged over replications
    std::vector<double> reward_se;
    std::vector<double> pct_optimal;  // per step
    std::vector<double> final_preferences;  // averaged over replications
    std::vector<double> learned_value;      // per-arm mean observed reward
    double avg_reward = 0.0;  // per-replication run average, then mean over reps
    double avg_reward_se = 0.0;
    double avg_pct_optimal = 0.0;
    double avg_pct_optimal_se = 0.0;
    double final_pct_optimal = 0.0;
    double final_pct_optimal_se = 0.0;
    double min_sampled_prob = 1.0;
};

struct AggregateResult {
    std::string experiment;
    long steps = 0;
    long replications = 0;
    uint64_t seed = 0;
    int num_arms = 0;
    std::vector<double> env_mean_reference;  // per-arm env means averaged over reps
    std::vector<VariantAggregate> variants;
};

// Seeded, replication-parallel run of a stochastic-bandit experiment.
// Deterministic for a given (config, seed) at any thread count.
AggregateResult run_experiment(const ExperimentConfig& config, int threads = 0);

struct ReplicationSeries {
    std::vector<double> reward;
    std::vector<unsigned char> optimal;
    std::vector<double> final_preferences;
    std::vector<double> learned_value;
    double min_sampled_prob = 1.0;
};

// One (replication, variant) trajectory; the unit the parallel runner
// aggregates, exposed for reference checks.
ReplicationSeries run_single_replication(const ExperimentConfig& config,
                                         const VariantConfig& variant, long rep);

std::string csv_text(const AggregateResult& result);
void emit_csv(const AggregateResult& result, const std::string& path);
// One SVG per metric (mean reward, pct optimal, learned values); returns
// the written paths.
std::vector<std::string> emit_svg(const AggregateResult& result, const std::string& dir);
nlohmann::json metadata_json(const ExperimentConfig& config, const AggregateResult& result);

// The shipped experiment grid.
std::vector<ExperimentConfig> preset_experiments();

// --- regret experiments (experts / adversarial kinds) ---

struct RegretEntry {
    std::string variant;
    std::string sequence;  // loss kind or reward-sequence class
    double measured = 0.0; // regret, worst over the class (experts) or mean (adversarial)
    double se = 0.0;       // across replications where applicable
    double bound = 0.0;
    double eta = 0.0;
    double margin = 0.0;   // bound - measured
};

struct RegretSummary {
    std::string experiment;
    std::vector<RegretEntry> entries;
};

RegretSummary run_regret_experiment(const ExperimentConfig& config, int threads = 0);

struct BoundReport {
    std::vector<RegretEntry> entries;
    bool any_violation = false;
};

BoundReport check_bounds(const ExperimentConfig& config, const RegretSummary& summary);

void emit_regret_csv(const RegretSummary& summary, const std::string& path);

// Reward sequences for full-feedback bound checks, sup-norm capped at K.
enum class RewardSeqKind { UniformRandom, Alternating, SingleSpike, DelayedLeader };
std::vector<std::vector<double>> make_reward_sequence(RewardSeqKind kind, int n, long horizon,
                                                      double bound, std::mt19937_64& rng);

// Compact self-check of the library invariants and bound guarantees.
// Prints one pass/fail line per check; returns the number of failures.
int run_verification(bool fast, std::ostream& out, int threads = 0);

}  // namespace choicebandit
