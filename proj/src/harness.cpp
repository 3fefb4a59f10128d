#include "choicebandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace choicebandit {

namespace {

constexpr long kBlock = 64;  // replications per reduction block, fixed so the
                             // summation order never depends on thread count

constexpr uint64_t kEnvTag = 0xE17;
constexpr uint64_t kSampleTag = 0xA1;
constexpr uint64_t kNoiseTag = 0xB2;
constexpr uint64_t kBanditTag = 0xC3;
constexpr uint64_t kLossTag = 0x10AD;
constexpr uint64_t kSequenceTag = 0x5E9;

void config_error(const std::string& msg) { throw std::invalid_argument(msg); }

int env_arms(EnvFamily family, const StochasticEnv& custom) {
    switch (family) {
        case EnvFamily::Mnl: return 10;
        case EnvFamily::Nl: return 9;
        case EnvFamily::NlLarge: return 25;
        case EnvFamily::Custom: return custom.num_arms();
    }
    return 0;
}

StochasticEnv build_env(const ExperimentConfig& config, long rep) {
    std::mt19937_64 rng(derive_seed({config.seed, static_cast<uint64_t>(rep), kEnvTag}));
    switch (config.env_family) {
        case EnvFamily::Mnl: return make_mnl_env(rng);
        case EnvFamily::Nl: return make_nl_env(rng);
        case EnvFamily::NlLarge: return make_nl_large_env(rng);
        case EnvFamily::Custom: return config.custom_env;
    }
    config_error("unknown environment family");
    return {};
}

GradBandit build_agent(const VariantConfig& variant) {
    if (variant.algorithm == "classical-gb")
        return GradBandit({GradBanditKind::ClassicalSoftmax, variant.model, variant.alpha});
    if (variant.algorithm == "gnl-gb")
        return GradBandit({GradBanditKind::GeneralizedGnl, variant.model, variant.alpha});
    if (variant.algorithm == "nl-gb")
        return GradBandit({GradBanditKind::NestedLogitClosedForm, variant.model,
                           variant.alpha});
    config_error("variant '" + variant.name + "' is not a gradient-bandit algorithm");
    return GradBandit({GradBanditKind::GeneralizedGnl, variant.model, variant.alpha});
}

struct VariantAccum {
    std::vector<double> reward_sum, reward_sumsq;
    std::vector<long> optimal_count;
    std::vector<double> pref_sum, learned_sum;
    double rep_reward_sum = 0.0, rep_reward_sumsq = 0.0;
    double rep_opt_sum = 0.0, rep_opt_sumsq = 0.0;
    long final_opt_count = 0;
    double min_sampled_prob = 1.0;

    VariantAccum(long steps, int arms)
        : reward_sum(steps, 0.0),
          reward_sumsq(steps, 0.0),
          optimal_count(steps, 0),
          pref_sum(arms, 0.0),
          learned_sum(arms, 0.0) {}

    void absorb(const ReplicationSeries& series) {
        const long steps = static_cast<long>(series.reward.size());
        double total = 0.0;
        long optimal_total = 0;
        for (long t = 0; t < steps; ++t) {
            const double r = series.reward[t];
            reward_sum[t] += r;
            reward_sumsq[t] += r * r;
            optimal_count[t] += series.optimal[t];
            total += r;
            optimal_total += series.optimal[t];
        }
        const double avg = total / static_cast<double>(steps);
        const double opt = static_cast<double>(optimal_total) / static_cast<double>(steps);
        rep_reward_sum += avg;
        rep_reward_sumsq += avg * avg;
        rep_opt_sum += opt;
        rep_opt_sumsq += opt * opt;
        final_opt_count += series.optimal[steps - 1];
        min_sampled_prob = std::min(min_sampled_prob, series.min_sampled_prob);
        for (size_t i = 0; i < pref_sum.size(); ++i) {
            pref_sum[i] += series.final_preferences[i];
            learned_sum[i] += series.learned_value[i];
        }
    }

    void merge(const VariantAccum& other) {
        for (size_t t = 0; t < reward_sum.size(); ++t) {
            reward_sum[t] += other.reward_sum[t];
            reward_sumsq[t] += other.reward_sumsq[t];
            optimal_count[t] += other.optimal_count[t];
        }
        for (size_t i = 0; i < pref_sum.size(); ++i) {
            pref_sum[i] += other.pref_sum[i];
            learned_sum[i] += other.learned_sum[i];
        }
        rep_reward_sum += other.rep_reward_sum;
        rep_reward_sumsq += other.rep_reward_sumsq;
        rep_opt_sum += other.rep_opt_sum;
        rep_opt_sumsq += other.rep_opt_sumsq;
        final_opt_count += other.final_opt_count;
        min_sampled_prob = std::min(min_sampled_prob, other.min_sampled_prob);
    }
};

double sample_se(double sum, double sumsq, long count) {
    if (count < 2) return 0.0;
    const double mean = sum / static_cast<double>(count);
    double var = (sumsq - static_cast<double>(count) * mean * mean) /
                 static_cast<double>(count - 1);
    var = std::max(var, 0.0);
    return std::sqrt(var / static_cast<double>(count));
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(block_begin, block_end) over fixed-size replication blocks on a
// small pool; block boundaries do not depend on the pool width.
template <typename Fn>
void for_each_block(long replications, int threads, Fn&& fn) {
    const long blocks = (replications + kBlock - 1) / kBlock;
    std::atomic<long> next{0};
    auto worker = [&] {
        for (;;) {
            const long b = next.fetch_add(1);
            if (b >= blocks) return;
            fn(b, b * kBlock, std::min(replications, (b + 1) * kBlock));
        }
    };
    const int pool =
        std::max(1, static_cast<int>(std::min<long>(resolve_threads(threads), blocks)));
    std::vector<std::thread> team;
    team.reserve(pool - 1);
    for (int i = 1; i < pool; ++i) team.emplace_back(worker);
    worker();
    for (auto& t : team) t.join();
}

}  // namespace

VariantConfig::VariantConfig(std::string name_, std::string algorithm_, GnlModel model_)
    : name(std::move(name_)), algorithm(std::move(algorithm_)), model(std::move(model_)) {}

uint64_t VariantConfig::stream_key() const {
    const double scale = algorithm == "gev-bandit" || algorithm == "experts" ? eta : alpha;
    return derive_seed({model.fingerprint(), double_bits(scale)});
}

int ExperimentConfig::num_arms() const {
    if (kind == ExperimentKind::Stochastic) return env_arms(env_family, custom_env);
    if (variants.empty()) config_error("experiment has no variants");
    return variants.front().model.num_alternatives();
}

ReplicationSeries run_single_replication(const ExperimentConfig& config,
                                         const VariantConfig& variant, long rep) {
    const StochasticEnv env = build_env(config, rep);
    GradBandit agent = build_agent(variant);
    const uint64_t vkey = variant.stream_key();
    const uint64_t rep_u = static_cast<uint64_t>(rep);
    const long steps = config.steps;

    ReplicationSeries series;
    series.reward.resize(steps);
    series.optimal.resize(steps);
    std::vector<double> arm_mean(env.num_arms(), 0.0);
    std::vector<long> arm_count(env.num_arms(), 0);

    for (long t = 0; t < steps; ++t) {
        const uint64_t step_u = static_cast<uint64_t>(t);
        const double u01 =
            uniform_at(derive_seed({config.seed, rep_u, vkey, step_u, kSampleTag}));
        const int arm = agent.sample(u01);
        const double z =
            gaussian_at(derive_seed({config.seed, rep_u, vkey, step_u, kNoiseTag}));
        const double reward = reward_from_gaussian(env, arm, z);
        agent.update(arm, reward);
        series.reward[t] = reward;
        series.optimal[t] = arm == env.optimal_arm ? 1 : 0;
        ++arm_count[arm];
        arm_mean[arm] += (reward - arm_mean[arm]) / static_cast<double>(arm_count[arm]);
    }
    series.final_preferences = agent.preferences();
    series.learned_value = std::move(arm_mean);
    series.min_sampled_prob = agent.min_sampled_probability();
    return series;
}

AggregateResult run_experiment(const ExperimentConfig& config, int threads) {
    if (config.kind != ExperimentKind::Stochastic)
        config_error("run_experiment handles stochastic experiments; see "
                     "run_regret_experiment");
    if (config.steps < 1 || config.replications < 1)
        config_error("steps and replications must be at least 1");
    if (config.variants.empty()) config_error("experiment has no variants");
    const int arms = config.num_arms();
    for (const VariantConfig& v : config.variants) {
        if (v.model.num_alternatives() != arms)
            config_error("variant '" + v.name + "' has " +
                         std::to_string(v.model.num_alternatives()) +
                         " alternatives but the environment has " + std::to_string(arms));
        build_agent(v);  // validates algorithm/model compatibility up front
    }
    for (size_t a = 0; a < config.variants.size(); ++a)
        for (size_t b = a + 1; b < config.variants.size(); ++b)
            if (config.variants[a].name == config.variants[b].name)
                config_error("duplicate variant name '" + config.variants[a].name + "'");

    const long B = config.replications;
    const long T = config.steps;
    const size_t V = config.variants.size();
    const long blocks = (B + kBlock - 1) / kBlock;

    std::vector<std::vector<VariantAccum>> partial(
        blocks, std::vector<VariantAccum>(V, VariantAccum(T, arms)));
    std::vector<std::vector<double>> env_partial(blocks, std::vector<double>(arms, 0.0));

    for_each_block(B, threads, [&](long block, long begin, long end) {
        for (long rep = begin; rep < end; ++rep) {
            const StochasticEnv env = build_env(config, rep);
            for (int i = 0; i < arms; ++i) env_partial[block][i] += env.means[i];
            for (size_t v = 0; v < V; ++v)
                partial[block][v].absorb(
                    run_single_replication(config, config.variants[v], rep));
        }
    });

    std::vector<VariantAccum> total(V, VariantAccum(T, arms));
    std::vector<double> env_means(arms, 0.0);
    for (long b = 0; b < blocks; ++b) {
        for (size_t v = 0; v < V; ++v) total[v].merge(partial[b][v]);
        for (int i = 0; i < arms; ++i) env_means[i] += env_partial[b][i];
    }

    AggregateResult result;
    result.experiment = config.name;
    result.steps = T;
    result.replications = B;
    result.seed = config.seed;
    result.num_arms = arms;
    result.env_mean_reference.resize(arms);
    for (int i = 0; i < arms; ++i)
        result.env_mean_reference[i] = env_means[i] / static_cast<double>(B);

    const double inv_b = 1.0 / static_cast<double>(B);
    for (size_t v = 0; v < V; ++v) {
        const VariantAccum& acc = total[v];
        VariantAggregate out;
        out.name = config.variants[v].name;
        out.mean_reward.resize(T);
        out.reward_se.resize(T);
        out.pct_optimal.resize(T);
        for (long t = 0; t < T; ++t) {
            out.mean_reward[t] = acc.reward_sum[t] * inv_b;
            out.reward_se[t] = sample_se(acc.reward_sum[t], acc.reward_sumsq[t], B);
            out.pct_optimal[t] = static_cast<double>(acc.optimal_count[t]) * inv_b;
        }
        out.final_preferences.resize(arms);
        out.learned_value.resize(arms);
        for (int i = 0; i < arms; ++i) {
            out.final_preferences[i] = acc.pref_sum[i] * inv_b;
            out.learned_value[i] = acc.learned_sum[i] * inv_b;
        }
        out.avg_reward = acc.rep_reward_sum * inv_b;
        out.avg_reward_se = sample_se(acc.rep_reward_sum, acc.rep_reward_sumsq, B);
        out.avg_pct_optimal = acc.rep_opt_sum * inv_b;
        out.avg_pct_optimal_se = sample_se(acc.rep_opt_sum, acc.rep_opt_sumsq, B);
        out.final_pct_optimal = static_cast<double>(acc.final_opt_count) * inv_b;
        out.final_pct_optimal_se =
            std::sqrt(std::max(0.0, out.final_pct_optimal * (1.0 - out.final_pct_optimal)) *
                      inv_b);
        out.min_sampled_prob = acc.min_sampled_prob;
        result.variants.push_back(std::move(out));
    }
    return result;
}

std::vector<std::vector<double>> make_reward_sequence(RewardSeqKind kind, int n,
                                                      long horizon, double bound,
                                                      std::mt19937_64& rng) {
    std::vector<std::vector<double>> seq(static_cast<size_t>(horizon),
                                         std::vector<double>(n, 0.0));
    auto unit = [&rng] { return unit_from_bits(rng()); };
    switch (kind) {
        case RewardSeqKind::UniformRandom:
            for (auto& row : seq)
                for (double& v : row) v = bound * (2.0 * unit() - 1.0);
            break;
        case RewardSeqKind::Alternating: {
            const int a = static_cast<int>(rng() % static_cast<uint64_t>(n));
            const int b = (a + 1 + static_cast<int>(rng() % static_cast<uint64_t>(
                                       std::max(1, n - 1)))) % n;
            for (long t = 0; t < horizon; ++t) {
                seq[t][a] = (t % 2 == 0) ? bound : -bound;
                seq[t][b] = (t % 2 == 0) ? -bound : bound;
            }
            break;
        }
        case RewardSeqKind::SingleSpike: {
            const long when = static_cast<long>(rng() % static_cast<uint64_t>(
                                  std::max<long>(1, horizon)));
            const int arm = static_cast<int>(rng() % static_cast<uint64_t>(n));
            if (horizon > 0) seq[when][arm] = bound;
            break;
        }
        case RewardSeqKind::DelayedLeader: {
            // One arm leads early, another overtakes late; stresses the
            // learner's ability to abandon a stale leader.
            const int early = static_cast<int>(rng() % static_cast<uint64_t>(n));
            const int late = (early + 1) % n;
            const long split = horizon / 2;
            for (long t = 0; t < horizon; ++t) {
                if (t < split) {
                    seq[t][early] = 0.5 * bound;
                } else {
                    seq[t][late] = bound;
                    seq[t][early] = -bound;
                }
            }
            break;
        }
    }
    return seq;
}

namespace {

double run_experts_once(const GnlModel& model, double eta, double bound,
                        const std::vector<std::vector<double>>& rewards) {
    ExpertsLearner learner(model, eta, bound);
    for (const auto& row : rewards) {
        learner.decide();
        learner.observe(row);
    }
    return learner.regret();
}

RegretSummary run_adversarial(const ExperimentConfig& config, int threads) {
    RegretSummary summary;
    summary.experiment = config.name;
    const int n = config.num_arms();
    const long T = config.steps;
    std::vector<std::pair<std::string, LossMatrix>> matrices;
    if (!config.loss_csv.empty()) {
        std::ifstream in(config.loss_csv, std::ios::binary);
        if (!in) config_error("cannot read loss CSV '" + config.loss_csv + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        matrices.emplace_back("csv:" + config.loss_csv, losses_from_csv(buf.str()));
    }
    auto kinds = config.loss_kinds;
    if (kinds.empty() && matrices.empty())
        kinds = {LossKind::UniformRandom, LossKind::SingleBestArm,
                 LossKind::SwitchingBest};
    for (size_t k = 0; k < kinds.size(); ++k) {
        std::mt19937_64 rng(derive_seed({config.seed, kLossTag, static_cast<uint64_t>(k)}));
        matrices.emplace_back(to_string(kinds[k]),
                              make_adversarial_losses(kinds[k], n, T, rng));
    }

    for (const auto& [label, losses] : matrices) {
        if (!losses.empty() && static_cast<int>(losses.front().size()) != n)
            config_error("loss matrix width does not match the variants");
        std::vector<double> cumulative(n, 0.0);
        for (const auto& row : losses)
            for (int i = 0; i < n; ++i) cumulative[i] += row[i];
        const double benchmark = *std::max_element(cumulative.begin(), cumulative.end());

        for (const VariantConfig& variant : config.variants) {
            if (variant.algorithm != "gev-bandit")
                config_error("adversarial experiments expect gev-bandit variants");
            const double eta = variant.eta > 0.0
                                   ? variant.eta
                                   : optimal_bandit_eta(variant.model, n, T);
            const uint64_t vkey =
                derive_seed({variant.model.fingerprint(), double_bits(eta)});
            const long B = config.replications;
            const long blocks = (B + kBlock - 1) / kBlock;
            std::vector<double> block_sum(blocks, 0.0), block_sumsq(blocks, 0.0);
            for_each_block(B, threads, [&](long block, long begin, long end) {
                for (long rep = begin; rep < end; ++rep) {
                    GevBandit agent(variant.model, eta);
                    double collected = 0.0;
                    for (long t = 0; t < T; ++t) {
                        const auto& probs = agent.sampling_distribution();
                        for (int i = 0; i < n; ++i) collected += probs[i] * losses[t][i];
                        const double u01 = uniform_at(derive_seed(
                            {config.seed, static_cast<uint64_t>(rep), vkey,
                             static_cast<uint64_t>(t), kBanditTag}));
                        const int arm = agent.sample(u01);
                        agent.observe(arm, losses[t][arm]);
                    }
                    const double regret = benchmark - collected;
                    block_sum[block] += regret;
                    block_sumsq[block] += regret * regret;
                }
            });
            double sum = 0.0, sumsq = 0.0;
            for (long b = 0; b < blocks; ++b) {
                sum += block_sum[b];
                sumsq += block_sumsq[b];
            }
            RegretEntry entry;
            entry.variant = variant.name;
            entry.sequence = label;
            entry.measured = sum / static_cast<double>(B);
            entry.se = sample_se(sum, sumsq, B);
            entry.eta = eta;
            entry.bound = bandit_regret_bound(variant.model, eta, n, T);
            entry.margin = entry.bound - entry.measured;
            summary.entries.push_back(std::move(entry));
        }
    }
    return summary;
}

RegretSummary run_experts(const ExperimentConfig& config) {
    RegretSummary summary;
    summary.experiment = config.name;
    const int n = config.num_arms();
    const long T = config.steps;
    const double K = config.reward_bound;

    struct SequenceClass {
        std::string label;
        std::vector<std::vector<std::vector<double>>> sequences;
    };
    std::vector<SequenceClass> classes;
    {
        SequenceClass random;
        random.label = "uniform-random";
        for (long s = 0; s < config.replications; ++s) {
            std::mt19937_64 rng(
                derive_seed({config.seed, kSequenceTag, static_cast<uint64_t>(s)}));
            random.sequences.push_back(
                make_reward_sequence(RewardSeqKind::UniformRandom, n, T, K, rng));
        }
        classes.push_back(std::move(random));
        const RewardSeqKind kinds[] = {RewardSeqKind::Alternating,
                                       RewardSeqKind::SingleSpike,
                                       RewardSeqKind::DelayedLeader};
        const char* labels[] = {"alternating", "single-spike", "delayed-leader"};
        for (int k = 0; k < 3; ++k) {
            SequenceClass cls;
            cls.label = labels[k];
            for (long s = 0; s < 4 - (k == 0 ? 0 : 1); ++s) {  // 4 + 3 + 3 sequences
                std::mt19937_64 rng(derive_seed({config.seed, kSequenceTag,
                                                 0xADu + static_cast<uint64_t>(k),
                                                 static_cast<uint64_t>(s)}));
                cls.sequences.push_back(make_reward_sequence(kinds[k], n, T, K, rng));
            }
            classes.push_back(std::move(cls));
        }
    }

    for (const VariantConfig& variant : config.variants) {
        if (variant.algorithm != "experts")
            config_error("full-feedback experiments expect experts variants");
        const ExpertsBound base = experts_regret_bound(variant.model, 1.0, K, T);
        const double eta = variant.eta > 0.0 ? variant.eta
                           : base.optimal_eta > 0.0 ? base.optimal_eta
                                                    : 1.0;
        const ExpertsBound bound = experts_regret_bound(variant.model, eta, K, T);
        for (const SequenceClass& cls : classes) {
            RegretEntry entry;
            entry.variant = variant.name;
            entry.sequence = cls.label;
            entry.eta = eta;
            entry.bound = bound.at_eta;
            double worst = -std::numeric_limits<double>::infinity();
            for (const auto& seq : cls.sequences)
                worst = std::max(worst, run_experts_once(variant.model, eta, K, seq));
            entry.measured = worst;
            entry.margin = entry.bound - entry.measured;
            summary.entries.push_back(std::move(entry));
        }
    }
    return summary;
}

}  // namespace

RegretSummary run_regret_experiment(const ExperimentConfig& config, int threads) {
    if (config.variants.empty()) config_error("experiment has no variants");
    if (config.steps < 0 || config.replications < 1)
        config_error("bad steps/replications");
    switch (config.kind) {
        case ExperimentKind::Adversarial: return run_adversarial(config, threads);
        case ExperimentKind::Experts: return run_experts(config);
        default:
            config_error("run_regret_experiment handles adversarial/experts kinds");
    }
    return {};
}

BoundReport check_bounds(const ExperimentConfig& config, const RegretSummary& summary) {
    (void)config;
    BoundReport report;
    report.entries = summary.entries;
    for (const RegretEntry& e : report.entries)
        if (e.measured > e.bound) report.any_violation = true;
    return report;
}

}  // namespace choicebandit
