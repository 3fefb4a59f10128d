#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "choicebandit/harness.hpp"

namespace choicebandit {

namespace {

GnlModel random_verify_model(std::mt19937_64& rng, int max_n) {
    const int n = 2 + static_cast<int>(rng() % static_cast<uint64_t>(max_n - 1));
    auto unit = [&rng] { return unit_from_bits(rng()); };
    const int flavor = static_cast<int>(rng() % 3);
    if (flavor == 0) return GnlModel::mnl(n, 0.3 + 0.7 * unit());
    if (flavor == 1) {
        const int cells = 1 + static_cast<int>(rng() % 3);
        std::vector<std::vector<int>> partition(cells);
        for (int i = 0; i < n; ++i) partition[i % cells].push_back(i);
        std::vector<double> mu_ell(cells);
        for (double& m : mu_ell) m = 0.45 + 0.55 * unit();
        return GnlModel::nested(mu_ell, partition);
    }
    // Overlapping shares: every arm split across two nests.
    const int cells = 2 + static_cast<int>(rng() % 2);
    std::vector<NestSpec> specs(cells);
    double mu_max = 0.0;
    for (int l = 0; l < cells; ++l) {
        specs[l].id = std::to_string(l);
        specs[l].mu_ell = 0.45 + 0.55 * unit();
        mu_max = std::max(mu_max, specs[l].mu_ell);
    }
    for (int i = 0; i < n; ++i) {
        const int a = static_cast<int>(rng() % static_cast<uint64_t>(cells));
        const int b = (a + 1) % cells;
        const double share = 0.2 + 0.6 * unit();
        specs[a].alloc[i] = share;
        specs[b].alloc[i] = 1.0 - share;
    }
    return GnlModel(n, mu_max + 0.2 * unit(), specs);
}

struct Check {
    std::string name;
    std::function<bool(std::string&)> run;
};

}  // namespace

int run_verification(bool fast, std::ostream& out, int threads) {
    const int scale = fast ? 1 : 4;
    std::vector<Check> checks;

    checks.push_back({"gradient identity (probabilities match surplus differences)",
                      [&](std::string& detail) {
        std::mt19937_64 rng(101);
        double worst = 0.0;
        for (int m = 0; m < 50 * scale; ++m) {
            const GnlModel model = random_verify_model(rng, 12);
            const int n = model.num_alternatives();
            UtilityVector u(n);
            for (double& v : u) v = 100.0 * unit_from_bits(rng()) - 50.0;
            const auto probs = choice_probabilities(model, u, 1.0);
            const double h = 1e-5;
            for (int i = 0; i < n; ++i) {
                const double saved = u[i];
                u[i] = saved + h;
                const double up = surplus(model, u, 1.0);
                u[i] = saved - h;
                const double down = surplus(model, u, 1.0);
                u[i] = saved;
                worst = std::max(worst, std::fabs((up - down) / (2.0 * h) - probs[i]));
            }
        }
        detail = "max component error " + std::to_string(worst);
        return worst < 1e-6;
    }});

    checks.push_back({"differential consistency (second/first derivative ratio)",
                      [&](std::string& detail) {
        std::mt19937_64 rng(202);
        double worst_excess = -1e9;
        for (int m = 0; m < 3 * scale; ++m) {
            const GnlModel model = random_verify_model(rng, 8);
            const auto report =
                check_differential_consistency(model, 1.0, 100 * scale, rng());
            worst_excess = std::max(worst_excess, report.max_ratio - report.bound);
            if (!report.passed) return false;
        }
        detail = "worst ratio excess " + std::to_string(worst_excess);
        return true;
    }});

    checks.push_back({"full-feedback regret bound", [&](std::string& detail) {
        ExperimentConfig config;
        config.name = "verify-experts";
        config.kind = ExperimentKind::Experts;
        config.steps = 400 * scale;
        config.replications = 10 * scale;  // random sequences
        config.seed = 11;
        config.reward_bound = 1.0;
        config.variants.emplace_back("mnl", "experts", GnlModel::mnl(10, 1.0));
        config.variants.emplace_back(
            "nl", "experts",
            GnlModel::nested({0.5, 0.5}, {{0, 1, 2, 3, 4}, {5, 6, 7, 8, 9}}));
        const RegretSummary summary = run_regret_experiment(config, threads);
        const BoundReport report = check_bounds(config, summary);
        double worst_margin = 1e300;
        for (const RegretEntry& e : report.entries) worst_margin = std::min(worst_margin, e.margin);
        detail = "smallest margin " + std::to_string(worst_margin);
        return !report.any_violation;
    }});

    checks.push_back({"estimated-reward sampler matches exponential weights",
                      [&](std::string& detail) {
        const GnlModel model = GnlModel::mnl(6, 1.0);
        const double eta = 2.0;
        GevBandit bandit(model, eta);
        std::mt19937_64 rng(33);
        double worst = 0.0;
        for (int t = 0; t < 200 * scale; ++t) {
            const auto& probs = bandit.sampling_distribution();
            const auto& est = bandit.estimated_cumulative();
            double denom = 0.0;
            std::vector<double> ref(est.size());
            const double m = *std::max_element(est.begin(), est.end());
            for (size_t i = 0; i < est.size(); ++i) {
                ref[i] = std::exp((est[i] - m) / (model.mu() * eta));
                denom += ref[i];
            }
            for (size_t i = 0; i < est.size(); ++i)
                worst = std::max(worst, std::fabs(probs[i] - ref[i] / denom));
            const int arm = bandit.sample(rng);
            bandit.observe(arm, -unit_from_bits(rng()));
        }
        detail = "max distribution gap " + std::to_string(worst);
        return worst < 1e-12;
    }});

    checks.push_back({"adversarial expected-regret bound", [&](std::string& detail) {
        ExperimentConfig config;
        config.name = "verify-adv";
        config.kind = ExperimentKind::Adversarial;
        config.steps = 300 * scale;
        config.replications = 40 * scale;
        config.seed = 12;
        config.loss_kinds = {LossKind::UniformRandom, LossKind::SingleBestArm};
        config.variants.emplace_back("mnl", "gev-bandit", GnlModel::mnl(5, 1.0));
        config.variants.emplace_back("nl", "gev-bandit",
                                     GnlModel::nested({0.5, 0.5}, {{0, 1, 2}, {3, 4}}));
        const RegretSummary summary = run_regret_experiment(config, threads);
        const BoundReport report = check_bounds(config, summary);
        double worst_margin = 1e300;
        for (const RegretEntry& e : report.entries) worst_margin = std::min(worst_margin, e.margin);
        detail = "smallest margin " + std::to_string(worst_margin);
        return !report.any_violation;
    }});

    checks.push_back({"singleton-nest learner reduces to the softmax learner",
                      [&](std::string& detail) {
        const int n = 6;
        GradBandit classical({GradBanditKind::ClassicalSoftmax, GnlModel::mnl(n, 1.0), 0.1});
        std::vector<std::vector<int>> cells(n);
        for (int i = 0; i < n; ++i) cells[i] = {i};
        GradBandit trivial(
            {GradBanditKind::NestedLogitClosedForm,
             GnlModel::nested(std::vector<double>(n, 1.0), cells), 0.1});
        std::mt19937_64 rng(44);
        double worst = 0.0;
        for (int t = 0; t < 200 * scale; ++t) {
            const double u01 = unit_from_bits(rng());
            const int a = classical.sample(u01);
            const int b = trivial.sample(u01);
            if (a != b) return false;
            const double reward = 2.0 * unit_from_bits(rng()) - 1.0;
            classical.update(a, reward);
            trivial.update(b, reward);
            for (int i = 0; i < n; ++i)
                worst = std::max(worst, std::fabs(classical.preferences()[i] -
                                                  trivial.preferences()[i]));
        }
        detail = "max preference divergence " + std::to_string(worst);
        return worst == 0.0;
    }});

    checks.push_back({"closed-form update equals the Jacobian update",
                      [&](std::string& detail) {
        std::mt19937_64 rng(55);
        const GnlModel model =
            GnlModel::nested({0.4, 0.7, 0.9}, {{0, 1, 2}, {3, 4}, {5, 6, 7}});
        double worst = 0.0;
        for (int s = 0; s < 300 * scale; ++s) {
            UtilityVector prefs(8);
            for (double& v : prefs) v = 4.0 * unit_from_bits(rng()) - 2.0;
            const auto stages = nl_two_stage(model, prefs, 1.0);
            const int arm = static_cast<int>(rng() % 8);
            const double reward = 3.0 * unit_from_bits(rng()) - 1.0;
            auto a = prefs, b = prefs;
            apply_nl_update(a, model, stages.probs, stages.within, arm, reward, 0.25, 0.1);
            apply_generic_update(b, model, stages.probs, arm, reward, 0.25, 0.1);
            for (int i = 0; i < 8; ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
        }
        detail = "max update gap " + std::to_string(worst);
        return worst < 1e-9;
    }});

    checks.push_back({"importance-weighted estimator is unbiased", [&](std::string& detail) {
        std::mt19937_64 rng(66);
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const int n = 2 + static_cast<int>(rng() % 8);
            std::vector<double> p(n), u(n);
            double sum = 0.0;
            for (double& v : p) sum += (v = 0.05 + unit_from_bits(rng()));
            for (double& v : p) v /= sum;
            for (double& v : u) v = -unit_from_bits(rng());
            std::vector<double> expectation(n, 0.0);
            for (int i = 0; i < n; ++i) {
                const auto gain = estimate_gain(i, u[i], p);
                for (int j = 0; j < n; ++j) expectation[j] += p[i] * gain[j];
            }
            for (int j = 0; j < n; ++j)
                worst = std::max(worst, std::fabs(expectation[j] - u[j]));
        }
        detail = "max expectation gap " + std::to_string(worst);
        return worst < 1e-12;
    }});

    checks.push_back({"expected regret matches exhaustive path enumeration",
                      [&](std::string& detail) {
        const GnlModel model = GnlModel::mnl(2, 1.0);
        const double eta = 1.5;
        const LossMatrix losses = {{-0.3, -0.9}, {-0.8, -0.1}, {-0.5, -0.4}};
        const double lib = exact_expected_regret(model, eta, losses);
        // Independent route: plain softmax recursion, no library calls.
        std::function<double(size_t, std::vector<double>)> walk =
            [&](size_t t, std::vector<double> est) -> double {
            if (t == losses.size()) return 0.0;
            const double m = std::max(est[0], est[1]);
            const double w0 = std::exp((est[0] - m) / eta);
            const double w1 = std::exp((est[1] - m) / eta);
            const double p0 = w0 / (w0 + w1), p1 = w1 / (w0 + w1);
            double value = p0 * losses[t][0] + p1 * losses[t][1];
            auto e0 = est, e1 = est;
            e0[0] += losses[t][0] / p0;
            e1[1] += losses[t][1] / p1;
            return value + p0 * walk(t + 1, e0) + p1 * walk(t + 1, e1);
        };
        double best = -1e300;
        for (int i = 0; i < 2; ++i) {
            double cum = 0.0;
            for (const auto& row : losses) cum += row[i];
            best = std::max(best, cum);
        }
        const double ref = best - walk(0, {0.0, 0.0});
        detail = "difference " + std::to_string(std::fabs(lib - ref));
        return std::fabs(lib - ref) < 1e-12;
    }});

    checks.push_back({"seeded runs are byte deterministic", [&](std::string& detail) {
        ExperimentConfig config;
        config.name = "verify-determinism";
        config.kind = ExperimentKind::Stochastic;
        config.env_family = EnvFamily::Nl;
        config.steps = 60;
        config.replications = 50;
        config.seed = 99;
        config.variants.push_back(
            VariantConfig("mnl-gb", "classical-gb", GnlModel::mnl(9, 1.0)));
        config.variants.push_back(VariantConfig(
            "nl", "nl-gb",
            GnlModel::nested({0.45, 0.45, 0.45}, {{0, 3, 4}, {1, 5, 6}, {2, 7, 8}})));
        const std::string a = csv_text(run_experiment(config, 1));
        const std::string b = csv_text(run_experiment(config, 2));
        detail = a == b ? "identical bytes" : "outputs differ";
        return a == b;
    }});

    int failures = 0;
    for (const Check& check : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = check.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        out << (ok ? "PASS" : "FAIL") << " — " << check.name;
        if (!detail.empty()) out << " (" << detail << ")";
        out << '\n';
        if (!ok) ++failures;
    }
    out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
        << '\n';
    return failures;
}

}  // namespace choicebandit
