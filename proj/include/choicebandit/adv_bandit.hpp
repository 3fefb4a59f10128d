#pragma once

#include <functional>
#include <vector>

#include "choicebandit/gnl.hpp"
#include "choicebandit/rng.hpp"

namespace choicebandit {

// Loss matrices are step-major: losses[t][arm], every entry in [-1, 0].
using LossMatrix = std::vector<std::vector<double>>;

// Inverse-CDF draw from a probability vector with a single uniform.
int sample_from(const std::vector<double>& probs, double u01);

// Importance-weighted gain vector: zero except coordinate `arm`, which
// holds value / probs[arm].
std::vector<double> estimate_gain(int arm, double value, const std::vector<double>& probs);

struct BanditStep {
    int arm = -1;
    double value = 0.0;
};

// Adversarial bandit on estimated cumulative rewards: sample from the
// GNL probabilities at U_hat, observe one loss in [-1, 0], importance
// weight it back into U_hat.
class GevBandit {
  public:
    GevBandit(GnlModel model, double eta);

    // Sampling distribution at the current estimates; cached for the
    // estimator until the next observe().
    const std::vector<double>& sampling_distribution();

    int sample(double u01);
    template <typename Urbg>
    int sample(Urbg& rng) {
        return sample(static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }

    // Validates value in [-1, 0], applies the importance-weighted update.
    void observe(int arm, double value);

    // sample -> observe with the loss supplied by env_loss(t, arm).
    BanditStep step(const std::function<double(long, int)>& env_loss, double u01);

    long steps() const { return t_; }
    const UtilityVector& estimated_cumulative() const { return estimates_; }
    const GnlModel& model() const { return model_; }
    double eta() const { return eta_; }

  private:
    GnlModel model_;
    double eta_;
    UtilityVector estimates_;
    std::vector<double> probs_;
    bool has_probs_ = false;
    long t_ = 0;
};

// max_i sum_t losses[t][i] - sum_t <step_probs[t], losses[t]> for one
// recorded run against a fixed (oblivious) loss matrix.
double expected_regret(const std::vector<std::vector<double>>& step_probs,
                       const LossMatrix& losses);

// Exact expectation by enumerating every arm path; exponential in T, for
// small instances only.
double exact_expected_regret(const GnlModel& model, double eta, const LossMatrix& losses);

// eta * surplus(0) + n*T / (eta * min_l mu_l).
double bandit_regret_bound(const GnlModel& model, double eta, int n, long horizon);

// Minimizer of the bound above: sqrt(n*T / (min_l mu_l * surplus(0))).
double optimal_bandit_eta(const GnlModel& model, int n, long horizon);

}  // namespace choicebandit
