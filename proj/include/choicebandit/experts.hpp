#pragma once

#include <utility>
#include <vector>

#include "choicebandit/gnl.hpp"

namespace choicebandit {

// Full-feedback learner: play the choice probabilities of the smoothed
// surplus at the cumulative reward vector, observe the whole reward
// vector, accumulate.
class ExpertsLearner {
  public:
    // reward_bound is the sup-norm cap K on observed reward vectors.
    ExpertsLearner(GnlModel model, double eta, double reward_bound);

    // x_t evaluated at the current cumulative rewards. Valid until the
    // next observe().
    const std::vector<double>& decide();

    // Accumulates the reward vector and the realized gain <x_t, u_t>.
    // Requires a preceding decide(); rejects ||u||_inf > K.
    void observe(const UtilityVector& reward);

    // max_i U_T^(i) - realized gain; the simplex maximum sits at a vertex.
    double regret() const;

    long steps() const { return t_; }
    double realized_gain() const { return realized_gain_; }
    const UtilityVector& cumulative_rewards() const { return cumulative_; }
    const GnlModel& model() const { return model_; }
    double eta() const { return eta_; }
    double reward_bound() const { return reward_bound_; }

  private:
    GnlModel model_;
    double eta_;
    double reward_bound_;
    UtilityVector cumulative_;
    std::vector<double> decision_;
    bool has_decision_ = false;
    double realized_gain_ = 0.0;
    long t_ = 0;
};

struct ExpertsBound {
    double at_eta = 0.0;      // eta*alpha + L*K^2*T/eta
    double optimized = 0.0;   // 2*K*sqrt(alpha*L*T)
    double optimal_eta = 0.0; // K*sqrt(L*T/alpha)
};

// Regret guarantee constants for a horizon T with rewards capped at K;
// alpha is the exact surplus at zero, L the smoothness estimate.
ExpertsBound experts_regret_bound(const GnlModel& model, double eta, double reward_bound,
                                  long horizon);

}  // namespace choicebandit
