#include "choicebandit/experts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace choicebandit {

ExpertsLearner::ExpertsLearner(GnlModel model, double eta, double reward_bound)
    : model_(std::move(model)),
      eta_(eta),
      reward_bound_(reward_bound),
      cumulative_(model_.num_alternatives(), 0.0) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    if (!(reward_bound > 0.0)) throw std::invalid_argument("reward bound must be positive");
}

const std::vector<double>& ExpertsLearner::decide() {
    decision_ = choice_probabilities(model_, cumulative_, eta_).values();
    has_decision_ = true;
    return decision_;
}

void ExpertsLearner::observe(const UtilityVector& reward) {
    if (!has_decision_) throw std::logic_error("observe() called before decide()");
    if (reward.size() != cumulative_.size())
        throw std::invalid_argument("reward vector length does not match the model");
    for (double r : reward)
        if (!(std::fabs(r) <= reward_bound_))
            throw std::domain_error("reward exceeds the configured sup-norm bound");
    double gain = 0.0;
    for (size_t i = 0; i < reward.size(); ++i) {
        gain += decision_[i] * reward[i];
        cumulative_[i] += reward[i];
    }
    realized_gain_ += gain;
    ++t_;
    has_decision_ = false;
}

double ExpertsLearner::regret() const {
    const double best = *std::max_element(cumulative_.begin(), cumulative_.end());
    return best - realized_gain_;
}

ExpertsBound experts_regret_bound(const GnlModel& model, double eta, double reward_bound,
                                  long horizon) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    const ModelConstants c = surplus_constants(model);
    const double k2t = reward_bound * reward_bound * static_cast<double>(horizon);
    ExpertsBound b;
    b.at_eta = eta * c.alpha_exact + c.smooth_L * k2t / eta;
    b.optimized = 2.0 * reward_bound *
                  std::sqrt(c.alpha_exact * c.smooth_L * static_cast<double>(horizon));
    b.optimal_eta = c.alpha_exact > 0.0
                        ? reward_bound * std::sqrt(c.smooth_L * static_cast<double>(horizon) /
                                                   c.alpha_exact)
                        : 0.0;
    return b;
}

}  // namespace choicebandit
