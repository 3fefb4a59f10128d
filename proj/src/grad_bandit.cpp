#include "choicebandit/grad_bandit.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "choicebandit/adv_bandit.hpp"

namespace choicebandit {

GradBanditVariant::GradBanditVariant(GradBanditKind k, GnlModel m, double a)
    : kind(k), model(std::move(m)), alpha(a) {
    if (!(alpha > 0.0) && alpha != 0.0)
        throw std::invalid_argument("step size must be nonnegative");
    if (kind == GradBanditKind::ClassicalSoftmax && !model.is_mnl())
        throw std::invalid_argument("the classical update requires an MNL model");
    if (kind == GradBanditKind::NestedLogitClosedForm && !model.is_nested_partition())
        throw std::invalid_argument("the closed-form update requires exclusive nests");
}

void apply_classical_update(std::vector<double>& prefs, const std::vector<double>& probs,
                            int arm, double reward, double baseline, double alpha) {
    const double delta = reward - baseline;
    for (size_t j = 0; j < prefs.size(); ++j) {
        if (static_cast<int>(j) == arm)
            prefs[j] += alpha * delta * (1.0 - probs[j]);
        else
            prefs[j] -= alpha * delta * probs[j];
    }
}

void apply_generic_update(std::vector<double>& prefs, const GnlModel& model,
                          const std::vector<double>& probs, int arm, double reward,
                          double baseline, double alpha) {
    const double delta = reward - baseline;
    const auto row = prob_jacobian_row(model, prefs, 1.0, arm);
    const double inv_p = 1.0 / probs[arm];
    for (size_t j = 0; j < prefs.size(); ++j)
        prefs[j] += alpha * delta * row[j] * inv_p;
}

void apply_nl_update(std::vector<double>& prefs, const GnlModel& model,
                     const std::vector<double>& probs, const std::vector<double>& within,
                     int arm, double reward, double baseline, double alpha) {
    const double delta = reward - baseline;
    const int nest = model.nest_of(arm);
    const double mu_ell = model.nests()[nest].mu_ell;
    const double x_arm = probs[arm];
    const double q_arm = within[arm];
    for (size_t j = 0; j < prefs.size(); ++j) {
        const int jj = static_cast<int>(j);
        if (jj == arm) {
            const double coef =
                (1.0 / mu_ell) * (1.0 - (1.0 - mu_ell) * q_arm - mu_ell * x_arm);
            prefs[j] += alpha * delta * coef;
        } else if (model.nest_of(jj) == nest) {
            const double coef =
                (probs[j] / x_arm) * (x_arm + (1.0 - mu_ell) / mu_ell * q_arm);
            prefs[j] -= alpha * delta * coef;
        } else {
            prefs[j] -= alpha * delta * probs[j];
        }
    }
}

GradBandit::GradBandit(GradBanditVariant variant)
    : variant_(std::move(variant)),
      prefs_(variant_.model.num_alternatives(), 0.0) {}

const std::vector<double>& GradBandit::probabilities() {
    if (!has_probs_) {
        if (variant_.kind == GradBanditKind::NestedLogitClosedForm) {
            NlTwoStage stages = nl_two_stage(variant_.model, prefs_, 1.0);
            probs_ = std::move(stages.probs);
            within_ = std::move(stages.within);
        } else {
            probs_ = choice_probabilities(variant_.model, prefs_, 1.0).values();
        }
        has_probs_ = true;
    }
    return probs_;
}

int GradBandit::sample(double u01) {
    const int arm = sample_from(probabilities(), u01);
    min_sampled_prob_ = std::min(min_sampled_prob_, probs_[arm]);
    return arm;
}

void GradBandit::update(int arm, double reward) {
    if (!has_probs_) throw std::logic_error("update() called before sampling");
    if (arm < 0 || arm >= static_cast<int>(prefs_.size()))
        throw std::out_of_range("arm index out of range");
    if (!std::isfinite(reward)) throw std::invalid_argument("reward must be finite");
    switch (variant_.kind) {
        case GradBanditKind::ClassicalSoftmax:
            apply_classical_update(prefs_, probs_, arm, reward, baseline_.mean,
                                   variant_.alpha);
            break;
        case GradBanditKind::GeneralizedGnl:
            apply_generic_update(prefs_, variant_.model, probs_, arm, reward,
                                 baseline_.mean, variant_.alpha);
            break;
        case GradBanditKind::NestedLogitClosedForm:
            apply_nl_update(prefs_, variant_.model, probs_, within_, arm, reward,
                            baseline_.mean, variant_.alpha);
            break;
    }
    baseline_.add(reward);
    has_probs_ = false;
}

}  // namespace choicebandit
