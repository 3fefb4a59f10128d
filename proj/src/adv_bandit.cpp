#include "choicebandit/adv_bandit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace choicebandit {

int sample_from(const std::vector<double>& probs, double u01) {
    double cum = 0.0;
    const int n = static_cast<int>(probs.size());
    for (int i = 0; i < n; ++i) {
        cum += probs[i];
        if (u01 < cum) return i;
    }
    return n - 1;  // u01 landed in the rounding slack at the top
}

std::vector<double> estimate_gain(int arm, double value, const std::vector<double>& probs) {
    if (arm < 0 || arm >= static_cast<int>(probs.size()))
        throw std::out_of_range("arm index out of range");
    std::vector<double> gain(probs.size(), 0.0);
    gain[arm] = value / probs[arm];
    return gain;
}

GevBandit::GevBandit(GnlModel model, double eta)
    : model_(std::move(model)), eta_(eta), estimates_(model_.num_alternatives(), 0.0) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
}

const std::vector<double>& GevBandit::sampling_distribution() {
    if (!has_probs_) {
        probs_ = choice_probabilities(model_, estimates_, eta_).values();
        has_probs_ = true;
    }
    return probs_;
}

int GevBandit::sample(double u01) {
    return sample_from(sampling_distribution(), u01);
}

void GevBandit::observe(int arm, double value) {
    if (!has_probs_) throw std::logic_error("observe() called before sampling");
    if (arm < 0 || arm >= model_.num_alternatives())
        throw std::out_of_range("arm index out of range");
    if (!(value >= -1.0 && value <= 0.0))
        throw std::domain_error("observed value escapes the loss-only range [-1, 0]");
    estimates_[arm] += value / probs_[arm];
    ++t_;
    has_probs_ = false;
}

BanditStep GevBandit::step(const std::function<double(long, int)>& env_loss, double u01) {
    BanditStep out;
    out.arm = sample(u01);
    out.value = env_loss(t_, out.arm);
    observe(out.arm, out.value);
    return out;
}

double expected_regret(const std::vector<std::vector<double>>& step_probs,
                       const LossMatrix& losses) {
    if (step_probs.size() != losses.size())
        throw std::invalid_argument("one probability vector per loss row expected");
    if (losses.empty()) return 0.0;
    const size_t n = losses.front().size();
    std::vector<double> cumulative(n, 0.0);
    double collected = 0.0;
    for (size_t t = 0; t < losses.size(); ++t) {
        for (size_t i = 0; i < n; ++i) {
            cumulative[i] += losses[t][i];
            collected += step_probs[t][i] * losses[t][i];
        }
    }
    return *std::max_element(cumulative.begin(), cumulative.end()) - collected;
}

namespace {

double expected_gain_rec(const GnlModel& model, double eta, const LossMatrix& losses,
                         size_t t, UtilityVector& estimates) {
    if (t == losses.size()) return 0.0;
    const auto probs = choice_probabilities(model, estimates, eta).values();
    double gain = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) gain += probs[i] * losses[t][i];
    double value = gain;
    for (size_t a = 0; a < probs.size(); ++a) {
        const double increment = losses[t][a] / probs[a];
        estimates[a] += increment;
        value += probs[a] * expected_gain_rec(model, eta, losses, t + 1, estimates);
        estimates[a] -= increment;
    }
    return value;
}

}  // namespace

double exact_expected_regret(const GnlModel& model, double eta, const LossMatrix& losses) {
    const int n = model.num_alternatives();
    if (losses.empty()) return 0.0;
    std::vector<double> cumulative(n, 0.0);
    for (const auto& row : losses)
        for (int i = 0; i < n; ++i) cumulative[i] += row[i];
    UtilityVector estimates(n, 0.0);
    const double expected_gain = expected_gain_rec(model, eta, losses, 0, estimates);
    return *std::max_element(cumulative.begin(), cumulative.end()) - expected_gain;
}

double bandit_regret_bound(const GnlModel& model, double eta, int n, long horizon) {
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    const double alpha = surplus(model, UtilityVector(model.num_alternatives(), 0.0), 1.0);
    return eta * alpha + static_cast<double>(n) * static_cast<double>(horizon) /
                             (eta * model.min_nest_mu());
}

double optimal_bandit_eta(const GnlModel& model, int n, long horizon) {
    const double alpha = surplus(model, UtilityVector(model.num_alternatives(), 0.0), 1.0);
    if (!(alpha > 0.0)) return 1.0;
    return std::sqrt(static_cast<double>(n) * static_cast<double>(horizon) /
                     (model.min_nest_mu() * alpha));
}

}  // namespace choicebandit
