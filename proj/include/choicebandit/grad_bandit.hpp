#pragma once

#include <vector>

#include "choicebandit/gnl.hpp"

namespace choicebandit {

// Incremental sample mean, used as the reward baseline.
struct RunningMean {
    double mean = 0.0;
    long count = 0;
    void add(double value) {
        ++count;
        mean += (value - mean) / static_cast<double>(count);
    }
};

enum class GradBanditKind {
    ClassicalSoftmax,        // softmax probabilities, textbook update
    GeneralizedGnl,          // probability-Jacobian update, any GNL model
    NestedLogitClosedForm,   // three-case closed form, exclusive nests
};

struct GradBanditVariant {
    GradBanditKind kind;
    GnlModel model;
    double alpha = 0.1;

    GradBanditVariant(GradBanditKind k, GnlModel m, double a);
};

// Softmax update: played arm gains alpha*(R - baseline)*(1 - x_i), every
// other arm loses alpha*(R - baseline)*x_j.
void apply_classical_update(std::vector<double>& prefs, const std::vector<double>& probs,
                            int arm, double reward, double baseline, double alpha);

// Jacobian update: prefs_j += alpha*(R - baseline)*J[arm, j]/x_arm with J
// the probability Jacobian at the current preferences.
void apply_generic_update(std::vector<double>& prefs, const GnlModel& model,
                          const std::vector<double>& probs, int arm, double reward,
                          double baseline, double alpha);

// Closed-form nested-logit update: one case for the played arm, one for
// unplayed arms sharing its nest, one for arms in other nests.
void apply_nl_update(std::vector<double>& prefs, const GnlModel& model,
                     const std::vector<double>& probs, const std::vector<double>& within,
                     int arm, double reward, double baseline, double alpha);

// Preference learner over a GNL sampling distribution. One step is
// sample() followed by update(); the update always consumes the
// distribution recorded by the sample and the pre-update baseline.
class GradBandit {
  public:
    explicit GradBandit(GradBanditVariant variant);

    const std::vector<double>& probabilities();
    int sample(double u01);
    template <typename Urbg>
    int sample(Urbg& rng) {
        return sample(static_cast<double>(rng() >> 11) * 0x1.0p-53);
    }
    void update(int arm, double reward);

    const std::vector<double>& preferences() const { return prefs_; }
    double baseline() const { return baseline_.mean; }
    long steps() const { return baseline_.count; }
    double min_sampled_probability() const { return min_sampled_prob_; }
    const GradBanditVariant& variant() const { return variant_; }

  private:
    GradBanditVariant variant_;
    std::vector<double> prefs_;
    RunningMean baseline_;
    std::vector<double> probs_;
    std::vector<double> within_;  // nested-logit conditionals, when applicable
    bool has_probs_ = false;
    double min_sampled_prob_ = 1.0;
};

}  // namespace choicebandit
