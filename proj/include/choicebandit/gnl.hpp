#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace choicebandit {

// Deterministic utilities / cumulative rewards / preferences.
using UtilityVector = std::vector<double>;

// A point in the relative interior of the probability simplex.
class ProbVector {
  public:
    ProbVector() = default;
    explicit ProbVector(std::vector<double> p) : p_(std::move(p)) {}

    // Throws if any entry is nonpositive or the entries do not sum to 1
    // within 1e-12.
    static ProbVector checked(std::vector<double> p);

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[i]; }
    const std::vector<double>& values() const { return p_; }

  private:
    std::vector<double> p_;
};

struct Nest {
    std::string id;
    double mu_ell = 1.0;
    std::vector<int> members;       // alternatives with share > 0, ascending
    std::vector<double> shares;     // aligned with members
    std::vector<double> log_shares;
};

struct NestSpec {
    std::string id;
    double mu_ell = 1.0;
    std::map<int, double> alloc;  // alternative index -> share
};

// Generalized nested logit choice model: top-level scale mu, nests with
// scales mu_ell <= mu and allocation shares that sum to one per
// alternative. Immutable after construction; all evaluations are pure.
class GnlModel {
  public:
    GnlModel(int n, double mu, const std::vector<NestSpec>& nests);

    // One singleton nest per alternative, every nest scale equal to mu.
    static GnlModel mnl(int n, double mu);
    // Exclusive nests covering {0..n-1}; mu fixed to 1.
    static GnlModel nested(const std::vector<double>& mu_ell,
                           const std::vector<std::vector<int>>& partition);
    // Accepts the full form {"mu":..,"nests":[..]} and the shorthands
    // {"mnl":{"n":..,"mu":..}} and {"nl":{"mu_ell":[..],"partition":[[..],..]}}.
    static GnlModel from_json(const nlohmann::json& spec);

    int num_alternatives() const { return n_; }
    double mu() const { return mu_; }
    const std::vector<Nest>& nests() const { return nests_; }
    double min_nest_mu() const { return min_nest_mu_; }

    // Singleton share-1 nests, every mu_ell == mu.
    bool is_mnl() const { return is_mnl_; }
    // Exclusive 0/1 shares and mu == 1.
    bool is_nested_partition() const { return is_nested_partition_; }
    int nest_of(int alternative) const;  // requires is_nested_partition()

    // Hash of the canonical structure (n, mu, sorted nests with members,
    // shares and scales; ids excluded). Equal fingerprints mean equal
    // sampling behavior.
    uint64_t fingerprint() const { return fingerprint_; }

    // (nest index, member position) pairs per alternative.
    const std::vector<std::pair<int, int>>& memberships(int alternative) const {
        return memberships_[alternative];
    }

  private:
    void validate() const;
    void finalize();

    int n_ = 0;
    double mu_ = 1.0;
    std::vector<Nest> nests_;
    std::vector<std::vector<std::pair<int, int>>> memberships_;
    double min_nest_mu_ = 1.0;
    bool is_mnl_ = false;
    bool is_nested_partition_ = false;
    std::vector<int> nest_of_;
    uint64_t fingerprint_ = 0;
};

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}
    double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

// Model constants that enter the regret bounds.
struct ModelConstants {
    double smooth_L = 0.0;      // strong-smoothness estimate
    double diff_C = 0.0;        // differential-consistency constant
    double alpha_exact = 0.0;   // surplus at zero utilities
    double alpha_lower = 0.0;
    double alpha_upper = 0.0;
};

struct DiffConsistencyReport {
    double max_ratio = 0.0;  // max over samples/coords of (d2 surplus)/(d surplus)
    double bound = 0.0;      // diff_consistency_constant / eta
    double tolerance = 1e-3;
    long samples = 0;
    long violations = 0;
    bool passed = false;
};

// G(x) = sum_l (sum_i (sigma_il x_i)^{1/mu_l})^{mu_l/mu}, direct evaluation.
// Throws std::domain_error when any x_i <= 0.
double generating_value(const GnlModel& model, const std::vector<double>& x);

// Perspective-smoothed surplus eta * mu * ln G(e^{u/eta}), evaluated
// nest-wise in log space with max shifts.
double surplus(const GnlModel& model, const UtilityVector& u, double eta);

// Two-stage GNL probabilities at utilities u/eta.
ProbVector choice_probabilities(const GnlModel& model, const UtilityVector& u, double eta);

// Factored probabilities for exclusive-nest models: overall P_i, the nest
// distribution and the within-nest conditionals.
struct NlTwoStage {
    std::vector<double> probs;
    std::vector<double> nest_probs;  // one per nest
    std::vector<double> within;      // per alternative, conditional on its nest
};
NlTwoStage nl_two_stage(const GnlModel& model, const UtilityVector& u, double eta);

// Analytic Jacobian d P_i / d u_j of choice_probabilities; symmetric with
// zero row sums.
Matrix prob_jacobian(const GnlModel& model, const UtilityVector& u, double eta);

// Single row i of prob_jacobian.
std::vector<double> prob_jacobian_row(const GnlModel& model, const UtilityVector& u,
                                      double eta, int i);

// 2/min_l mu_l - 1/mu; equals 1/mu for a pure MNL model.
double smoothness_constant(const GnlModel& model);

// 1/min_l mu_l.
double diff_consistency_constant(const GnlModel& model);

ModelConstants surplus_constants(const GnlModel& model);

// Finite-difference sweep of the diagonal second derivatives of the
// smoothed surplus over U drawn uniformly from [-50, 0)^n; the ratio to
// the first derivative must stay below diff_consistency_constant/eta.
DiffConsistencyReport check_differential_consistency(const GnlModel& model, double eta,
                                                     long samples, uint64_t rng_seed);

}  // namespace choicebandit
