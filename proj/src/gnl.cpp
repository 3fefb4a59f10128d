#include "choicebandit/gnl.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "choicebandit/rng.hpp"

namespace choicebandit {

namespace {

constexpr double kShareSumTol = 1e-12;

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

// Shared per-evaluation quantities at scaled utilities w = u/eta.
struct NestEval {
    std::vector<double> v_over_mu;                // nest utility / mu
    std::vector<double> log_nest_prob;
    std::vector<std::vector<double>> log_within;  // aligned with nest members
    double log_g = 0.0;                           // ln G(e^w)
};

NestEval evaluate_nests(const GnlModel& model, const std::vector<double>& w) {
    const auto& nests = model.nests();
    NestEval ev;
    ev.v_over_mu.resize(nests.size());
    ev.log_within.resize(nests.size());
    for (size_t l = 0; l < nests.size(); ++l) {
        const Nest& nest = nests[l];
        const size_t m = nest.members.size();
        auto& lw = ev.log_within[l];
        lw.resize(m);
        double shift = -std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < m; ++k) {
            lw[k] = (w[nest.members[k]] + nest.log_shares[k]) / nest.mu_ell;
            shift = std::max(shift, lw[k]);
        }
        double sum = 0.0;
        for (size_t k = 0; k < m; ++k) sum += std::exp(lw[k] - shift);
        const double lse = shift + std::log(sum);
        for (size_t k = 0; k < m; ++k) lw[k] -= lse;
        ev.v_over_mu[l] = nest.mu_ell * lse / model.mu();
    }
    double shift = -std::numeric_limits<double>::infinity();
    for (double v : ev.v_over_mu) shift = std::max(shift, v);
    double sum = 0.0;
    for (double v : ev.v_over_mu) sum += std::exp(v - shift);
    ev.log_g = shift + std::log(sum);
    ev.log_nest_prob.resize(nests.size());
    for (size_t l = 0; l < nests.size(); ++l)
        ev.log_nest_prob[l] = ev.v_over_mu[l] - ev.log_g;
    return ev;
}

std::vector<double> scaled_utilities(const GnlModel& model, const UtilityVector& u,
                                     double eta) {
    require(eta > 0.0 && std::isfinite(eta), "eta must be positive");
    require(static_cast<int>(u.size()) == model.num_alternatives(),
            "utility vector length does not match the model");
    std::vector<double> w(u.size());
    for (size_t i = 0; i < u.size(); ++i) {
        require(std::isfinite(u[i]), "utility entries must be finite");
        w[i] = u[i] / eta;
    }
    return w;
}

std::vector<double> probabilities_from(const GnlModel& model, const NestEval& ev) {
    const int n = model.num_alternatives();
    std::vector<double> p(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto& ms = model.memberships(i);
        if (ms.size() == 1) {
            const auto [l, k] = ms.front();
            p[i] = std::exp(ev.log_nest_prob[l] + ev.log_within[l][k]);
            continue;
        }
        double shift = -std::numeric_limits<double>::infinity();
        for (const auto& [l, k] : ms)
            shift = std::max(shift, ev.log_nest_prob[l] + ev.log_within[l][k]);
        double sum = 0.0;
        for (const auto& [l, k] : ms)
            sum += std::exp(ev.log_nest_prob[l] + ev.log_within[l][k] - shift);
        p[i] = std::exp(shift) * sum;
    }
    return p;
}

}  // namespace

ProbVector ProbVector::checked(std::vector<double> p) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v > 0.0)) throw std::invalid_argument("probability entries must be positive");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("probabilities must sum to one");
    return ProbVector(std::move(p));
}

GnlModel::GnlModel(int n, double mu, const std::vector<NestSpec>& specs) : n_(n), mu_(mu) {
    require(n >= 1, "model needs at least one alternative");
    require(mu > 0.0 && std::isfinite(mu), "mu must be positive");
    nests_.reserve(specs.size());
    for (const NestSpec& spec : specs) {
        Nest nest;
        nest.id = spec.id;
        nest.mu_ell = spec.mu_ell;
        for (const auto& [arm, share] : spec.alloc) {
            require(arm >= 0 && arm < n, "allocation index out of range");
            require(share >= 0.0 && std::isfinite(share), "shares must be nonnegative");
            if (share == 0.0) continue;  // absent from the nest
            nest.members.push_back(arm);
            nest.shares.push_back(share);
            nest.log_shares.push_back(std::log(share));
        }
        nests_.push_back(std::move(nest));
    }
    validate();
    finalize();
}

void GnlModel::validate() const {
    std::vector<double> share_sum(n_, 0.0);
    std::vector<int> membership_count(n_, 0);
    for (const Nest& nest : nests_) {
        require(nest.mu_ell > 0.0 && std::isfinite(nest.mu_ell),
                "nest scale must be positive");
        require(nest.mu_ell <= mu_ + 1e-15, "nest scale must not exceed mu");
        require(!nest.members.empty(), "nest '" + nest.id + "' has no alternatives");
        for (size_t k = 0; k < nest.members.size(); ++k) {
            share_sum[nest.members[k]] += nest.shares[k];
            ++membership_count[nest.members[k]];
        }
    }
    for (int i = 0; i < n_; ++i) {
        require(membership_count[i] > 0,
                "alternative " + std::to_string(i) + " belongs to no nest");
        require(std::fabs(share_sum[i] - 1.0) <= kShareSumTol,
                "shares of alternative " + std::to_string(i) + " must sum to one");
    }
}

void GnlModel::finalize() {
    memberships_.assign(n_, {});
    min_nest_mu_ = nests_.front().mu_ell;
    for (size_t l = 0; l < nests_.size(); ++l) {
        min_nest_mu_ = std::min(min_nest_mu_, nests_[l].mu_ell);
        for (size_t k = 0; k < nests_[l].members.size(); ++k)
            memberships_[nests_[l].members[k]].emplace_back(static_cast<int>(l),
                                                            static_cast<int>(k));
    }

    is_mnl_ = true;
    for (const Nest& nest : nests_) {
        if (nest.members.size() != 1 || nest.shares[0] != 1.0 || nest.mu_ell != mu_)
            is_mnl_ = false;
    }

    is_nested_partition_ = (mu_ == 1.0);
    nest_of_.assign(n_, -1);
    for (int i = 0; i < n_ && is_nested_partition_; ++i) {
        if (memberships_[i].size() != 1) {
            is_nested_partition_ = false;
            break;
        }
        const auto [l, k] = memberships_[i].front();
        if (std::fabs(nests_[l].shares[k] - 1.0) > kShareSumTol) {
            is_nested_partition_ = false;
            break;
        }
        nest_of_[i] = l;
    }
    if (!is_nested_partition_) nest_of_.assign(n_, -1);

    // Canonical structural hash: nests sorted by member list, then scale.
    std::vector<size_t> order(nests_.size());
    for (size_t l = 0; l < order.size(); ++l) order[l] = l;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (nests_[a].members != nests_[b].members)
            return nests_[a].members < nests_[b].members;
        return nests_[a].mu_ell < nests_[b].mu_ell;
    });
    uint64_t h = derive_seed({0xC401CEBA11ULL, static_cast<uint64_t>(n_), double_bits(mu_)});
    for (size_t l : order) {
        h = mix64(h ^ double_bits(nests_[l].mu_ell));
        for (size_t k = 0; k < nests_[l].members.size(); ++k) {
            h = mix64(h ^ static_cast<uint64_t>(nests_[l].members[k]));
            h = mix64(h ^ double_bits(nests_[l].shares[k]));
        }
    }
    fingerprint_ = h;
}

int GnlModel::nest_of(int alternative) const {
    if (!is_nested_partition_)
        throw std::logic_error("nest_of requires an exclusive-nest model");
    return nest_of_[alternative];
}

GnlModel GnlModel::mnl(int n, double mu) {
    std::vector<NestSpec> specs(static_cast<size_t>(std::max(n, 0)));
    for (int i = 0; i < n; ++i) {
        specs[i].id = std::to_string(i);
        specs[i].mu_ell = mu;
        specs[i].alloc[i] = 1.0;
    }
    return GnlModel(n, mu, specs);
}

GnlModel GnlModel::nested(const std::vector<double>& mu_ell,
                          const std::vector<std::vector<int>>& partition) {
    require(mu_ell.size() == partition.size(),
            "one nest scale per partition cell expected");
    int n = 0;
    for (const auto& cell : partition) n += static_cast<int>(cell.size());
    std::vector<NestSpec> specs(partition.size());
    for (size_t l = 0; l < partition.size(); ++l) {
        specs[l].id = std::to_string(l);
        specs[l].mu_ell = mu_ell[l];
        for (int arm : partition[l]) specs[l].alloc[arm] = 1.0;
    }
    return GnlModel(n, 1.0, specs);
}

GnlModel GnlModel::from_json(const nlohmann::json& spec) {
    require(spec.is_object(), "model spec must be a JSON object");
    if (spec.contains("mnl")) {
        const auto& m = spec.at("mnl");
        require(m.contains("n"), "mnl shorthand needs \"n\"");
        return mnl(m.at("n").get<int>(), m.value("mu", 1.0));
    }
    if (spec.contains("nl")) {
        const auto& m = spec.at("nl");
        require(m.contains("mu_ell") && m.contains("partition"),
                "nl shorthand needs \"mu_ell\" and \"partition\"");
        return nested(m.at("mu_ell").get<std::vector<double>>(),
                      m.at("partition").get<std::vector<std::vector<int>>>());
    }
    require(spec.contains("mu") && spec.contains("nests"),
            "model spec needs \"mu\" and \"nests\" (or a shorthand)");
    std::vector<NestSpec> specs;
    int max_arm = -1;
    for (const auto& nest : spec.at("nests")) {
        NestSpec ns;
        ns.id = nest.value("id", "nest" + std::to_string(specs.size()));
        require(nest.contains("mu_ell"), "nest needs \"mu_ell\"");
        ns.mu_ell = nest.at("mu_ell").get<double>();
        require(nest.contains("alloc"), "nest needs \"alloc\"");
        for (const auto& [key, share] : nest.at("alloc").items()) {
            int arm = -1;
            try {
                arm = std::stoi(key);
            } catch (const std::exception&) {
                throw std::invalid_argument("alloc keys must be alternative indices");
            }
            ns.alloc[arm] = share.get<double>();
            max_arm = std::max(max_arm, arm);
        }
        specs.push_back(std::move(ns));
    }
    const int n = spec.value("n", max_arm + 1);
    return GnlModel(n, spec.at("mu").get<double>(), specs);
}

double generating_value(const GnlModel& model, const std::vector<double>& x) {
    require(static_cast<int>(x.size()) == model.num_alternatives(),
            "argument length does not match the model");
    for (double xi : x)
        if (!(xi > 0.0)) throw std::domain_error("generating function needs positive arguments");
    double g = 0.0;
    for (const Nest& nest : model.nests()) {
        double inner = 0.0;
        for (size_t k = 0; k < nest.members.size(); ++k)
            inner += std::pow(nest.shares[k] * x[nest.members[k]], 1.0 / nest.mu_ell);
        g += std::pow(inner, nest.mu_ell / model.mu());
    }
    return g;
}

double surplus(const GnlModel& model, const UtilityVector& u, double eta) {
    const auto w = scaled_utilities(model, u, eta);
    return eta * model.mu() * evaluate_nests(model, w).log_g;
}

ProbVector choice_probabilities(const GnlModel& model, const UtilityVector& u, double eta) {
    const auto w = scaled_utilities(model, u, eta);
    return ProbVector(probabilities_from(model, evaluate_nests(model, w)));
}

NlTwoStage nl_two_stage(const GnlModel& model, const UtilityVector& u, double eta) {
    if (!model.is_nested_partition())
        throw std::logic_error("two-stage factors require an exclusive-nest model");
    const auto w = scaled_utilities(model, u, eta);
    const NestEval ev = evaluate_nests(model, w);
    NlTwoStage out;
    out.probs = probabilities_from(model, ev);
    out.nest_probs.resize(ev.log_nest_prob.size());
    for (size_t l = 0; l < ev.log_nest_prob.size(); ++l)
        out.nest_probs[l] = std::exp(ev.log_nest_prob[l]);
    out.within.resize(model.num_alternatives());
    for (int i = 0; i < model.num_alternatives(); ++i) {
        const auto [l, k] = model.memberships(i).front();
        out.within[i] = std::exp(ev.log_within[l][k]);
    }
    return out;
}

Matrix prob_jacobian(const GnlModel& model, const UtilityVector& u, double eta) {
    const int n = model.num_alternatives();
    const auto w = scaled_utilities(model, u, eta);
    const NestEval ev = evaluate_nests(model, w);
    const auto p = probabilities_from(model, ev);
    const double inv_mu = 1.0 / model.mu();

    Matrix j(n, n);
    const auto& nests = model.nests();
    for (size_t l = 0; l < nests.size(); ++l) {
        const Nest& nest = nests[l];
        const double np = std::exp(ev.log_nest_prob[l]);
        const double np_over_mu_ell = np / nest.mu_ell;
        const size_t m = nest.members.size();
        for (size_t a = 0; a < m; ++a) {
            const double qa = std::exp(ev.log_within[l][a]);
            const int i = nest.members[a];
            j.at(i, i) += np_over_mu_ell * qa;  // diagonal within-nest term
            for (size_t b = 0; b < m; ++b) {
                const double qb = std::exp(ev.log_within[l][b]);
                j.at(i, nest.members[b]) += (inv_mu - 1.0 / nest.mu_ell) * np * qa * qb;
            }
        }
    }
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) j.at(i, k) -= inv_mu * p[i] * p[k];
    const double inv_eta = 1.0 / eta;
    for (double& v : j.data) v *= inv_eta;
    return j;
}

std::vector<double> prob_jacobian_row(const GnlModel& model, const UtilityVector& u,
                                      double eta, int i) {
    const int n = model.num_alternatives();
    require(i >= 0 && i < n, "row index out of range");
    const auto w = scaled_utilities(model, u, eta);
    const NestEval ev = evaluate_nests(model, w);
    const auto p = probabilities_from(model, ev);
    const double inv_mu = 1.0 / model.mu();

    std::vector<double> row(n, 0.0);
    const auto& nests = model.nests();
    for (const auto& [l, a] : model.memberships(i)) {
        const Nest& nest = nests[l];
        const double np = std::exp(ev.log_nest_prob[l]);
        const double qa = std::exp(ev.log_within[l][a]);
        row[i] += np / nest.mu_ell * qa;
        for (size_t b = 0; b < nest.members.size(); ++b) {
            const double qb = std::exp(ev.log_within[l][b]);
            row[nest.members[b]] += (inv_mu - 1.0 / nest.mu_ell) * np * qa * qb;
        }
    }
    for (int k = 0; k < n; ++k) row[k] -= inv_mu * p[i] * p[k];
    const double inv_eta = 1.0 / eta;
    for (double& v : row) v *= inv_eta;
    return row;
}

double smoothness_constant(const GnlModel& model) {
    return 2.0 / model.min_nest_mu() - 1.0 / model.mu();
}

double diff_consistency_constant(const GnlModel& model) {
    return 1.0 / model.min_nest_mu();
}

ModelConstants surplus_constants(const GnlModel& model) {
    const int n = model.num_alternatives();
    const double log_n = std::log(static_cast<double>(n));
    ModelConstants c;
    c.smooth_L = smoothness_constant(model);
    c.diff_C = diff_consistency_constant(model);
    c.alpha_exact = surplus(model, UtilityVector(n, 0.0), 1.0);
    if (model.is_mnl()) {
        c.alpha_lower = c.alpha_upper = model.mu() * log_n;
    } else if (model.is_nested_partition()) {
        c.alpha_lower = model.min_nest_mu() * log_n;
        c.alpha_upper = log_n;
    } else {
        // Outside the MNL/NL cases the closed-form bounds are not available;
        // fall back to an envelope around the exact value.
        c.alpha_lower = std::min(c.alpha_exact, model.min_nest_mu() * log_n);
        c.alpha_upper = std::max(c.alpha_exact, model.mu() * log_n);
    }
    return c;
}

DiffConsistencyReport check_differential_consistency(const GnlModel& model, double eta,
                                                     long samples, uint64_t rng_seed) {
    require(samples >= 1, "at least one sample required");
    const int n = model.num_alternatives();
    const double h = 1e-4;
    DiffConsistencyReport report;
    report.bound = diff_consistency_constant(model) / eta;
    report.samples = samples;
    report.max_ratio = -std::numeric_limits<double>::infinity();

    SplitMix64 gen(rng_seed);
    UtilityVector u(n);
    for (long s = 0; s < samples; ++s) {
        for (int i = 0; i < n; ++i) u[i] = -50.0 + 50.0 * unit_from_bits(gen.next());
        const ProbVector base = choice_probabilities(model, u, eta);
        for (int i = 0; i < n; ++i) {
            const double saved = u[i];
            u[i] = saved + h;
            const double up = choice_probabilities(model, u, eta)[i];
            u[i] = saved - h;
            const double down = choice_probabilities(model, u, eta)[i];
            u[i] = saved;
            const double second = (up - down) / (2.0 * h);
            const double ratio = second / base[i];
            report.max_ratio = std::max(report.max_ratio, ratio);
            if (ratio > report.bound * (1.0 + report.tolerance)) ++report.violations;
        }
    }
    report.passed = report.violations == 0;
    return report;
}

}  // namespace choicebandit
