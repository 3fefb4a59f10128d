#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "choicebandit/gnl.hpp"
#include "choicebandit/rng.hpp"

namespace cbtest {

using choicebandit::GnlModel;
using choicebandit::NestSpec;

inline double unit(std::mt19937_64& rng) {
    return choicebandit::unit_from_bits(rng());
}

// Gumbel(0, 1) draw for the Monte-Carlo choice oracles.
inline double gumbel(std::mt19937_64& rng) {
    double u = unit(rng);
    if (u <= 0.0) u = 1e-300;
    return -std::log(-std::log(u));
}

inline GnlModel random_mnl(std::mt19937_64& rng, int n) {
    return GnlModel::mnl(n, 0.35 + 0.85 * unit(rng));
}

inline GnlModel random_nl(std::mt19937_64& rng, int n) {
    const int cells = 1 + static_cast<int>(rng() % static_cast<uint64_t>(std::max(1, n / 2)));
    std::vector<std::vector<int>> partition(cells);
    for (int i = 0; i < n; ++i)
        partition[static_cast<size_t>(rng() % static_cast<uint64_t>(cells))].push_back(i);
    std::vector<std::vector<int>> filled;
    for (auto& cell : partition)
        if (!cell.empty()) filled.push_back(std::move(cell));
    std::vector<double> mu_ell(filled.size());
    for (double& m : mu_ell) m = 0.45 + 0.55 * unit(rng);
    return GnlModel::nested(mu_ell, filled);
}

// Fractional-share model: every alternative split across two nests.
inline GnlModel random_gnl(std::mt19937_64& rng, int n) {
    const int cells = 2 + static_cast<int>(rng() % 3);
    std::vector<NestSpec> specs(cells);
    double mu_max = 0.0;
    for (int l = 0; l < cells; ++l) {
        specs[l].id = std::to_string(l);
        specs[l].mu_ell = 0.45 + 0.55 * unit(rng);
        mu_max = std::max(mu_max, specs[l].mu_ell);
    }
    for (int i = 0; i < n; ++i) {
        const int a = static_cast<int>(rng() % static_cast<uint64_t>(cells));
        const int b = (a + 1) % cells;
        const double share = 0.2 + 0.6 * unit(rng);
        specs[a].alloc[i] = share;
        specs[b].alloc[i] = 1.0 - share;
    }
    return GnlModel(n, mu_max + 0.3 * unit(rng), specs);
}

inline GnlModel random_model(std::mt19937_64& rng, int max_n) {
    const int n = 2 + static_cast<int>(rng() % static_cast<uint64_t>(max_n - 1));
    switch (rng() % 3) {
        case 0: return random_mnl(rng, n);
        case 1: return random_nl(rng, n);
        default: return random_gnl(rng, n);
    }
}

inline std::vector<double> random_utilities(std::mt19937_64& rng, int n, double cap) {
    std::vector<double> u(n);
    for (double& v : u) v = cap * (2.0 * unit(rng) - 1.0);
    return u;
}

// Direct evaluation of the nest-sum formula with pow/exp only; the
// independent oracle for the log-space implementation.
inline double direct_generating_value(const GnlModel& model, const std::vector<double>& x) {
    double g = 0.0;
    for (const auto& nest : model.nests()) {
        double inner = 0.0;
        for (size_t k = 0; k < nest.members.size(); ++k)
            inner += std::pow(nest.shares[k] * x[nest.members[k]], 1.0 / nest.mu_ell);
        g += std::pow(inner, nest.mu_ell / model.mu());
    }
    return g;
}

}  // namespace cbtest
