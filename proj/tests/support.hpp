#ifndef HETMIX_TESTS_SUPPORT_HPP
#define HETMIX_TESTS_SUPPORT_HPP

// Shared fixtures: random models, and a plain-arithmetic reference for the
// mixture likelihood that uses no code from the library beyond its types.

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hetmix/mixture.hpp"

namespace hetmix::testing {

inline VariableSchema real_var(std::string name, Role role = Role::Input) {
    return {std::move(name), VariableKind::ContinuousReal, {}, {}, role};
}
inline VariableSchema nonneg_var(std::string name, Role role = Role::Input) {
    return {std::move(name), VariableKind::ContinuousNonnegative, {}, {}, role};
}
inline VariableSchema ordinal_var(std::string name, std::vector<int> levels, Role role = Role::Input) {
    return {std::move(name), VariableKind::Ordinal, std::move(levels), {}, role};
}
inline VariableSchema categorical_var(std::string name, std::vector<std::string> symbols, Role role = Role::Input) {
    return {std::move(name), VariableKind::Categorical, {}, std::move(symbols), role};
}

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline VariableSchema random_schema(Rng& rng, std::size_t index) {
    const std::string name = "v" + std::to_string(index);
    const Role role = index % 2 ? Role::Outcome : Role::Input;
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: return real_var(name, role);
        case 1: return nonneg_var(name, role);
        case 2: {
            const int first = std::uniform_int_distribution<int>(-2, 3)(rng);
            const int count = std::uniform_int_distribution<int>(2, 5)(rng);
            std::vector<int> levels;
            for (int i = 0; i < count; ++i) levels.push_back(first + i + (i > 1 ? 1 : 0));
            return ordinal_var(name, levels, role);
        }
        default: {
            const int count = std::uniform_int_distribution<int>(2, 4)(rng);
            std::vector<std::string> symbols;
            for (int i = 0; i < count; ++i) symbols.push_back(std::string(1, static_cast<char>('a' + i)));
            return categorical_var(name, symbols, role);
        }
    }
}

inline FamilyParams random_params(const VariableSchema& schema, Rng& rng) {
    switch (schema.kind) {
        case VariableKind::ContinuousReal: return GaussianParams{uniform(rng, -3, 3), uniform(rng, 0.2, 4)};
        case VariableKind::ContinuousNonnegative:
            return InflatedGammaParams{uniform(rng, 0, 0.6), uniform(rng, 0.3, 3), uniform(rng, 0.5, 5)};
        case VariableKind::Ordinal:
            return QuantizedGaussianParams{uniform(rng, schema.levels.front() - 1.0, schema.levels.back() + 1.0),
                                           uniform(rng, 0.3, 6), schema.levels};
        case VariableKind::Categorical: {
            Eigen::VectorXd p(static_cast<Eigen::Index>(schema.symbols.size()));
            for (auto& x : p) x = uniform(rng, 0.05, 1);
            return CategoricalParams{p / p.sum()};
        }
    }
    return GaussianParams{};
}

inline MixtureModel random_model(Rng& rng, std::size_t order, std::vector<VariableSchema> schemas) {
    MixtureModel m;
    m.schemas = std::move(schemas);
    const auto Z = static_cast<Eigen::Index>(order);
    const auto V = static_cast<Eigen::Index>(m.schemas.size());
    m.weights.resize(Z);
    for (auto& w : m.weights) w = uniform(rng, 0.1, 1);
    m.weights /= m.weights.sum();
    m.missing_prob.resize(Z, V);
    for (Eigen::Index z = 0; z < Z; ++z)
        for (Eigen::Index v = 0; v < V; ++v) m.missing_prob(z, v) = uniform(rng, 0, 0.5);
    for (std::size_t z = 0; z < order; ++z)
        for (const auto& s : m.schemas) m.params.push_back(random_params(s, rng));
    return m;
}

inline MixtureModel random_model(Rng& rng, std::size_t order, std::size_t variables) {
    std::vector<VariableSchema> schemas;
    for (std::size_t v = 0; v < variables; ++v) schemas.push_back(random_schema(rng, v));
    return random_model(rng, order, std::move(schemas));
}

// A row with roughly `missing_rate` missing cells and in-domain observations,
// not necessarily drawn from the model.
inline std::vector<Value> random_row(const MixtureModel& m, Rng& rng, double missing_rate = 0.25) {
    std::vector<Value> row;
    for (const auto& s : m.schemas) {
        if (uniform(rng, 0, 1) < missing_rate) {
            row.emplace_back(Missing{});
            continue;
        }
        switch (s.kind) {
            case VariableKind::ContinuousReal: row.emplace_back(Real{uniform(rng, -4, 4)}); break;
            case VariableKind::ContinuousNonnegative:
                row.emplace_back(Nonnegative{uniform(rng, 0, 1) < 0.3 ? 0.0 : uniform(rng, 0.01, 6)});
                break;
            case VariableKind::Ordinal: {
                const auto i = std::uniform_int_distribution<std::size_t>(0, s.levels.size() - 1)(rng);
                row.emplace_back(OrdinalLevel{s.levels[i]});
                break;
            }
            case VariableKind::Categorical:
                row.emplace_back(Category{std::uniform_int_distribution<std::size_t>(0, s.symbols.size() - 1)(rng)});
                break;
        }
    }
    return row;
}

namespace oracle {

// Density (or mass) of an observed cell, written out from the family formulas.
inline double density(const FamilyParams& params, const Value& x) {
    if (const auto* g = std::get_if<GaussianParams>(&params)) {
        const double d = std::get<Real>(x).value - g->mu;
        return std::exp(-d * d / (2 * g->sigma2)) / std::sqrt(2 * std::numbers::pi * g->sigma2);
    }
    if (const auto* ig = std::get_if<InflatedGammaParams>(&params)) {
        const double v = std::get<Nonnegative>(x).value;
        if (v == 0.0) return ig->t;
        return (1 - ig->t) * std::pow(v, ig->k - 1) * std::exp(-v / ig->theta) /
               (std::tgamma(ig->k) * std::pow(ig->theta, ig->k));
    }
    if (const auto* qg = std::get_if<QuantizedGaussianParams>(&params)) {
        const int level = std::get<OrdinalLevel>(x).level;
        double norm = 0, hit = 0;
        for (int l : qg->levels) {
            const double e = std::exp(-(l - qg->mu) * (l - qg->mu) / (2 * qg->sigma2));
            norm += e;
            if (l == level) hit = e;
        }
        return hit / norm;
    }
    const auto& c = std::get<CategoricalParams>(params);
    return c.p[static_cast<Eigen::Index>(std::get<Category>(x).code)];
}

inline double cell_term(const MixtureModel& m, std::size_t z, std::size_t v, const Value& x, MissingMode mode) {
    const double q = m.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v));
    if (is_missing(x)) return mode == MissingMode::ModelMissing ? q : 1.0;
    return (mode == MissingMode::ModelMissing ? 1 - q : 1.0) * density(m.theta(z, v), x);
}

// w_z * prod over `vars` of the cell terms.
inline std::vector<double> component_joint(const MixtureModel& m, const std::vector<Value>& row, MissingMode mode,
                                           const std::vector<std::size_t>& vars) {
    std::vector<double> out;
    for (std::size_t z = 0; z < m.order(); ++z) {
        double p = m.weights[static_cast<Eigen::Index>(z)];
        for (auto v : vars) p *= cell_term(m, z, v, row[v], mode);
        out.push_back(p);
    }
    return out;
}

inline std::vector<std::size_t> all_vars(const MixtureModel& m) {
    std::vector<std::size_t> vars(m.variables());
    for (std::size_t v = 0; v < vars.size(); ++v) vars[v] = v;
    return vars;
}

inline double likelihood(const MixtureModel& m, const std::vector<Value>& row, MissingMode mode,
                         const std::vector<std::size_t>& vars) {
    double total = 0;
    for (double p : component_joint(m, row, mode, vars)) total += p;
    return total;
}

inline std::vector<double> posterior(const MixtureModel& m, const std::vector<Value>& row, MissingMode mode,
                                     const std::vector<std::size_t>& vars) {
    auto joint = component_joint(m, row, mode, vars);
    double total = 0;
    for (double p : joint) total += p;
    for (double& p : joint) p /= total;
    return joint;
}

// Pr[x_target = each domain value | evidence], by enumerating the joint of the
// evidence with every candidate target value.
inline std::vector<double> conditional(const MixtureModel& m, const std::vector<Value>& row, MissingMode mode,
                                       const std::vector<std::size_t>& evidence, std::size_t target) {
    const auto& s = m.schemas[target];
    std::vector<double> out;
    double total = 0;
    for (std::size_t d = 0; d < s.domain_size(); ++d) {
        const Value candidate = s.kind == VariableKind::Ordinal ? Value{OrdinalLevel{s.levels[d]}} : Value{Category{d}};
        double p = 0;
        for (std::size_t z = 0; z < m.order(); ++z) {
            double c = m.weights[static_cast<Eigen::Index>(z)] * density(m.theta(z, target), candidate);
            for (auto v : evidence) c *= cell_term(m, z, v, row[v], mode);
            p += c;
        }
        out.push_back(p);
        total += p;
    }
    for (double& p : out) p /= total;
    return out;
}

}  // namespace oracle
}  // namespace hetmix::testing

#endif  // HETMIX_TESTS_SUPPORT_HPP
