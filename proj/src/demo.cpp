#include "hetmix/demo.hpp"

#include <numeric>

namespace hetmix {

namespace {

std::vector<int> range(int lo, int hi) {
    std::vector<int> out(static_cast<std::size_t>(hi - lo + 1));
    std::iota(out.begin(), out.end(), lo);
    return out;
}

VariableSchema continuous(std::string name, bool nonnegative, Role role = Role::Input) {
    VariableSchema s;
    s.name = std::move(name);
    s.kind = nonnegative ? VariableKind::ContinuousNonnegative : VariableKind::ContinuousReal;
    s.role = role;
    return s;
}

VariableSchema ordinal(std::string name, int lo, int hi, Role role = Role::Input) {
    VariableSchema s;
    s.name = std::move(name);
    s.kind = VariableKind::Ordinal;
    s.levels = range(lo, hi);
    s.role = role;
    return s;
}

VariableSchema categorical(std::string name, std::vector<std::string> symbols, Role role = Role::Input) {
    VariableSchema s;
    s.name = std::move(name);
    s.kind = VariableKind::Categorical;
    s.symbols = std::move(symbols);
    s.role = role;
    return s;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v / v.sum();
}

}  // namespace

MixtureModel demo_generator() {
    MixtureModel m;
    m.schemas = {
        continuous("age", false),
        continuous("log_biomarker_a", false),
        continuous("heart_rate", false),
        continuous("temperature", false),
        continuous("uchl1", true),
        continuous("gfap", true),
        continuous("hospital_days", true),
        continuous("alcohol_units", true),
        ordinal("gcs", 3, 15),
        ordinal("ct_marshall", 1, 6),
        ordinal("loc_minutes", 0, 10),
        ordinal("pain_score", 0, 10),
        ordinal("prior_tbi", 0, 3),
        categorical("sex", {"F", "M"}),
        categorical("mechanism", {"fall", "vehicle", "assault", "sport", "other"}),
        categorical("education", {"primary", "secondary", "tertiary"}),
        ordinal("gose_6m", 1, 8, Role::Outcome),
        ordinal("gose_12m", 1, 8, Role::Outcome),
        ordinal("pcl_6m", 17, 85, Role::Outcome),
        categorical("return_to_work", {"yes", "no"}, Role::Outcome),
    };
    const std::size_t V = m.schemas.size();
    const std::size_t Z = 3;
    m.weights = Eigen::Vector3d(0.5, 0.3, 0.2);

    const std::vector<std::vector<FamilyParams>> cells = {
        {
            GaussianParams{38.0, 60.0},
            GaussianParams{0.0, 0.3},
            GaussianParams{75.0, 80.0},
            GaussianParams{36.8, 0.15},
            InflatedGammaParams{0.30, 0.05, 2.0},
            InflatedGammaParams{0.40, 0.5, 1.5},
            InflatedGammaParams{0.60, 1.5, 1.2},
            InflatedGammaParams{0.50, 3.0, 2.0},
            QuantizedGaussianParams{14.6, 0.6, range(3, 15)},
            QuantizedGaussianParams{1.8, 0.4, range(1, 6)},
            QuantizedGaussianParams{1.0, 1.5, range(0, 10)},
            QuantizedGaussianParams{2.0, 2.0, range(0, 10)},
            QuantizedGaussianParams{0.3, 0.5, range(0, 3)},
            CategoricalParams{vec({0.4, 0.6})},
            CategoricalParams{vec({0.30, 0.30, 0.05, 0.30, 0.05})},
            CategoricalParams{vec({0.1, 0.4, 0.5})},
            QuantizedGaussianParams{7.5, 0.35, range(1, 8)},
            QuantizedGaussianParams{7.6, 0.4, range(1, 8)},
            QuantizedGaussianParams{24.0, 30.0, range(17, 85)},
            CategoricalParams{vec({0.9, 0.1})},
        },
        {
            GaussianParams{47.0, 60.0},
            GaussianParams{1.2, 0.3},
            GaussianParams{88.0, 80.0},
            GaussianParams{37.2, 0.15},
            InflatedGammaParams{0.20, 0.06, 3.0},
            InflatedGammaParams{0.25, 1.0, 2.5},
            InflatedGammaParams{0.30, 3.0, 2.0},
            InflatedGammaParams{0.50, 4.0, 2.0},
            QuantizedGaussianParams{13.2, 1.5, range(3, 15)},
            QuantizedGaussianParams{2.2, 0.5, range(1, 6)},
            QuantizedGaussianParams{3.0, 2.0, range(0, 10)},
            QuantizedGaussianParams{6.0, 2.0, range(0, 10)},
            QuantizedGaussianParams{0.8, 0.6, range(0, 3)},
            CategoricalParams{vec({0.3, 0.7})},
            CategoricalParams{vec({0.20, 0.35, 0.25, 0.10, 0.10})},
            CategoricalParams{vec({0.3, 0.5, 0.2})},
            QuantizedGaussianParams{6.0, 0.6, range(1, 8)},
            QuantizedGaussianParams{5.6, 0.6, range(1, 8)},
            QuantizedGaussianParams{45.0, 60.0, range(17, 85)},
            CategoricalParams{vec({0.5, 0.5})},
        },
        {
            GaussianParams{58.0, 60.0},
            GaussianParams{2.5, 0.3},
            GaussianParams{102.0, 80.0},
            GaussianParams{37.9, 0.15},
            InflatedGammaParams{0.10, 0.08, 4.0},
            InflatedGammaParams{0.10, 2.0, 3.0},
            InflatedGammaParams{0.05, 5.0, 3.0},
            InflatedGammaParams{0.40, 5.0, 2.0},
            QuantizedGaussianParams{8.5, 4.0, range(3, 15)},
            QuantizedGaussianParams{3.6, 0.8, range(1, 6)},
            QuantizedGaussianParams{6.0, 3.0, range(0, 10)},
            QuantizedGaussianParams{5.0, 2.0, range(0, 10)},
            QuantizedGaussianParams{1.2, 0.8, range(0, 3)},
            CategoricalParams{vec({0.25, 0.75})},
            CategoricalParams{vec({0.15, 0.55, 0.15, 0.05, 0.10})},
            CategoricalParams{vec({0.5, 0.4, 0.1})},
            QuantizedGaussianParams{3.0, 0.9, range(1, 8)},
            QuantizedGaussianParams{3.0, 1.0, range(1, 8)},
            QuantizedGaussianParams{30.0, 50.0, range(17, 85)},
            CategoricalParams{vec({0.15, 0.85})},
        },
    };
    // Missingness grows with severity; outcomes are lost to follow-up more
    // often in the severe component.
    const double base[Z] = {0.04, 0.08, 0.15};
    m.missing_prob.resize(Z, static_cast<Eigen::Index>(V));
    for (std::size_t z = 0; z < Z; ++z) {
        for (std::size_t v = 0; v < V; ++v) {
            double q = base[z];
            if (m.schemas[v].role == Role::Outcome) q *= 1.5;
            if (m.schemas[v].name == "uchl1" || m.schemas[v].name == "gfap") q += 0.15;
            m.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v)) = q;
        }
        m.params.insert(m.params.end(), cells[z].begin(), cells[z].end());
    }
    return m;
}

}  // namespace hetmix
