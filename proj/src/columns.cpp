#include "hetmix/columns.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "hetmix/errors.hpp"
#include "hetmix/numeric.hpp"

namespace hetmix {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Per-observed-cell log term as a lookup or closed form.
template <typename Fn>
void for_each_observed(const EncodedColumn& column, Fn&& fn) {
    const auto n = column.observed.size();
    for (std::size_t s = 0; s < n; ++s)
        if (column.observed[s]) fn(static_cast<Eigen::Index>(s));
}

}  // namespace

EncodedData EncodedData::from(const Dataset& dataset) {
    EncodedData data;
    data.subjects = dataset.subjects();
    const auto N = static_cast<Eigen::Index>(data.subjects);
    for (std::size_t v = 0; v < dataset.variables(); ++v) {
        const auto& schema = dataset.schema(v);
        EncodedColumn col;
        col.kind = schema.kind;
        col.observed.assign(data.subjects, 0);
        col.value = Eigen::VectorXd::Zero(N);
        col.log_value = Eigen::VectorXd::Zero(N);
        col.code.assign(data.subjects, -1);
        MomentStats spread;
        for (std::size_t s = 0; s < data.subjects; ++s) {
            const Value& cell = dataset.at(s, v);
            if (is_missing(cell)) continue;
            const auto i = static_cast<Eigen::Index>(s);
            col.observed[s] = 1;
            ++col.observed_count;
            switch (schema.kind) {
                case VariableKind::ContinuousReal: col.value[i] = std::get<Real>(cell).value; break;
                case VariableKind::ContinuousNonnegative: {
                    const double x = std::get<Nonnegative>(cell).value;
                    col.value[i] = x;
                    if (x > 0.0) col.log_value[i] = std::log(x);
                    break;
                }
                case VariableKind::Ordinal: {
                    const int level = std::get<OrdinalLevel>(cell).level;
                    col.value[i] = level;
                    col.code[s] = static_cast<int>(schema.level_index(level));
                    break;
                }
                case VariableKind::Categorical:
                    col.code[s] = static_cast<int>(std::get<Category>(cell).code);
                    break;
            }
            if (schema.kind != VariableKind::Categorical) spread.add(col.value[i], 1.0);
        }
        const double sd = std::sqrt(spread.variance());
        col.scale = (std::isfinite(sd) && sd > 0.0) ? sd : 1.0;
        data.columns.push_back(std::move(col));
    }
    return data;
}

void add_column_log_density(const FamilyParams& params, const EncodedColumn& column,
                            Eigen::Ref<Eigen::VectorXd> out) {
    std::visit(overloaded{
                   [&](const GaussianParams& p) {
                       const double c0 = -0.5 * std::log(2.0 * std::numbers::pi * p.sigma2);
                       const double inv = 1.0 / (2.0 * p.sigma2);
                       for_each_observed(column, [&](Eigen::Index s) {
                           const double d = column.value[s] - p.mu;
                           out[s] += c0 - d * d * inv;
                       });
                   },
                   [&](const InflatedGammaParams& p) {
                       const double at_zero = safe_log(p.t);
                       const double c0 = safe_log(1.0 - p.t) - std::lgamma(p.k) - p.k * std::log(p.theta);
                       const double inv_theta = 1.0 / p.theta;
                       const double km1 = p.k - 1.0;
                       for_each_observed(column, [&](Eigen::Index s) {
                           const double x = column.value[s];
                           out[s] += x == 0.0 ? at_zero : c0 + km1 * column.log_value[s] - x * inv_theta;
                       });
                   },
                   [&](const QuantizedGaussianParams& p) {
                       const Eigen::VectorXd table = log_masses(p);
                       for_each_observed(column, [&](Eigen::Index s) {
                           out[s] += table[column.code[static_cast<std::size_t>(s)]];
                       });
                   },
                   [&](const CategoricalParams& p) {
                       Eigen::VectorXd table(p.p.size());
                       for (Eigen::Index i = 0; i < p.p.size(); ++i) table[i] = safe_log(p.p[i]);
                       for_each_observed(column, [&](Eigen::Index s) {
                           out[s] += table[column.code[static_cast<std::size_t>(s)]];
                       });
                   },
               },
               params);
}

double weighted_log_likelihood(const FamilyParams& params, const EncodedColumn& column,
                               const Eigen::Ref<const Eigen::VectorXd>& w) {
    Eigen::VectorXd terms = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(column.observed.size()));
    add_column_log_density(params, column, terms);
    double acc = 0.0;
    for_each_observed(column, [&](Eigen::Index s) {
        if (w[s] != 0.0) acc += w[s] * terms[s];
    });
    return acc;
}

FamilyParams estimate_column(const VariableSchema& schema, const EncodedColumn& column,
                             const Eigen::Ref<const Eigen::VectorXd>& w, const FitOptions& options) {
    switch (schema.kind) {
        case VariableKind::ContinuousReal: {
            MomentStats st;
            for_each_observed(column, [&](Eigen::Index s) { st.add(column.value[s], w[s]); });
            return estimate_gaussian(st, options);
        }
        case VariableKind::ContinuousNonnegative: {
            InflatedGammaStats st;
            for_each_observed(column, [&](Eigen::Index s) { st.add(column.value[s], w[s]); });
            return estimate_inflated_gamma(st, options);
        }
        case VariableKind::Ordinal: {
            MomentStats st;
            for_each_observed(column, [&](Eigen::Index s) { st.add(column.value[s], w[s]); });
            return estimate_quantized_gaussian(st, schema.levels, options);
        }
        case VariableKind::Categorical: {
            CategoricalStats st(schema.symbols.size());
            for_each_observed(column, [&](Eigen::Index s) {
                st.add(static_cast<std::size_t>(column.code[static_cast<std::size_t>(s)]), w[s]);
            });
            return estimate_categorical(st, options);
        }
    }
    throw std::logic_error("unhandled variable kind");
}

Eigen::MatrixXd component_log_joint(const MixtureModel& model, const EncodedData& data, MissingMode mode,
                                    std::span<const std::size_t> variables) {
    if (data.columns.size() != model.variables())
        throw ValidationError("encoded data does not match the model's variables");
    const auto N = static_cast<Eigen::Index>(data.subjects);
    const auto Z = static_cast<Eigen::Index>(model.order());
    Eigen::MatrixXd out(N, Z);
    for (Eigen::Index z = 0; z < Z; ++z) {
        out.col(z).setConstant(safe_log(model.weights[z]));
        for (auto v : variables) {
            const auto& column = data.columns[v];
            add_column_log_density(model.theta(static_cast<std::size_t>(z), v), column, out.col(z));
            if (mode != MissingMode::ModelMissing) continue;
            const double q = model.missing_prob(z, static_cast<Eigen::Index>(v));
            const double if_missing = safe_log(q);
            const double if_observed = safe_log(1.0 - q);
            for (Eigen::Index s = 0; s < N; ++s)
                out(s, z) += column.observed[static_cast<std::size_t>(s)] ? if_observed : if_missing;
        }
    }
    return out;
}

Eigen::MatrixXd component_log_joint(const MixtureModel& model, const EncodedData& data, MissingMode mode) {
    std::vector<std::size_t> vars(model.variables());
    std::iota(vars.begin(), vars.end(), std::size_t{0});
    return component_log_joint(model, data, mode, vars);
}

Eigen::VectorXd row_log_sum_exp(const Eigen::Ref<const Eigen::MatrixXd>& log_joint) {
    Eigen::VectorXd out(log_joint.rows());
    for (Eigen::Index s = 0; s < log_joint.rows(); ++s) out[s] = log_sum_exp(log_joint.row(s));
    return out;
}

}  // namespace hetmix
