#include "hetmix/mixture.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hetmix/errors.hpp"
#include "hetmix/numeric.hpp"

namespace hetmix {

std::string_view to_string(MissingMode mode) {
    return mode == MissingMode::ModelMissing ? "model_missing" : "ignore_missing";
}

MissingMode parse_missing_mode(std::string_view text) {
    if (text == "model_missing") return MissingMode::ModelMissing;
    if (text == "ignore_missing") return MissingMode::IgnoreMissing;
    throw std::invalid_argument("unknown missingness mode '" + std::string(text) +
                                "' (expected model_missing or ignore_missing)");
}

std::size_t MixtureModel::index_of(std::string_view name) const {
    for (std::size_t v = 0; v < schemas.size(); ++v)
        if (schemas[v].name == name) return v;
    throw std::out_of_range("unknown variable '" + std::string(name) + "'");
}

bool operator==(const MixtureModel& a, const MixtureModel& b) {
    if (a.schemas != b.schemas || a.weights.size() != b.weights.size() ||
        a.missing_prob.rows() != b.missing_prob.rows() || a.missing_prob.cols() != b.missing_prob.cols())
        return false;
    return (a.weights.array() == b.weights.array()).all() &&
           (a.missing_prob.array() == b.missing_prob.array()).all() && a.params == b.params;
}

void validate_model(const MixtureModel& model) {
    const std::size_t Z = model.order();
    const std::size_t V = model.variables();
    if (Z == 0) throw ValidationError("model has no components");
    if (V == 0) throw ValidationError("model has no variables");
    if ((model.weights.array() < 0.0).any() || !model.weights.allFinite())
        throw ValidationError("mixture weights must be finite and nonnegative");
    if (std::abs(model.weights.sum() - 1.0) > 1e-12) throw ValidationError("mixture weights do not sum to 1");
    if (static_cast<std::size_t>(model.missing_prob.rows()) != Z ||
        static_cast<std::size_t>(model.missing_prob.cols()) != V)
        throw ValidationError("missingness grid must be |Z| x V");
    if (!((model.missing_prob.array() >= 0.0) && (model.missing_prob.array() <= 1.0)).all())
        throw ValidationError("missingness probabilities must lie in [0, 1]");
    if (model.params.size() != Z * V) throw ValidationError("parameter grid must be |Z| x V");
    for (const auto& s : model.schemas) {
        auto problems = schema_problems(s);
        if (!problems.empty()) throw ValidationError(problems.front());
    }
    for (std::size_t z = 0; z < Z; ++z)
        for (std::size_t v = 0; v < V; ++v) {
            auto problem = params_problem(model.theta(z, v), model.schemas[v]);
            if (!problem.empty())
                throw ValidationError("component " + std::to_string(z) + ", variable '" + model.schemas[v].name +
                                      "': " + problem);
        }
}

void check_row(const MixtureModel& model, std::span<const Value> row) {
    if (row.size() != model.variables())
        throw ValidationError("row has " + std::to_string(row.size()) + " cells, model has " +
                              std::to_string(model.variables()) + " variables");
    for (std::size_t v = 0; v < row.size(); ++v)
        if (!conforms(row[v], model.schemas[v]))
            throw ValidationError("cell for '" + model.schemas[v].name + "' does not fit its schema");
}

Eigen::VectorXd component_log_joint(const MixtureModel& model, std::span<const Value> row, MissingMode mode,
                                    std::span<const std::size_t> variables) {
    check_row(model, row);
    const std::size_t Z = model.order();
    Eigen::VectorXd out(static_cast<Eigen::Index>(Z));
    for (std::size_t z = 0; z < Z; ++z) {
        double acc = safe_log(model.weights[static_cast<Eigen::Index>(z)]);
        for (auto v : variables) {
            const double q = model.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v));
            if (is_missing(row[v])) {
                if (mode == MissingMode::ModelMissing) acc += safe_log(q);
            } else {
                acc += log_density(model.theta(z, v), row[v]);
                if (mode == MissingMode::ModelMissing) acc += safe_log(1.0 - q);
            }
        }
        out[static_cast<Eigen::Index>(z)] = acc;
    }
    return out;
}

namespace {
std::vector<std::size_t> all_variables(std::size_t V) {
    std::vector<std::size_t> out(V);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}
}  // namespace

Eigen::VectorXd component_log_joint(const MixtureModel& model, std::span<const Value> row, MissingMode mode) {
    const auto vars = all_variables(model.variables());
    return component_log_joint(model, row, mode, vars);
}

double joint_log_likelihood(const MixtureModel& model, std::span<const Value> row, MissingMode mode) {
    return log_sum_exp(component_log_joint(model, row, mode));
}

double joint_log_likelihood(const MixtureModel& model, std::span<const Value> row, MissingMode mode,
                            std::span<const std::size_t> variables) {
    return log_sum_exp(component_log_joint(model, row, mode, variables));
}

Eigen::VectorXd posterior_from_log_joint(const Eigen::Ref<const Eigen::VectorXd>& log_joint) {
    const double total = log_sum_exp(log_joint);
    if (!std::isfinite(total)) throw ImpossibleObservation("observation has zero likelihood under every component");
    return (log_joint.array() - total).exp();
}

Eigen::VectorXd latent_posterior(const MixtureModel& model, std::span<const Value> row, MissingMode mode) {
    return posterior_from_log_joint(component_log_joint(model, row, mode));
}

Eigen::VectorXd latent_posterior(const MixtureModel& model, std::span<const Value> row, MissingMode mode,
                                 std::span<const std::size_t> variables) {
    return posterior_from_log_joint(component_log_joint(model, row, mode, variables));
}

Cohort sample_cohort(const MixtureModel& model, std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("cohort size must be at least 1");
    validate_model(model);
    const std::size_t V = model.variables();
    std::discrete_distribution<std::size_t> pick(model.weights.data(), model.weights.data() + model.weights.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Cohort cohort;
    cohort.labels.reserve(n);
    std::vector<Value> cells;
    cells.reserve(n * V);
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t z = pick(rng);
        cohort.labels.push_back(z);
        for (std::size_t v = 0; v < V; ++v) {
            const double q = model.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v));
            if (unit(rng) < q) cells.emplace_back(Missing{});
            else cells.push_back(sample(model.theta(z, v), rng));
        }
    }
    cohort.data = Dataset(model.schemas, std::move(cells));
    return cohort;
}

std::size_t parameter_count(const MixtureModel& model) {
    const std::size_t Z = model.order();
    std::size_t count = (Z - 1) + Z * model.variables();
    for (const auto& p : model.params) count += parameter_count(p);
    return count;
}

}  // namespace hetmix
