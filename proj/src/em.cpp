#include "hetmix/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail/parallel.hpp"
#include "hetmix/errors.hpp"
#include "hetmix/numeric.hpp"

namespace hetmix {

void EmConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
    if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) throw std::invalid_argument("rel_tol must be positive");
    if (restarts < 1) throw std::invalid_argument("restarts must be at least 1");
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

namespace {

constexpr double kCollapseMass = 1e-8;

struct EStep {
    Eigen::MatrixXd responsibilities;
    double nll = 0.0;
};

EStep expectation(const MixtureModel& model, const EncodedData& data) {
    EStep out;
    Eigen::MatrixXd log_joint = component_log_joint(model, data, MissingMode::ModelMissing);
    const Eigen::VectorXd row_total = row_log_sum_exp(log_joint);
    for (Eigen::Index s = 0; s < row_total.size(); ++s) {
        if (!std::isfinite(row_total[s]))
            throw ImpossibleObservation("subject " + std::to_string(s) +
                                        " has zero likelihood under every component");
    }
    log_joint.colwise() -= row_total;
    out.responsibilities = log_joint.array().exp();
    out.nll = -row_total.sum();
    return out;
}

Eigen::MatrixXd dirichlet_responsibilities(std::size_t n, std::size_t order, Rng& rng) {
    Eigen::MatrixXd resp(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(order));
    std::exponential_distribution<double> draw(1.0);
    for (Eigen::Index s = 0; s < resp.rows(); ++s) {
        for (Eigen::Index z = 0; z < resp.cols(); ++z) resp(s, z) = draw(rng);
        resp.row(s) /= resp.row(s).sum();
    }
    return resp;
}

Rng restart_rng(std::uint64_t seed, std::size_t order, std::size_t restart) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(order), static_cast<std::uint32_t>(restart)};
    return Rng(seq);
}

}  // namespace

Eigen::MatrixXd e_step(const MixtureModel& model, const Dataset& dataset) {
    if (dataset.schemas() != model.schemas) throw ValidationError("dataset schemas differ from the model's");
    return expectation(model, EncodedData::from(dataset)).responsibilities;
}

MixtureModel m_step(const Dataset& dataset, const Eigen::MatrixXd& responsibilities, const MixtureModel* previous) {
    return m_step(dataset, EncodedData::from(dataset), responsibilities, previous);
}

MixtureModel m_step(const Dataset& dataset, const EncodedData& encoded, const Eigen::MatrixXd& responsibilities,
                    const MixtureModel* previous) {
    const auto N = static_cast<Eigen::Index>(dataset.subjects());
    const std::size_t V = dataset.variables();
    if (N == 0) throw ValidationError("m_step needs at least one subject");
    if (responsibilities.rows() != N || responsibilities.cols() < 1)
        throw std::invalid_argument("responsibilities must be N x |Z|");
    const auto Z = static_cast<std::size_t>(responsibilities.cols());
    if (previous && (previous->order() != Z || previous->schemas != dataset.schemas()))
        throw std::invalid_argument("previous model does not match the responsibilities");

    const Eigen::VectorXd mass = responsibilities.colwise().sum().transpose();
    for (std::size_t z = 0; z < Z; ++z)
        if (!(mass[static_cast<Eigen::Index>(z)] >= kCollapseMass))
            throw ComponentCollapse(z, mass[static_cast<Eigen::Index>(z)]);

    MixtureModel model;
    model.schemas = dataset.schemas();
    model.weights = mass / mass.sum();
    model.missing_prob.resize(static_cast<Eigen::Index>(Z), static_cast<Eigen::Index>(V));
    model.params.resize(Z * V);

    for (std::size_t v = 0; v < V; ++v) {
        const auto& column = encoded.columns[v];
        const auto& schema = dataset.schema(v);
        const FitOptions options = FitOptions::for_scale(column.scale);
        for (std::size_t z = 0; z < Z; ++z) {
            const auto zi = static_cast<Eigen::Index>(z);
            const auto w = responsibilities.col(zi);
            double missing = 0.0;
            double observed = 0.0;
            for (Eigen::Index s = 0; s < N; ++s) {
                if (column.observed[static_cast<std::size_t>(s)]) observed += w[s];
                else missing += w[s];
            }
            model.missing_prob(zi, static_cast<Eigen::Index>(v)) = std::clamp(missing / mass[zi], 0.0, 1.0);

            if (!(observed > 0.0)) {
                model.theta(z, v) = previous ? previous->theta(z, v) : default_params(schema, options);
                continue;
            }
            FamilyParams candidate = estimate_column(schema, column, w, options);
            if (previous) {
                const FamilyParams& old = previous->theta(z, v);
                if (weighted_log_likelihood(candidate, column, w) < weighted_log_likelihood(old, column, w)) {
                    model.theta(z, v) = old;
                    continue;
                }
            }
            model.theta(z, v) = std::move(candidate);
        }
    }
    return model;
}

FitResult fit(const Dataset& dataset, std::size_t order, const EmConfig& config) {
    config.validate();
    if (order < 1) throw std::invalid_argument("model order must be at least 1");
    if (dataset.subjects() == 0) throw ValidationError("cannot fit an empty dataset");
    const EncodedData encoded = EncodedData::from(dataset);
    const std::size_t N = dataset.subjects();
    // A single component has no latent uncertainty, so every restart is identical.
    const std::size_t restarts = order == 1 ? 1 : config.restarts;

    std::optional<FitResult> best;
    TrainingTrace summary;
    for (std::size_t r = 0; r < restarts; ++r) {
        try {
            Rng rng = restart_rng(config.seed, order, r);
            Eigen::MatrixXd resp = order == 1 ? Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(N), 1)
                                              : dirichlet_responsibilities(N, order, rng);
            MixtureModel model = m_step(dataset, encoded, resp, nullptr);
            TrainingTrace trace;
            trace.restart = r;
            for (std::size_t it = 0; it < config.max_iterations; ++it) {
                EStep e = expectation(model, encoded);
                if (!std::isfinite(e.nll)) throw TrainingFailure("non-finite negative log-likelihood");
                trace.nll.push_back(e.nll);
                const std::size_t k = trace.nll.size();
                if (k >= 2 && std::abs(trace.nll[k - 2] - e.nll) <= config.rel_tol * std::abs(trace.nll[k - 2])) {
                    trace.converged = true;
                    break;
                }
                if (it + 1 == config.max_iterations) break;
                model = m_step(dataset, encoded, e.responsibilities, &model);
            }
            trace.iterations = trace.nll.size();
            summary.restart_nll.emplace_back(trace.nll.back());
            summary.restart_errors.emplace_back();
            if (!best || trace.nll.back() < best->trace.nll.back()) best = FitResult{std::move(model), std::move(trace)};
        } catch (const Error& e) {
            summary.restart_nll.emplace_back(std::nullopt);
            summary.restart_errors.emplace_back(e.what());
        }
    }
    if (!best) {
        std::string msg = "all " + std::to_string(restarts) + " restarts failed for order " + std::to_string(order);
        for (std::size_t r = 0; r < summary.restart_errors.size(); ++r)
            msg += "; restart " + std::to_string(r) + ": " + summary.restart_errors[r];
        throw TrainingFailure(msg);
    }
    best->trace.restart_nll = std::move(summary.restart_nll);
    best->trace.restart_errors = std::move(summary.restart_errors);
    return std::move(*best);
}

double total_nll(const MixtureModel& model, const Dataset& dataset) {
    if (dataset.schemas() != model.schemas) throw ValidationError("dataset schemas differ from the model's");
    const EncodedData encoded = EncodedData::from(dataset);
    return -row_log_sum_exp(component_log_joint(model, encoded, MissingMode::ModelMissing)).sum();
}

double bic_value(std::size_t parameter_count, std::size_t subjects, double nll) {
    return 0.5 * static_cast<double>(parameter_count) * std::log(static_cast<double>(subjects)) + nll;
}

double bic_score(const MixtureModel& model, const Dataset& dataset) {
    return bic_value(parameter_count(model), dataset.subjects(), total_nll(model, dataset));
}

OrderSelection select_order(const Dataset& dataset, std::size_t min_order, std::size_t max_order,
                            const EmConfig& config) {
    config.validate();
    if (min_order < 1 || max_order < min_order) throw std::invalid_argument("order range must be non-empty and >= 1");
    const std::size_t count = max_order - min_order + 1;
    std::vector<std::optional<FitResult>> fits(count);
    std::vector<OrderRow> rows(count);
    detail::parallel_for(count, config.workers, [&](std::size_t i) {
        OrderRow& row = rows[i];
        row.order = min_order + i;
        try {
            FitResult f = fit(dataset, row.order, config);
            row.parameters = parameter_count(f.model);
            row.nll = f.trace.nll.back();
            row.bic = bic_value(row.parameters, dataset.subjects(), row.nll);
            row.ok = true;
            fits[i] = std::move(f);
        } catch (const Error& e) {
            row.error = e.what();
        }
    });

    OrderSelection out;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < count; ++i) {
        if (!rows[i].ok) {
            out.warnings.push_back("order " + std::to_string(rows[i].order) + " skipped: " + rows[i].error);
            continue;
        }
        if (!best || rows[i].bic < rows[*best].bic) best = i;
    }
    if (!best) throw TrainingFailure("no model order in the range could be fitted");
    out.best_order = rows[*best].order;
    out.best = std::move(*fits[*best]);
    out.table = std::move(rows);
    return out;
}

}  // namespace hetmix
