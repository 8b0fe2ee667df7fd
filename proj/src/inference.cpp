#include "hetmix/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hetmix/errors.hpp"
#include "hetmix/numeric.hpp"

namespace hetmix {

double ContinuousPredictive::log_density(double x) const {
    Eigen::VectorXd terms(weights.size());
    for (Eigen::Index z = 0; z < weights.size(); ++z) {
        const auto& c = components[static_cast<std::size_t>(z)];
        const double lw = safe_log(weights[z]);
        if (lw == kNegInf) {
            terms[z] = kNegInf;
            continue;
        }
        if (const auto* g = std::get_if<GaussianParams>(&c)) terms[z] = lw + hetmix::log_density(*g, x);
        else terms[z] = lw + hetmix::log_density(std::get<InflatedGammaParams>(c), x);
    }
    return log_sum_exp(terms);
}

double ContinuousPredictive::mean() const {
    double m = 0.0;
    for (Eigen::Index z = 0; z < weights.size(); ++z) m += weights[z] * hetmix::mean(components[static_cast<std::size_t>(z)]);
    return m;
}

const TargetPredictive& PredictiveDistribution::target(std::string_view name) const {
    for (const auto& t : targets)
        if (t.schema.name == name) return t;
    throw InferenceError("no predictive for target '" + std::string(name) + "'");
}

std::vector<Observation> evidence_from_row(std::span<const Value> row, std::span<const std::size_t> variables) {
    std::vector<Observation> out;
    out.reserve(variables.size());
    for (auto v : variables) out.push_back({v, row[v]});
    return out;
}

PredictiveDistribution predict_targets(const MixtureModel& model, const Eigen::VectorXd& posterior,
                                       std::span<const std::size_t> targets) {
    PredictiveDistribution pred;
    pred.posterior = posterior;
    const std::size_t Z = model.order();
    for (auto v : targets) {
        TargetPredictive t;
        t.variable = v;
        t.schema = model.schemas[v];
        if (t.schema.finite_domain()) {
            Eigen::VectorXd probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t.schema.domain_size()));
            for (std::size_t z = 0; z < Z; ++z) {
                const double w = posterior[static_cast<Eigen::Index>(z)];
                if (w == 0.0) continue;
                if (const auto* qg = std::get_if<QuantizedGaussianParams>(&model.theta(z, v)))
                    probs += w * masses(*qg);
                else
                    probs += w * std::get<CategoricalParams>(model.theta(z, v)).p;
            }
            t.distribution = FinitePredictive{std::move(probs)};
        } else {
            ContinuousPredictive c;
            c.weights = posterior;
            for (std::size_t z = 0; z < Z; ++z) c.components.push_back(model.theta(z, v));
            t.distribution = std::move(c);
        }
        pred.targets.push_back(std::move(t));
    }
    return pred;
}

PredictiveDistribution infer(const MixtureModel& model, const InferenceRequest& request) {
    if (request.targets.empty()) throw InferenceError("inference request has no targets");
    std::vector<std::size_t> targets;
    std::set<std::size_t> target_set;
    for (const auto& name : request.targets) {
        std::size_t v = 0;
        try {
            v = model.index_of(name);
        } catch (const std::out_of_range&) {
            throw InferenceError("unknown target '" + name + "'");
        }
        if (!target_set.insert(v).second) throw InferenceError("target '" + name + "' listed twice");
        targets.push_back(v);
    }

    std::vector<Value> row(model.variables(), Value{Missing{}});
    std::vector<std::size_t> evidence_vars;
    std::set<std::size_t> seen;
    for (const auto& obs : request.evidence) {
        if (obs.variable >= model.variables()) throw InferenceError("evidence variable index out of range");
        const auto& schema = model.schemas[obs.variable];
        if (target_set.count(obs.variable)) throw InferenceError("'" + schema.name + "' is both evidence and target");
        if (!seen.insert(obs.variable).second) throw InferenceError("evidence for '" + schema.name + "' given twice");
        if (!conforms(obs.value, schema)) throw InferenceError("evidence for '" + schema.name + "' does not fit its schema");
        row[obs.variable] = obs.value;
        evidence_vars.push_back(obs.variable);
    }
    std::sort(evidence_vars.begin(), evidence_vars.end());

    Eigen::VectorXd posterior;
    try {
        posterior = latent_posterior(model, row, request.mode, evidence_vars);
    } catch (const ImpossibleObservation& e) {
        throw InferenceError(std::string("impossible evidence: ") + e.what());
    }
    return predict_targets(model, posterior, targets);
}

Value point_predict(const PredictiveDistribution& pred, std::string_view target) {
    const auto& t = pred.target(target);
    if (const auto* f = t.finite()) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < f->probabilities.size(); ++i)
            if (f->probabilities[i] > f->probabilities[best]) best = i;
        if (t.schema.kind == VariableKind::Ordinal) return OrdinalLevel{t.schema.levels[static_cast<std::size_t>(best)]};
        return Category{static_cast<std::size_t>(best)};
    }
    const double m = std::get<ContinuousPredictive>(t.distribution).mean();
    if (t.schema.kind == VariableKind::ContinuousNonnegative) return Nonnegative{m};
    return Real{m};
}

std::vector<RankedOutcome> rank_outcomes(const PredictiveDistribution& pred, std::string_view target) {
    const auto& t = pred.target(target);
    const auto* f = t.finite();
    if (!f) throw InferenceError("cannot rank outcomes of continuous target '" + std::string(target) + "'");
    std::vector<std::size_t> order(static_cast<std::size_t>(f->probabilities.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return f->probabilities[static_cast<Eigen::Index>(a)] > f->probabilities[static_cast<Eigen::Index>(b)];
    });
    std::vector<RankedOutcome> out;
    for (auto i : order) {
        Value v = t.schema.kind == VariableKind::Ordinal ? Value{OrdinalLevel{t.schema.levels[i]}} : Value{Category{i}};
        out.push_back({v, f->probabilities[static_cast<Eigen::Index>(i)]});
    }
    return out;
}

}  // namespace hetmix
