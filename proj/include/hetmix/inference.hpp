#ifndef HETMIX_INFERENCE_HPP
#define HETMIX_INFERENCE_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hetmix/mixture.hpp"

namespace hetmix {

struct Observation {
    std::size_t variable;
    Value value;  // may be Missing
};

struct InferenceRequest {
    std::vector<Observation> evidence;
    std::vector<std::string> targets;
    MissingMode mode = MissingMode::ModelMissing;
};

// Probabilities over the target's domain, in schema order.
struct FinitePredictive {
    Eigen::VectorXd probabilities;
};

// Posterior-weighted mixture of the component densities.
struct ContinuousPredictive {
    Eigen::VectorXd weights;
    std::vector<FamilyParams> components;

    double log_density(double x) const;
    double mean() const;
};

struct TargetPredictive {
    std::size_t variable = 0;
    VariableSchema schema;
    std::variant<FinitePredictive, ContinuousPredictive> distribution;

    const FinitePredictive* finite() const { return std::get_if<FinitePredictive>(&distribution); }
};

struct PredictiveDistribution {
    Eigen::VectorXd posterior;
    std::vector<TargetPredictive> targets;

    const TargetPredictive& target(std::string_view name) const;  // throws InferenceError
};

// Evidence over the given variables of a full row.
std::vector<Observation> evidence_from_row(std::span<const Value> row, std::span<const std::size_t> variables);

PredictiveDistribution infer(const MixtureModel& model, const InferenceRequest& request);
// Target marginals mixed with an already computed posterior.
PredictiveDistribution predict_targets(const MixtureModel& model, const Eigen::VectorXd& posterior,
                                       std::span<const std::size_t> targets);

// Most likely value for finite domains (ties to the first domain entry), the
// mixture mean for continuous targets.
Value point_predict(const PredictiveDistribution& pred, std::string_view target);

struct RankedOutcome {
    Value value;
    double probability;
};

// Domain values by descending probability, stable; throws InferenceError for
// continuous targets.
std::vector<RankedOutcome> rank_outcomes(const PredictiveDistribution& pred, std::string_view target);

}  // namespace hetmix

#endif  // HETMIX_INFERENCE_HPP
