#ifndef HETMIX_EVALUATION_HPP
#define HETMIX_EVALUATION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hetmix/columns.hpp"
#include "hetmix/em.hpp"
#include "hetmix/inference.hpp"

namespace hetmix {

// Expected |x - truth| under a finite ordinal predictive. nullopt when the
// truth is missing.
std::optional<double> expected_absolute_error(const PredictiveDistribution& pred, std::string_view target,
                                              const Value& truth);
double expected_absolute_error(const VariableSchema& schema, const Eigen::VectorXd& probabilities, int truth);

// 1 - Pr[truth] for a categorical predictive. nullopt when the truth is missing.
std::optional<double> probability_of_error(const PredictiveDistribution& pred, std::string_view target,
                                           const Value& truth);

// EAE for ordinal targets, probability of error for categorical ones.
std::optional<double> prediction_error(const PredictiveDistribution& pred, std::string_view target,
                                       const Value& truth);

// Error of the uniform predictor.
std::optional<double> chance_eae(const VariableSchema& schema, const Value& truth);

// Spread of the ordinal levels (last - first), 1 for categorical.
double max_error(const VariableSchema& schema);
double normalized_error(const VariableSchema& schema, double error);  // percent

// Log of the mixture-weighted likelihood of the input variables alone.
double confidence_score(const MixtureModel& model, std::span<const Value> row,
                        std::span<const std::size_t> input_variables, MissingMode mode);
// Scores of every subject of an encoded population.
Eigen::VectorXd confidence_scores(const MixtureModel& model, const EncodedData& data,
                                  std::span<const std::size_t> input_variables, MissingMode mode);

// Fraction of the reference population strictly below `score`.
double percentile_rank(double score, std::span<const double> reference);

struct EaeRecord {
    std::size_t subject = 0;
    std::string target;
    std::size_t order = 0;  // 0 is the uniform chance predictor
    double eae = 0.0;
    double normalized = 0.0;
};

struct ConfidenceRecord {
    std::size_t subject = 0;
    std::size_t order = 0;
    double log_score = 0.0;
    double percentile = 0.0;
};

struct PerformanceRow {
    std::string target;
    std::size_t order = 0;
    double mean_normalized = 0.0;
    double two_sd = 0.0;
    std::size_t count = 0;
};

struct LooConfig {
    std::vector<std::size_t> orders;  // order 1 is always added
    std::vector<std::string> targets;
    MissingMode mode = MissingMode::ModelMissing;
    EmConfig em;
};

struct FoldFailure {
    std::size_t subject;
    std::size_t order;
    std::string error;
};

struct LooReport {
    std::vector<PerformanceRow> performance;
    std::vector<EaeRecord> records;
    std::vector<ConfidenceRecord> confidence;
    std::vector<FoldFailure> failures;
    std::vector<std::size_t> excluded_subjects;
    std::vector<std::string> warnings;

    std::vector<std::size_t> orders() const;  // fitted orders, ascending
};

// Leave-one-out: for every subject, fit each order on the others, infer the
// targets from the subject's input variables, score, and rank the subject's
// confidence against the training population. Throws TrainingFailure when
// more than 10% of folds fail.
LooReport loo_evaluate(const Dataset& dataset, const LooConfig& config);

// Mean and 2 sample standard deviations of a list of errors.
PerformanceRow summarize(std::string target, std::size_t order, std::span<const double> normalized);

struct ScoredError {
    double percentile;
    double error;
};

// Joins normalized EAE records with confidence records for one target/order.
std::vector<ScoredError> join_records(std::span<const EaeRecord> records,
                                      std::span<const ConfidenceRecord> confidence, std::string_view target,
                                      std::size_t order);

struct ThresholdPoint {
    double tau = 0.0;
    std::size_t count = 0;
    std::optional<double> mean;        // E(tau)
    std::optional<double> difference;  // E(0) - E(tau)
};

// E(tau) = mean error over subjects with percentile >= tau.
std::vector<ThresholdPoint> threshold_curve(std::span<const ScoredError> scored, std::span<const double> thresholds);

struct ConfidenceBins {
    std::size_t low_count = 0;
    std::size_t high_count = 0;
    std::optional<double> low_mean;
    std::optional<double> high_mean;
    std::optional<double> decrease;  // low - high
    std::string warning;
};

ConfidenceBins confidence_bins(std::span<const ScoredError> scored, double cutoff = 0.5);

// Gaussian KDE with bandwidth sd * n^(-1/5).
double scott_bandwidth(std::span<const double> values);
std::vector<double> eae_density(std::span<const double> values, std::span<const double> grid);

}  // namespace hetmix

#endif  // HETMIX_EVALUATION_HPP
