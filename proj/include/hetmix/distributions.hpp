#ifndef HETMIX_DISTRIBUTIONS_HPP
#define HETMIX_DISTRIBUTIONS_HPP

#include <cstddef>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "hetmix/value.hpp"

namespace hetmix {

using Rng = std::mt19937_64;

struct GaussianParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    friend bool operator==(const GaussianParams&, const GaussianParams&) = default;
};

// Point mass at zero with probability t, Gamma(shape k, scale theta) otherwise.
struct InflatedGammaParams {
    double t = 0.0;
    double theta = 1.0;
    double k = 1.0;
    friend bool operator==(const InflatedGammaParams&, const InflatedGammaParams&) = default;
};

// Mass over `levels` proportional to exp(-(x - mu)^2 / (2 sigma2)).
struct QuantizedGaussianParams {
    double mu = 0.0;
    double sigma2 = 1.0;
    std::vector<int> levels;
    friend bool operator==(const QuantizedGaussianParams&, const QuantizedGaussianParams&) = default;
};

struct CategoricalParams {
    Eigen::VectorXd p;
    friend bool operator==(const CategoricalParams& a, const CategoricalParams& b) {
        return a.p.size() == b.p.size() && (a.p.array() == b.p.array()).all();
    }
};

using FamilyParams =
    std::variant<GaussianParams, InflatedGammaParams, QuantizedGaussianParams, CategoricalParams>;

VariableKind family_kind(const FamilyParams& params);

// Free parameters of one family instance: 2, 3, 2 and |domain| - 1.
std::size_t parameter_count(const FamilyParams& params);

double log_density(const GaussianParams& params, double x);
double log_density(const InflatedGammaParams& params, double x);
// Log-mass of each level, in domain order.
Eigen::VectorXd log_masses(const QuantizedGaussianParams& params);
Eigen::VectorXd masses(const QuantizedGaussianParams& params);
double log_mass(const QuantizedGaussianParams& params, int level);
double log_mass(const CategoricalParams& params, std::size_t code);

// Dispatches on the family; throws std::invalid_argument when `x` is missing
// or its tag does not match the family.
double log_density(const FamilyParams& params, const Value& x);

Value sample(const FamilyParams& params, Rng& rng);

// Expectation of the family (levels for quantized Gaussian, undefined and
// rejected for categorical).
double mean(const FamilyParams& params);

struct FitOptions {
    double variance_floor = 1e-6;
    double min_shape = 1e-3;
    double max_shape = 1e4;
    double min_scale = 1e-9;
    double probability_floor = 1e-9;
    // Gamma part when no positive observation carries weight.
    double default_shape = 1.0;
    double default_scale = 1.0;

    // Variance floor scaled to a column's spread.
    static FitOptions for_scale(double scale);
};

// Weighted incremental mean/variance (West 1979).
class MomentStats {
public:
    void add(double x, double w);
    double weight() const { return weight_; }
    double mean() const { return mean_; }
    double variance() const { return weight_ > 0.0 ? m2_ / weight_ : 0.0; }

private:
    double weight_ = 0.0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

class InflatedGammaStats {
public:
    void add(double x, double w);
    double weight() const { return weight_; }
    double zero_weight() const { return zero_weight_; }
    double positive_weight() const { return positive_.weight(); }
    double positive_mean() const { return positive_.mean(); }
    double positive_mean_log() const { return log_mean_; }

private:
    double weight_ = 0.0;
    double zero_weight_ = 0.0;
    MomentStats positive_;
    double log_mean_ = 0.0;
};

class CategoricalStats {
public:
    explicit CategoricalStats(std::size_t categories) : weights_(Eigen::VectorXd::Zero(categories)) {}
    void add(std::size_t code, double w) { weights_[static_cast<Eigen::Index>(code)] += w; }
    double weight() const { return weights_.sum(); }
    const Eigen::VectorXd& weights() const { return weights_; }

private:
    Eigen::VectorXd weights_;
};

// Approximate Gamma ML shape from gamma = ln(mean) - mean(ln x).
double gamma_shape_estimate(double gamma, const FitOptions& options);

// Estimators from accumulated statistics; throw EstimationError on zero weight.
GaussianParams estimate_gaussian(const MomentStats& stats, const FitOptions& options);
InflatedGammaParams estimate_inflated_gamma(const InflatedGammaStats& stats, const FitOptions& options);
QuantizedGaussianParams estimate_quantized_gaussian(const MomentStats& stats, std::vector<int> levels,
                                                    const FitOptions& options);
CategoricalParams estimate_categorical(const CategoricalStats& stats, const FitOptions& options);

struct WeightedSample {
    Value value;
    double weight;
};

// Responsibility-weighted maximum-likelihood update for the family selected by
// `schema.kind`. Missing samples are ignored.
FamilyParams weighted_mle(const VariableSchema& schema, std::span<const WeightedSample> samples,
                          const FitOptions& options = {});

// Parameters used for a cell with no observed weight.
FamilyParams default_params(const VariableSchema& schema, const FitOptions& options = {});

// Empty when the parameters are usable for `schema`, else the problem found.
std::string params_problem(const FamilyParams& params, const VariableSchema& schema);

}  // namespace hetmix

#endif  // HETMIX_DISTRIBUTIONS_HPP
