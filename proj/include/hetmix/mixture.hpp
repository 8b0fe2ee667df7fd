#ifndef HETMIX_MIXTURE_HPP
#define HETMIX_MIXTURE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hetmix/dataset.hpp"
#include "hetmix/distributions.hpp"

namespace hetmix {

// How missing cells enter a likelihood: through the per-component
// missingness probability q, or not at all.
enum class MissingMode { ModelMissing, IgnoreMissing };

std::string_view to_string(MissingMode mode);
MissingMode parse_missing_mode(std::string_view text);

// Finite mixture over conditionally independent variables, each cell
// additionally observed with probability 1 - q(z, v).
struct MixtureModel {
    std::vector<VariableSchema> schemas;
    Eigen::VectorXd weights;        // |Z|
    Eigen::MatrixXd missing_prob;   // |Z| x V
    std::vector<FamilyParams> params;  // row-major |Z| x V

    std::size_t order() const { return static_cast<std::size_t>(weights.size()); }
    std::size_t variables() const { return schemas.size(); }
    const FamilyParams& theta(std::size_t z, std::size_t v) const { return params[z * variables() + v]; }
    FamilyParams& theta(std::size_t z, std::size_t v) { return params[z * variables() + v]; }
    std::size_t index_of(std::string_view name) const;  // throws std::out_of_range

    friend bool operator==(const MixtureModel& a, const MixtureModel& b);
};

// Throws ValidationError describing the first broken invariant.
void validate_model(const MixtureModel& model);

// Throws ValidationError unless `row` has one conforming cell per model variable.
void check_row(const MixtureModel& model, std::span<const Value> row);

// log Pr[Z=z] + sum over `variables` of the per-cell term, for every z.
Eigen::VectorXd component_log_joint(const MixtureModel& model, std::span<const Value> row, MissingMode mode,
                                    std::span<const std::size_t> variables);
Eigen::VectorXd component_log_joint(const MixtureModel& model, std::span<const Value> row, MissingMode mode);

double joint_log_likelihood(const MixtureModel& model, std::span<const Value> row, MissingMode mode);
double joint_log_likelihood(const MixtureModel& model, std::span<const Value> row, MissingMode mode,
                            std::span<const std::size_t> variables);

// Normalizes component log-joints into a posterior; throws
// ImpossibleObservation when every component has zero likelihood.
Eigen::VectorXd posterior_from_log_joint(const Eigen::Ref<const Eigen::VectorXd>& log_joint);

Eigen::VectorXd latent_posterior(const MixtureModel& model, std::span<const Value> row, MissingMode mode);
Eigen::VectorXd latent_posterior(const MixtureModel& model, std::span<const Value> row, MissingMode mode,
                                 std::span<const std::size_t> variables);

struct Cohort {
    Dataset data;
    std::vector<std::size_t> labels;
};

Cohort sample_cohort(const MixtureModel& model, std::size_t n, Rng& rng);

// Free parameters: |Z| - 1 weights, |Z| V missingness probabilities and the
// family parameters of every cell.
std::size_t parameter_count(const MixtureModel& model);

}  // namespace hetmix

#endif  // HETMIX_MIXTURE_HPP
