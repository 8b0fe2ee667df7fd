#ifndef HETMIX_EM_HPP
#define HETMIX_EM_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hetmix/columns.hpp"
#include "hetmix/dataset.hpp"
#include "hetmix/mixture.hpp"

namespace hetmix {

struct EmConfig {
    std::size_t max_iterations = 500;
    double rel_tol = 1e-6;
    std::size_t restarts = 5;
    std::uint64_t seed = 0;
    // Upper bound on threads used by order searches and leave-one-out folds.
    std::size_t workers = 1;

    void validate() const;  // throws std::invalid_argument
};

// Per-iteration negative log-likelihood of the chosen restart.
struct TrainingTrace {
    std::vector<double> nll;
    std::size_t restart = 0;
    bool converged = false;
    std::size_t iterations = 0;
    // Final NLL per restart; nullopt for restarts that failed.
    std::vector<std::optional<double>> restart_nll;
    std::vector<std::string> restart_errors;
};

struct FitResult {
    MixtureModel model;
    TrainingTrace trace;
};

// Responsibilities Pr[Z=z | x_s] under the missingness-aware likelihood.
// Throws ImpossibleObservation naming the first subject with zero likelihood.
Eigen::MatrixXd e_step(const MixtureModel& model, const Dataset& dataset);

// Closed-form updates of weights, missingness probabilities and family
// parameters from responsibilities. When `previous` is given, a cell keeps its
// previous parameters if the fresh estimate would lower that cell's expected
// complete-data log-likelihood, so the overall likelihood cannot decrease.
// Throws ComponentCollapse when a component's responsibility mass is < 1e-8.
MixtureModel m_step(const Dataset& dataset, const Eigen::MatrixXd& responsibilities,
                    const MixtureModel* previous = nullptr);
MixtureModel m_step(const Dataset& dataset, const EncodedData& encoded, const Eigen::MatrixXd& responsibilities,
                    const MixtureModel* previous = nullptr);

// Runs `config.restarts` EM chains from Dirichlet(1) responsibilities and
// keeps the lowest final NLL. Throws TrainingFailure if every restart fails.
FitResult fit(const Dataset& dataset, std::size_t order, const EmConfig& config);

// -sum_s ln f(x_s) with missing cells modelled.
double total_nll(const MixtureModel& model, const Dataset& dataset);

double bic_value(std::size_t parameter_count, std::size_t subjects, double nll);
double bic_score(const MixtureModel& model, const Dataset& dataset);

struct OrderRow {
    std::size_t order = 0;
    std::size_t parameters = 0;
    double nll = 0.0;
    double bic = 0.0;
    bool ok = false;
    std::string error;
};

struct OrderSelection {
    std::size_t best_order = 0;
    std::vector<OrderRow> table;
    FitResult best;
    std::vector<std::string> warnings;
};

// Fits every order in [min_order, max_order] and keeps the lowest BIC, ties
// toward the smaller order. Failed orders are skipped with a warning.
OrderSelection select_order(const Dataset& dataset, std::size_t min_order, std::size_t max_order,
                            const EmConfig& config);

}  // namespace hetmix

#endif  // HETMIX_EM_HPP
