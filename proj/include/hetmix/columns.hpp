#ifndef HETMIX_COLUMNS_HPP
#define HETMIX_COLUMNS_HPP

// Column-major encoding of a dataset and the vectorized kernels that the EM
// loop and population scoring run on. The cell-by-cell functions in
// mixture.hpp are the reference path; these must agree with them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hetmix/dataset.hpp"
#include "hetmix/mixture.hpp"

namespace hetmix {

struct EncodedColumn {
    VariableKind kind = VariableKind::ContinuousReal;
    std::vector<std::uint8_t> observed;
    Eigen::VectorXd value;      // numeric value or level; 0 where missing
    Eigen::VectorXd log_value;  // ln x for positive nonnegative cells, else 0
    std::vector<int> code;      // level index or category code; -1 where missing
    std::size_t observed_count = 0;
    // Population standard deviation of the observed values (1 when degenerate).
    double scale = 1.0;
};

struct EncodedData {
    std::vector<EncodedColumn> columns;
    std::size_t subjects = 0;

    static EncodedData from(const Dataset& dataset);
};

// out[s] += ln f(x_s; params) for every observed cell s.
void add_column_log_density(const FamilyParams& params, const EncodedColumn& column,
                            Eigen::Ref<Eigen::VectorXd> out);

// sum over observed s of w[s] ln f(x_s; params).
double weighted_log_likelihood(const FamilyParams& params, const EncodedColumn& column,
                               const Eigen::Ref<const Eigen::VectorXd>& w);

// Observed-cell weighted ML estimate; throws EstimationError when the observed
// weight is zero.
FamilyParams estimate_column(const VariableSchema& schema, const EncodedColumn& column,
                             const Eigen::Ref<const Eigen::VectorXd>& w, const FitOptions& options);

// N x |Z| matrix of log Pr[Z=z] + sum over `variables` of the cell terms.
Eigen::MatrixXd component_log_joint(const MixtureModel& model, const EncodedData& data, MissingMode mode,
                                    std::span<const std::size_t> variables);
Eigen::MatrixXd component_log_joint(const MixtureModel& model, const EncodedData& data, MissingMode mode);

// Row-wise log-sum-exp of a log-joint matrix.
Eigen::VectorXd row_log_sum_exp(const Eigen::Ref<const Eigen::MatrixXd>& log_joint);

}  // namespace hetmix

#endif  // HETMIX_COLUMNS_HPP
