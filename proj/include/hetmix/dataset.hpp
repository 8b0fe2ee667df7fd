#ifndef HETMIX_DATASET_HPP
#define HETMIX_DATASET_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hetmix/value.hpp"

namespace hetmix {

// Subjects x variables grid of cells, row-major. Immutable once built and
// safe for concurrent reads.
class Dataset {
public:
    Dataset() = default;
    // Throws ValidationError if the grid shape does not match the schemas or
    // a schema itself is malformed. Cell contents are checked separately by
    // validate_dataset so that violations can be reported in bulk.
    Dataset(std::vector<VariableSchema> schemas, std::vector<Value> cells);

    std::size_t subjects() const { return schemas_.empty() ? 0 : cells_.size() / schemas_.size(); }
    std::size_t variables() const { return schemas_.size(); }

    const std::vector<VariableSchema>& schemas() const { return schemas_; }
    const VariableSchema& schema(std::size_t v) const { return schemas_[v]; }
    std::size_t index_of(std::string_view name) const;  // throws std::out_of_range

    const Value& at(std::size_t s, std::size_t v) const { return cells_[s * variables() + v]; }
    std::span<const Value> row(std::size_t s) const {
        return {cells_.data() + s * variables(), variables()};
    }
    const std::vector<Value>& cells() const { return cells_; }

    std::vector<std::size_t> input_variables() const;
    std::vector<std::size_t> outcome_variables() const;

    // New dataset holding the given subjects, in order.
    Dataset subset(std::span<const std::size_t> subjects) const;
    Dataset without_subject(std::size_t s) const;
    // New dataset holding only the given columns.
    Dataset select_columns(std::span<const std::size_t> columns) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<VariableSchema> schemas_;
    std::vector<Value> cells_;
};

struct CellViolation {
    std::size_t subject;
    std::size_t variable;
    std::string message;
};

struct ValidationReport {
    std::vector<CellViolation> cells;
    // Columns whose observed values are all identical, or that have none.
    std::vector<std::string> zero_variability;
    std::vector<std::string> schema;  // duplicate names, malformed domains

    bool ok() const { return cells.empty() && zero_variability.empty() && schema.empty(); }
};

ValidationReport validate_dataset(const Dataset& dataset);

struct MissingnessProfile {
    std::vector<std::size_t> per_subject;
    // at_least[m] = number of subjects with at least m missing cells, m = 0..V.
    std::vector<std::size_t> at_least;

    std::size_t subjects_with_at_least(std::size_t m) const { return m < at_least.size() ? at_least[m] : 0; }
};

MissingnessProfile missingness_profile(const Dataset& dataset);

}  // namespace hetmix

#endif  // HETMIX_DATASET_HPP
