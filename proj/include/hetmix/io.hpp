#ifndef HETMIX_IO_HPP
#define HETMIX_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hetmix/dataset.hpp"
#include "hetmix/mixture.hpp"

namespace hetmix::io {

inline constexpr int kSchemaFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

// Schema file: JSON document
//   {"format_version": 1, "variables": [
//      {"name": "age", "kind": "continuous_real", "role": "input"},
//      {"name": "gcs", "kind": "ordinal", "domain": [3, 4, ..., 15], "role": "input"},
//      {"name": "sex", "kind": "categorical", "domain": ["F", "M"], "role": "input"}]}
std::vector<VariableSchema> parse_schema(const std::string& text);
std::string write_schema(const std::vector<VariableSchema>& schemas);

struct CsvOptions {
    std::string missing_token;  // empty field by default
};

// Header row names the columns; order may differ from the schema order, but
// every schema column must be present exactly once.
Dataset parse_csv(const std::string& text, const std::vector<VariableSchema>& schemas,
                  const CsvOptions& options = {});
std::string write_csv(const Dataset& dataset, const CsvOptions& options = {});

// Rows of a CSV whose header names any subset of the schema columns; absent
// columns become Missing and are listed in `present` as false.
struct PartialRows {
    std::vector<std::vector<Value>> rows;
    std::vector<bool> present;
};
PartialRows parse_partial_csv(const std::string& text, const std::vector<VariableSchema>& schemas,
                              const CsvOptions& options = {});

// Shortest representation that parses back to the same double.
std::string format_double(double x);

std::string write_model(const MixtureModel& model);
MixtureModel parse_model(const std::string& text);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace hetmix::io

#endif  // HETMIX_IO_HPP
