#ifndef HETMIX_VALUE_HPP
#define HETMIX_VALUE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hetmix {

enum class VariableKind { ContinuousReal, ContinuousNonnegative, Ordinal, Categorical };

enum class Role { Input, Outcome };

std::string_view to_string(VariableKind kind);
std::string_view to_string(Role role);
VariableKind parse_kind(std::string_view text);
Role parse_role(std::string_view text);

// One column of a dataset. `levels` is the ordinal domain (strictly increasing
// integers, gaps allowed); `symbols` is the categorical domain. Both are empty
// for continuous kinds.
struct VariableSchema {
    std::string name;
    VariableKind kind = VariableKind::ContinuousReal;
    std::vector<int> levels;
    std::vector<std::string> symbols;
    Role role = Role::Input;

    bool finite_domain() const {
        return kind == VariableKind::Ordinal || kind == VariableKind::Categorical;
    }
    std::size_t domain_size() const {
        return kind == VariableKind::Ordinal ? levels.size() : symbols.size();
    }
    // Index of `level` in `levels`, or domain_size() when absent.
    std::size_t level_index(int level) const;
    std::size_t symbol_index(std::string_view symbol) const;

    friend bool operator==(const VariableSchema&, const VariableSchema&) = default;
};

// Human-readable problems with a schema definition; empty when valid.
std::vector<std::string> schema_problems(const VariableSchema& schema);

struct Missing {
    friend bool operator==(Missing, Missing) { return true; }
};
struct Real {
    double value;
    friend bool operator==(Real, Real) = default;
};
struct Nonnegative {
    double value;
    friend bool operator==(Nonnegative, Nonnegative) = default;
};
struct OrdinalLevel {
    int level;
    friend bool operator==(OrdinalLevel, OrdinalLevel) = default;
};
// Categories are stored as the index of their symbol in the column domain.
struct Category {
    std::size_t code;
    friend bool operator==(Category, Category) = default;
};

using Value = std::variant<Missing, Real, Nonnegative, OrdinalLevel, Category>;

inline bool is_missing(const Value& v) { return std::holds_alternative<Missing>(v); }

// True when `v` is missing or a well-typed, in-domain observation for `schema`.
bool conforms(const Value& v, const VariableSchema& schema);

// Numeric reading of an observed continuous or ordinal value.
double numeric_value(const Value& v);

}  // namespace hetmix

#endif  // HETMIX_VALUE_HPP
