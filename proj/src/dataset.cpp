#include "hetmix/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "hetmix/errors.hpp"

namespace hetmix {

std::string_view to_string(VariableKind kind) {
    switch (kind) {
        case VariableKind::ContinuousReal: return "continuous_real";
        case VariableKind::ContinuousNonnegative: return "continuous_nonnegative";
        case VariableKind::Ordinal: return "ordinal";
        case VariableKind::Categorical: return "categorical";
    }
    return "unknown";
}

std::string_view to_string(Role role) { return role == Role::Input ? "input" : "outcome"; }

VariableKind parse_kind(std::string_view text) {
    for (auto k : {VariableKind::ContinuousReal, VariableKind::ContinuousNonnegative, VariableKind::Ordinal,
                   VariableKind::Categorical}) {
        if (to_string(k) == text) return k;
    }
    throw ValidationError("unknown variable kind '" + std::string(text) + "'");
}

Role parse_role(std::string_view text) {
    if (text == "input") return Role::Input;
    if (text == "outcome") return Role::Outcome;
    throw ValidationError("unknown variable role '" + std::string(text) + "'");
}

std::size_t VariableSchema::level_index(int level) const {
    auto it = std::lower_bound(levels.begin(), levels.end(), level);
    if (it == levels.end() || *it != level) return levels.size();
    return static_cast<std::size_t>(it - levels.begin());
}

std::size_t VariableSchema::symbol_index(std::string_view symbol) const {
    auto it = std::find(symbols.begin(), symbols.end(), symbol);
    return static_cast<std::size_t>(it - symbols.begin());
}

std::vector<std::string> schema_problems(const VariableSchema& schema) {
    std::vector<std::string> out;
    const std::string where = "variable '" + schema.name + "': ";
    if (schema.name.empty()) out.push_back("variable with empty name");
    switch (schema.kind) {
        case VariableKind::Ordinal:
            if (schema.levels.size() < 2) out.push_back(where + "ordinal domain needs at least 2 levels");
            if (std::adjacent_find(schema.levels.begin(), schema.levels.end(),
                                   [](int a, int b) { return a >= b; }) != schema.levels.end())
                out.push_back(where + "ordinal domain must be strictly increasing");
            if (!schema.symbols.empty()) out.push_back(where + "ordinal variable with symbol domain");
            break;
        case VariableKind::Categorical: {
            if (schema.symbols.size() < 2) out.push_back(where + "categorical domain needs at least 2 symbols");
            std::set<std::string> seen(schema.symbols.begin(), schema.symbols.end());
            if (seen.size() != schema.symbols.size()) out.push_back(where + "duplicate categorical symbols");
            if (!schema.levels.empty()) out.push_back(where + "categorical variable with integer domain");
            break;
        }
        default:
            if (!schema.levels.empty() || !schema.symbols.empty())
                out.push_back(where + "continuous variable with a finite domain");
    }
    return out;
}

bool conforms(const Value& v, const VariableSchema& schema) {
    if (is_missing(v)) return true;
    switch (schema.kind) {
        case VariableKind::ContinuousReal: {
            const auto* r = std::get_if<Real>(&v);
            return r && std::isfinite(r->value);
        }
        case VariableKind::ContinuousNonnegative: {
            const auto* r = std::get_if<Nonnegative>(&v);
            return r && std::isfinite(r->value) && r->value >= 0.0;
        }
        case VariableKind::Ordinal: {
            const auto* l = std::get_if<OrdinalLevel>(&v);
            return l && schema.level_index(l->level) < schema.levels.size();
        }
        case VariableKind::Categorical: {
            const auto* c = std::get_if<Category>(&v);
            return c && c->code < schema.symbols.size();
        }
    }
    return false;
}

double numeric_value(const Value& v) {
    if (const auto* r = std::get_if<Real>(&v)) return r->value;
    if (const auto* r = std::get_if<Nonnegative>(&v)) return r->value;
    if (const auto* l = std::get_if<OrdinalLevel>(&v)) return static_cast<double>(l->level);
    throw std::invalid_argument("value has no numeric reading");
}

Dataset::Dataset(std::vector<VariableSchema> schemas, std::vector<Value> cells)
    : schemas_(std::move(schemas)), cells_(std::move(cells)) {
    if (schemas_.empty()) throw ValidationError("dataset needs at least one variable");
    if (cells_.size() % schemas_.size() != 0)
        throw ValidationError("cell count " + std::to_string(cells_.size()) + " is not a multiple of " +
                              std::to_string(schemas_.size()) + " variables");
    for (const auto& s : schemas_) {
        auto problems = schema_problems(s);
        if (!problems.empty()) throw ValidationError(problems.front());
    }
}

std::size_t Dataset::index_of(std::string_view name) const {
    for (std::size_t v = 0; v < schemas_.size(); ++v)
        if (schemas_[v].name == name) return v;
    throw std::out_of_range("unknown variable '" + std::string(name) + "'");
}

std::vector<std::size_t> Dataset::input_variables() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < schemas_.size(); ++v)
        if (schemas_[v].role == Role::Input) out.push_back(v);
    return out;
}

std::vector<std::size_t> Dataset::outcome_variables() const {
    std::vector<std::size_t> out;
    for (std::size_t v = 0; v < schemas_.size(); ++v)
        if (schemas_[v].role == Role::Outcome) out.push_back(v);
    return out;
}

Dataset Dataset::subset(std::span<const std::size_t> subjects) const {
    std::vector<Value> cells;
    cells.reserve(subjects.size() * variables());
    for (auto s : subjects) {
        auto r = row(s);
        cells.insert(cells.end(), r.begin(), r.end());
    }
    return Dataset(schemas_, std::move(cells));
}

Dataset Dataset::without_subject(std::size_t s) const {
    std::vector<Value> cells;
    cells.reserve(cells_.size() - variables());
    for (std::size_t i = 0; i < subjects(); ++i) {
        if (i == s) continue;
        auto r = row(i);
        cells.insert(cells.end(), r.begin(), r.end());
    }
    return Dataset(schemas_, std::move(cells));
}

Dataset Dataset::select_columns(std::span<const std::size_t> columns) const {
    std::vector<VariableSchema> schemas;
    for (auto c : columns) schemas.push_back(schemas_[c]);
    std::vector<Value> cells;
    cells.reserve(subjects() * columns.size());
    for (std::size_t s = 0; s < subjects(); ++s)
        for (auto c : columns) cells.push_back(at(s, c));
    return Dataset(std::move(schemas), std::move(cells));
}

namespace {

std::string describe(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Missing>) return "missing";
            else if constexpr (std::is_same_v<T, Real>) return "real " + std::to_string(x.value);
            else if constexpr (std::is_same_v<T, Nonnegative>) return "nonnegative " + std::to_string(x.value);
            else if constexpr (std::is_same_v<T, OrdinalLevel>) return "level " + std::to_string(x.level);
            else return "category code " + std::to_string(x.code);
        },
        v);
}

bool same_observation(const Value& a, const Value& b) { return a == b; }

}  // namespace

ValidationReport validate_dataset(const Dataset& dataset) {
    ValidationReport report;
    std::set<std::string> names;
    for (const auto& s : dataset.schemas()) {
        if (!names.insert(s.name).second) report.schema.push_back("duplicate variable name '" + s.name + "'");
        auto problems = schema_problems(s);
        report.schema.insert(report.schema.end(), problems.begin(), problems.end());
    }
    if (dataset.subjects() == 0) report.schema.push_back("dataset has no subjects");

    for (std::size_t v = 0; v < dataset.variables(); ++v) {
        const auto& schema = dataset.schema(v);
        const Value* first = nullptr;
        bool varies = false;
        for (std::size_t s = 0; s < dataset.subjects(); ++s) {
            const Value& cell = dataset.at(s, v);
            if (!conforms(cell, schema)) {
                report.cells.push_back({s, v, "subject " + std::to_string(s) + ", variable '" + schema.name +
                                                  "': " + describe(cell) + " does not fit " +
                                                  std::string(to_string(schema.kind)) + " domain"});
                continue;
            }
            if (is_missing(cell)) continue;
            if (!first) first = &cell;
            else if (!same_observation(*first, cell)) varies = true;
        }
        if (!varies) report.zero_variability.push_back(schema.name);
    }
    return report;
}

MissingnessProfile missingness_profile(const Dataset& dataset) {
    MissingnessProfile profile;
    const std::size_t V = dataset.variables();
    profile.per_subject.resize(dataset.subjects(), 0);
    std::vector<std::size_t> exactly(V + 1, 0);
    for (std::size_t s = 0; s < dataset.subjects(); ++s) {
        auto r = dataset.row(s);
        profile.per_subject[s] =
            static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](const Value& x) { return is_missing(x); }));
        ++exactly[profile.per_subject[s]];
    }
    profile.at_least.assign(V + 1, 0);
    std::size_t running = 0;
    for (std::size_t m = V + 1; m-- > 0;) {
        running += exactly[m];
        profile.at_least[m] = running;
    }
    return profile;
}

}  // namespace hetmix
