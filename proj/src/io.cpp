#include "hetmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <system_error>

#include <json.hpp>

#include "hetmix/errors.hpp"

namespace hetmix::io {

using nlohmann::json;

namespace {

json schema_to_json(const VariableSchema& s) {
    json j;
    j["name"] = s.name;
    j["kind"] = std::string(to_string(s.kind));
    if (s.kind == VariableKind::Ordinal) j["domain"] = s.levels;
    if (s.kind == VariableKind::Categorical) j["domain"] = s.symbols;
    j["role"] = std::string(to_string(s.role));
    return j;
}

VariableSchema schema_from_json(const json& j) {
    VariableSchema s;
    s.name = j.at("name").get<std::string>();
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.role = parse_role(j.value("role", std::string("input")));
    if (s.kind == VariableKind::Ordinal) s.levels = j.at("domain").get<std::vector<int>>();
    if (s.kind == VariableKind::Categorical) s.symbols = j.at("domain").get<std::vector<std::string>>();
    if (!s.finite_domain() && j.contains("domain") && !j.at("domain").empty())
        throw ValidationError("continuous variable '" + s.name + "' must not list a domain");
    auto problems = schema_problems(s);
    if (!problems.empty()) throw ValidationError(problems.front());
    return s;
}

std::vector<VariableSchema> schemas_from_json(const json& list) {
    std::vector<VariableSchema> out;
    std::set<std::string> names;
    for (const auto& j : list) {
        out.push_back(schema_from_json(j));
        if (!names.insert(out.back().name).second)
            throw ValidationError("duplicate variable name '" + out.back().name + "'");
    }
    if (out.empty()) throw ValidationError("schema lists no variables");
    return out;
}

template <typename Fn>
auto with_json_errors(const char* what, Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + ": " + e.what());
    }
}

// RFC 4180-style records: quoted fields may hold separators, quotes ("") and newlines.
std::vector<std::vector<std::string>> split_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted CSV field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

double parse_double(const std::string& text, std::size_t line, const VariableSchema& schema) {
    double x = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x))
        throw ValidationError("line " + std::to_string(line) + ", column '" + schema.name + "': '" + text +
                              "' is not a finite number");
    return x;
}

Value parse_cell(const std::string& text, std::size_t line, const VariableSchema& schema, const CsvOptions& options) {
    if (text == options.missing_token) return Missing{};
    switch (schema.kind) {
        case VariableKind::ContinuousReal: return Real{parse_double(text, line, schema)};
        case VariableKind::ContinuousNonnegative: return Nonnegative{parse_double(text, line, schema)};
        case VariableKind::Ordinal: {
            int level = 0;
            const char* end = text.data() + text.size();
            auto [ptr, ec] = std::from_chars(text.data(), end, level);
            if (ec != std::errc() || ptr != end)
                throw ValidationError("line " + std::to_string(line) + ", column '" + schema.name + "': '" + text +
                                      "' is not an integer level");
            return OrdinalLevel{level};
        }
        case VariableKind::Categorical:
            // Unknown symbols map to an out-of-domain code so validation can report them.
            return Category{schema.symbol_index(text)};
    }
    throw std::logic_error("unhandled variable kind");
}

std::vector<std::size_t> header_mapping(const std::vector<std::string>& header,
                                        const std::vector<VariableSchema>& schemas, bool require_all) {
    std::vector<std::size_t> column_to_schema;
    std::set<std::size_t> seen;
    for (const auto& name : header) {
        std::size_t v = 0;
        while (v < schemas.size() && schemas[v].name != name) ++v;
        if (v == schemas.size()) throw ValidationError("CSV column '" + name + "' is not in the schema");
        if (!seen.insert(v).second) throw ValidationError("CSV column '" + name + "' appears twice");
        column_to_schema.push_back(v);
    }
    if (require_all && seen.size() != schemas.size()) {
        for (const auto& s : schemas)
            if (std::find(header.begin(), header.end(), s.name) == header.end())
                throw ValidationError("CSV is missing column '" + s.name + "'");
    }
    return column_to_schema;
}

void check_missing_token(const std::vector<VariableSchema>& schemas, const CsvOptions& options) {
    for (const auto& s : schemas)
        for (const auto& sym : s.symbols)
            if (sym == options.missing_token)
                throw ValidationError("categorical symbol '" + sym + "' of '" + s.name +
                                      "' collides with the missing token");
}

PartialRows parse_rows(const std::string& text, const std::vector<VariableSchema>& schemas,
                       const CsvOptions& options, bool require_all) {
    check_missing_token(schemas, options);
    auto records = split_csv(text);
    if (records.empty()) throw ValidationError("CSV has no header row");
    const auto mapping = header_mapping(records.front(), schemas, require_all);
    PartialRows out;
    out.present.assign(schemas.size(), false);
    for (auto v : mapping) out.present[v] = true;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() != mapping.size())
            throw ValidationError("line " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) +
                                  " fields, header has " + std::to_string(mapping.size()));
        std::vector<Value> row(schemas.size(), Value{Missing{}});
        for (std::size_t c = 0; c < rec.size(); ++c)
            row[mapping[c]] = parse_cell(rec[c], r + 1, schemas[mapping[c]], options);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string format_cell(const Value& v, const VariableSchema& schema, const CsvOptions& options) {
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Missing>) return options.missing_token;
            else if constexpr (std::is_same_v<T, Real> || std::is_same_v<T, Nonnegative>) return format_double(x.value);
            else if constexpr (std::is_same_v<T, OrdinalLevel>) return std::to_string(x.level);
            else {
                if (x.code >= schema.symbols.size())
                    throw ValidationError("category code outside the domain of '" + schema.name + "'");
                return quote_field(schema.symbols[x.code]);
            }
        },
        v);
}

json params_to_json(const FamilyParams& params) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, GaussianParams>)
                return {{"family", "gaussian"}, {"mu", p.mu}, {"sigma2", p.sigma2}};
            else if constexpr (std::is_same_v<T, InflatedGammaParams>)
                return {{"family", "inflated_gamma"}, {"t", p.t}, {"theta", p.theta}, {"k", p.k}};
            else if constexpr (std::is_same_v<T, QuantizedGaussianParams>)
                return {{"family", "quantized_gaussian"}, {"mu", p.mu}, {"sigma2", p.sigma2}};
            else
                return {{"family", "categorical"}, {"p", std::vector<double>(p.p.data(), p.p.data() + p.p.size())}};
        },
        params);
}

FamilyParams params_from_json(const json& j, const VariableSchema& schema) {
    const auto family = j.at("family").get<std::string>();
    if (family == "gaussian") return GaussianParams{j.at("mu").get<double>(), j.at("sigma2").get<double>()};
    if (family == "inflated_gamma")
        return InflatedGammaParams{j.at("t").get<double>(), j.at("theta").get<double>(), j.at("k").get<double>()};
    if (family == "quantized_gaussian")
        return QuantizedGaussianParams{j.at("mu").get<double>(), j.at("sigma2").get<double>(), schema.levels};
    if (family == "categorical") {
        const auto p = j.at("p").get<std::vector<double>>();
        return CategoricalParams{Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()))};
    }
    throw ValidationError("unknown distribution family '" + family + "'");
}

}  // namespace

std::vector<VariableSchema> parse_schema(const std::string& text) {
    return with_json_errors("schema file", [&] {
        const json doc = json::parse(text);
        const int version = doc.at("format_version").get<int>();
        if (version != kSchemaFormatVersion)
            throw ValidationError("unsupported schema format_version " + std::to_string(version));
        return schemas_from_json(doc.at("variables"));
    });
}

std::string write_schema(const std::vector<VariableSchema>& schemas) {
    json doc;
    doc["format_version"] = kSchemaFormatVersion;
    doc["variables"] = json::array();
    for (const auto& s : schemas) doc["variables"].push_back(schema_to_json(s));
    return doc.dump(2) + "\n";
}

Dataset parse_csv(const std::string& text, const std::vector<VariableSchema>& schemas, const CsvOptions& options) {
    PartialRows rows = parse_rows(text, schemas, options, true);
    std::vector<Value> cells;
    cells.reserve(rows.rows.size() * schemas.size());
    for (auto& r : rows.rows) cells.insert(cells.end(), r.begin(), r.end());
    return Dataset(schemas, std::move(cells));
}

PartialRows parse_partial_csv(const std::string& text, const std::vector<VariableSchema>& schemas,
                              const CsvOptions& options) {
    return parse_rows(text, schemas, options, false);
}

std::string write_csv(const Dataset& dataset, const CsvOptions& options) {
    check_missing_token(dataset.schemas(), options);
    std::string out;
    for (std::size_t v = 0; v < dataset.variables(); ++v) {
        if (v) out += ',';
        out += quote_field(dataset.schema(v).name);
    }
    out += '\n';
    for (std::size_t s = 0; s < dataset.subjects(); ++s) {
        for (std::size_t v = 0; v < dataset.variables(); ++v) {
            if (v) out += ',';
            std::string cell = format_cell(dataset.at(s, v), dataset.schema(v), options);
            // A lone empty field would read back as a blank line.
            if (dataset.variables() == 1 && cell.empty()) cell = "\"\"";
            out += cell;
        }
        out += '\n';
    }
    return out;
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc()) throw std::runtime_error("cannot format double");
    return std::string(buf, ptr);
}

std::string write_model(const MixtureModel& model) {
    validate_model(model);
    json doc;
    doc["format"] = "hetmix-model";
    doc["format_version"] = kModelFormatVersion;
    doc["order"] = model.order();
    doc["schemas"] = json::array();
    for (const auto& s : model.schemas) doc["schemas"].push_back(schema_to_json(s));
    doc["weights"] = std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size());
    doc["missing_prob"] = json::array();
    doc["components"] = json::array();
    for (std::size_t z = 0; z < model.order(); ++z) {
        std::vector<double> q(model.variables());
        json cells = json::array();
        for (std::size_t v = 0; v < model.variables(); ++v) {
            q[v] = model.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v));
            cells.push_back(params_to_json(model.theta(z, v)));
        }
        doc["missing_prob"].push_back(q);
        doc["components"].push_back(std::move(cells));
    }
    return doc.dump(1) + "\n";
}

MixtureModel parse_model(const std::string& text) {
    MixtureModel model = with_json_errors("model file", [&] {
        const json doc = json::parse(text);
        if (doc.value("format", std::string()) != "hetmix-model") throw ValidationError("not a hetmix model file");
        if (!doc.contains("format_version")) throw ValidationError("model file lacks format_version");
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion)
            throw ValidationError("unsupported model format_version " + std::to_string(version));
        MixtureModel m;
        m.schemas = schemas_from_json(doc.at("schemas"));
        const auto w = doc.at("weights").get<std::vector<double>>();
        const std::size_t Z = w.size();
        const std::size_t V = m.schemas.size();
        m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(Z));
        const auto& q = doc.at("missing_prob");
        const auto& comps = doc.at("components");
        if (q.size() != Z || comps.size() != Z) throw ValidationError("model grids do not match the component count");
        m.missing_prob.resize(static_cast<Eigen::Index>(Z), static_cast<Eigen::Index>(V));
        m.params.reserve(Z * V);
        for (std::size_t z = 0; z < Z; ++z) {
            if (q[z].size() != V || comps[z].size() != V)
                throw ValidationError("model grids do not match the variable count");
            for (std::size_t v = 0; v < V; ++v) {
                m.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v)) = q[z][v].get<double>();
                m.params.push_back(params_from_json(comps[z][v], m.schemas[v]));
            }
        }
        return m;
    });
    validate_model(model);
    return model;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("error writing '" + tmp + "'");
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move '" + tmp + "' to '" + path.string() + "': " + ec.message());
}

}  // namespace hetmix::io
