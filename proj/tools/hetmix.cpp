#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetmix/demo.hpp"
#include "hetmix/em.hpp"
#include "hetmix/errors.hpp"
#include "hetmix/evaluation.hpp"
#include "hetmix/inference.hpp"
#include "hetmix/io.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hetmix::cli {
namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kValidation = 2, kTraining = 3, kInference = 4, kIo = 5 };

struct Options {
    std::string data;
    std::string schema;
    std::string model;
    std::string evidence;
    std::string out_dir;
    std::string missing_token;
    std::string mode;
    std::string orders = "1-6";
    std::vector<std::string> targets;
    std::size_t order = 1;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t max_iterations = 500;
    double rel_tol = 1e-6;
    std::size_t restarts = 5;
    bool drop_constant = false;
    double cutoff = 0.5;
    double threshold_step = 0.05;
    std::string manifest;
};

EmConfig em_config(const Options& o) {
    EmConfig c;
    c.max_iterations = o.max_iterations;
    c.rel_tol = o.rel_tol;
    c.restarts = o.restarts;
    c.seed = o.seed;
    c.workers = o.workers;
    c.validate();
    return c;
}

json em_json(const Options& o) {
    return {{"seed", o.seed},       {"workers", o.workers},         {"max_iterations", o.max_iterations},
            {"rel_tol", o.rel_tol}, {"restarts", o.restarts},       {"init", "dirichlet_responsibilities"}};
}

std::vector<std::size_t> parse_orders(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    auto number = [&](const std::string& s) -> std::size_t {
        std::size_t pos = 0;
        long long v = -1;
        try {
            v = std::stoll(s, &pos);
        } catch (const std::exception&) {
        }
        if (pos != s.size() || v < 1) throw std::invalid_argument("invalid model order '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(number(part));
            continue;
        }
        const auto lo = number(part.substr(0, dash));
        const auto hi = number(part.substr(dash + 1));
        if (hi < lo) throw std::invalid_argument("empty order range '" + part + "'");
        for (auto k = lo; k <= hi; ++k) out.push_back(k);
    }
    if (out.empty()) throw std::invalid_argument("no model orders given");
    std::set<std::size_t> unique(out.begin(), out.end());
    return {unique.begin(), unique.end()};
}

std::string join(const std::vector<std::string>& xs, std::size_t limit = 10) {
    std::string out;
    for (std::size_t i = 0; i < xs.size() && i < limit; ++i) out += (i ? "; " : "") + xs[i];
    if (xs.size() > limit) out += "; ... (" + std::to_string(xs.size() - limit) + " more)";
    return out;
}

Dataset load_dataset(const Options& o, Manifest& manifest) {
    const std::string schema_text = io::read_file(o.schema);
    const std::string data_text = io::read_file(o.data);
    manifest.add_input("schema", o.schema, schema_text);
    manifest.add_input("data", o.data, data_text);
    const auto schemas = io::parse_schema(schema_text);
    Dataset data = io::parse_csv(data_text, schemas, {o.missing_token});
    ValidationReport report = validate_dataset(data);
    if (!report.cells.empty() || !report.schema.empty()) {
        std::vector<std::string> messages = report.schema;
        for (const auto& c : report.cells) messages.push_back(c.message);
        throw ValidationError("dataset failed validation: " + join(messages));
    }
    if (!report.zero_variability.empty()) {
        if (!o.drop_constant)
            throw ValidationError("variables without variability (use --drop-constant to drop them): " +
                                  join(report.zero_variability, 1000));
        std::vector<std::size_t> keep;
        for (std::size_t v = 0; v < data.variables(); ++v) {
            const auto& name = data.schema(v).name;
            if (std::find(report.zero_variability.begin(), report.zero_variability.end(), name) ==
                report.zero_variability.end())
                keep.push_back(v);
        }
        if (keep.empty()) throw ValidationError("every variable lacks variability");
        for (const auto& name : report.zero_variability) {
            std::cerr << "dropped variable without variability: " << name << "\n";
            manifest.warn("dropped variable without variability: " + name);
        }
        data = data.select_columns(keep);
    }
    return data;
}

MixtureModel load_model(const std::string& path, Manifest& manifest) {
    const std::string text = io::read_file(path);
    manifest.add_input("model", path, text);
    return io::parse_model(text);
}

std::string trace_csv(const TrainingTrace& trace) {
    std::string out = "iteration,nll\n";
    for (std::size_t i = 0; i < trace.nll.size(); ++i)
        out += std::to_string(i + 1) + "," + io::format_double(trace.nll[i]) + "\n";
    return out;
}

json trace_json(const TrainingTrace& trace) {
    json restarts = json::array();
    for (std::size_t r = 0; r < trace.restart_nll.size(); ++r) {
        if (trace.restart_nll[r]) restarts.push_back({{"restart", r}, {"nll", *trace.restart_nll[r]}});
        else restarts.push_back({{"restart", r}, {"error", trace.restart_errors[r]}});
    }
    return {{"chosen_restart", trace.restart},
            {"converged", trace.converged},
            {"iterations", trace.iterations},
            {"final_nll", trace.nll.back()},
            {"restarts", restarts}};
}

int cmd_fit(const Options& o, Manifest& m) {
    const Dataset data = load_dataset(o, m);
    const FitResult r = fit(data, o.order, em_config(o));
    const fs::path out(o.out_dir);
    m.write_output(out, "model.json", "hetmix-model/1", io::write_model(r.model));
    m.write_output(out, "trace.csv", "hetmix-trace/1", trace_csv(r.trace));
    json result = trace_json(r.trace);
    result["order"] = o.order;
    result["parameters"] = parameter_count(r.model);
    result["bic"] = bic_value(parameter_count(r.model), data.subjects(), r.trace.nll.back());
    m.set_result(result);
    return kOk;
}

int cmd_select(const Options& o, Manifest& m) {
    const Dataset data = load_dataset(o, m);
    const auto orders = parse_orders(o.orders);
    if (orders.back() - orders.front() + 1 != orders.size())
        throw std::invalid_argument("order selection needs a contiguous range");
    const OrderSelection sel = select_order(data, orders.front(), orders.back(), em_config(o));
    std::string table = "order,parameters,nll,bic,status\n";
    for (const auto& row : sel.table) {
        table += std::to_string(row.order) + ",";
        if (row.ok)
            table += std::to_string(row.parameters) + "," + io::format_double(row.nll) + "," +
                     io::format_double(row.bic) + ",ok\n";
        else
            table += "NA,NA,NA,failed\n";
    }
    for (const auto& w : sel.warnings) {
        std::cerr << "warning: " << w << "\n";
        m.warn(w);
    }
    const fs::path out(o.out_dir);
    m.write_output(out, "bic.csv", "hetmix-bic/1", table);
    m.write_output(out, "model.json", "hetmix-model/1", io::write_model(sel.best.model));
    m.write_output(out, "trace.csv", "hetmix-trace/1", trace_csv(sel.best.trace));
    json result = trace_json(sel.best.trace);
    result["best_order"] = sel.best_order;
    m.set_result(result);
    std::cout << "best order: " << sel.best_order << "\n";
    return kOk;
}

json value_json(const Value& v, const VariableSchema& schema) {
    return std::visit(
        [&](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Missing>) return nullptr;
            else if constexpr (std::is_same_v<T, Real> || std::is_same_v<T, Nonnegative>) return x.value;
            else if constexpr (std::is_same_v<T, OrdinalLevel>) return x.level;
            else return schema.symbols.at(x.code);
        },
        v);
}

json family_json(const FamilyParams& p) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, GaussianParams>)
                return {{"family", "gaussian"}, {"mu", x.mu}, {"sigma2", x.sigma2}};
            else if constexpr (std::is_same_v<T, InflatedGammaParams>)
                return {{"family", "inflated_gamma"}, {"t", x.t}, {"theta", x.theta}, {"k", x.k}};
            else
                return nullptr;
        },
        p);
}

json predictive_json(const PredictiveDistribution& pred) {
    json targets = json::object();
    for (const auto& t : pred.targets) {
        json j;
        j["kind"] = std::string(to_string(t.schema.kind));
        j["point"] = value_json(point_predict(pred, t.schema.name), t.schema);
        if (const auto* f = t.finite()) {
            if (t.schema.kind == VariableKind::Ordinal) j["domain"] = t.schema.levels;
            else j["domain"] = t.schema.symbols;
            j["probabilities"] = std::vector<double>(f->probabilities.data(),
                                                     f->probabilities.data() + f->probabilities.size());
            json ranking = json::array();
            for (const auto& r : rank_outcomes(pred, t.schema.name)) ranking.push_back(value_json(r.value, t.schema));
            j["ranking"] = ranking;
        } else {
            const auto& c = std::get<ContinuousPredictive>(t.distribution);
            j["weights"] = std::vector<double>(c.weights.data(), c.weights.data() + c.weights.size());
            json comps = json::array();
            for (const auto& p : c.components) comps.push_back(family_json(p));
            j["components"] = comps;
        }
        targets[t.schema.name] = j;
    }
    return targets;
}

int cmd_infer(const Options& o, Manifest& m) {
    const MixtureModel model = load_model(o.model, m);
    const MissingMode mode = parse_missing_mode(o.mode);
    const std::string evidence_text = io::read_file(o.evidence);
    m.add_input("evidence", o.evidence, evidence_text);
    const io::PartialRows rows = io::parse_partial_csv(evidence_text, model.schemas, {o.missing_token});

    std::vector<std::string> targets = o.targets;
    if (targets.empty())
        for (const auto& s : model.schemas)
            if (s.role == Role::Outcome) targets.push_back(s.name);
    std::set<std::size_t> target_idx;
    for (const auto& t : targets) {
        try {
            target_idx.insert(model.index_of(t));
        } catch (const std::out_of_range&) {
            throw InferenceError("unknown target '" + t + "'");
        }
    }
    std::vector<std::size_t> evidence_vars;
    for (std::size_t v = 0; v < model.variables(); ++v)
        if (rows.present[v] && !target_idx.count(v)) evidence_vars.push_back(v);

    std::string out;
    std::size_t failures = 0;
    for (std::size_t r = 0; r < rows.rows.size(); ++r) {
        json rec;
        rec["record"] = r;
        try {
            InferenceRequest req{evidence_from_row(rows.rows[r], evidence_vars), targets, mode};
            const PredictiveDistribution pred = infer(model, req);
            rec["posterior"] = std::vector<double>(pred.posterior.data(), pred.posterior.data() + pred.posterior.size());
            rec["targets"] = predictive_json(pred);
        } catch (const InferenceError& e) {
            rec["error"] = e.what();
            ++failures;
        }
        out += rec.dump() + "\n";
    }
    m.write_output(fs::path(o.out_dir), "predictions.jsonl", "hetmix-predictions/1", out);
    m.set_result({{"records", rows.rows.size()}, {"failed_records", failures}, {"mode", o.mode}});
    if (failures) {
        std::cerr << json{{"error", {{"kind", "inference"},
                                     {"message", std::to_string(failures) + " record(s) failed"}}}}
                         .dump()
                  << "\n";
        return kInference;
    }
    return kOk;
}

std::string csv_number(const std::optional<double>& x) { return x ? io::format_double(*x) : "NA"; }

int cmd_evaluate(const Options& o, Manifest& m) {
    const Dataset data = load_dataset(o, m);
    LooConfig cfg;
    cfg.orders = parse_orders(o.orders);
    cfg.mode = parse_missing_mode(o.mode);
    cfg.em = em_config(o);
    cfg.targets = o.targets;
    if (cfg.targets.empty())
        for (auto v : data.outcome_variables())
            if (data.schema(v).finite_domain()) cfg.targets.push_back(data.schema(v).name);
    if (!(o.threshold_step > 0.0 && o.threshold_step <= 1.0))
        throw std::invalid_argument("threshold step must lie in (0, 1]");

    const LooReport report = loo_evaluate(data, cfg);
    for (const auto& w : report.warnings) {
        std::cerr << "warning: " << w << "\n";
        m.warn(w);
    }

    std::string perf = "target,order,mean_normalized_eae,two_sd,count\n";
    for (const auto& r : report.performance)
        perf += r.target + "," + std::to_string(r.order) + "," +
                (r.count ? io::format_double(r.mean_normalized) : "NA") + "," +
                (r.count ? io::format_double(r.two_sd) : "NA") + "," + std::to_string(r.count) + "\n";

    std::string records = "subject,target,order,eae,normalized_eae\n";
    for (const auto& r : report.records)
        records += std::to_string(r.subject) + "," + r.target + "," + std::to_string(r.order) + "," +
                   io::format_double(r.eae) + "," + io::format_double(r.normalized) + "\n";

    std::string conf = "subject,order,log_score,percentile\n";
    for (const auto& c : report.confidence)
        conf += std::to_string(c.subject) + "," + std::to_string(c.order) + "," + io::format_double(c.log_score) +
                "," + io::format_double(c.percentile) + "\n";

    std::vector<double> taus;
    for (std::size_t k = 0; static_cast<double>(k) * o.threshold_step <= 1.0 + 1e-12; ++k)
        taus.push_back(std::round(static_cast<double>(k) * o.threshold_step * 1e12) / 1e12);
    std::vector<double> grid;
    for (int k = 0; k <= 200; ++k) grid.push_back(0.5 * k);

    std::string bins = "target,order,cutoff,low_count,low_mean,high_count,high_mean,decrease\n";
    std::string curve = "target,order,tau,count,mean,difference\n";
    std::string density = "target,order,bandwidth,x,density\n";
    for (const auto& target : cfg.targets) {
        for (auto order : report.orders()) {
            const auto scored = join_records(report.records, report.confidence, target, order);
            if (scored.empty()) continue;
            const ConfidenceBins b = confidence_bins(scored, o.cutoff);
            if (!b.warning.empty()) m.warn(target + " order " + std::to_string(order) + ": " + b.warning);
            bins += target + "," + std::to_string(order) + "," + io::format_double(o.cutoff) + "," +
                    std::to_string(b.low_count) + "," + csv_number(b.low_mean) + "," + std::to_string(b.high_count) +
                    "," + csv_number(b.high_mean) + "," + csv_number(b.decrease) + "\n";
            for (const auto& p : threshold_curve(scored, taus))
                curve += target + "," + std::to_string(order) + "," + io::format_double(p.tau) + "," +
                         std::to_string(p.count) + "," + csv_number(p.mean) + "," + csv_number(p.difference) + "\n";
        }
        for (std::size_t order = 0; order <= (report.orders().empty() ? 0 : report.orders().back()); ++order) {
            std::vector<double> values;
            for (const auto& r : report.records)
                if (r.target == target && r.order == order) values.push_back(r.normalized);
            if (values.empty()) continue;
            try {
                const double h = scott_bandwidth(values);
                const auto d = eae_density(values, grid);
                for (std::size_t g = 0; g < grid.size(); ++g)
                    density += target + "," + std::to_string(order) + "," + io::format_double(h) + "," +
                               io::format_double(grid[g]) + "," + io::format_double(d[g]) + "\n";
            } catch (const ValidationError& e) {
                m.warn(target + " order " + std::to_string(order) + " density skipped: " + e.what());
            }
        }
    }

    const fs::path out(o.out_dir);
    m.write_output(out, "performance.csv", "hetmix-performance/1", perf);
    m.write_output(out, "eae_records.csv", "hetmix-eae-records/1", records);
    m.write_output(out, "confidence_records.csv", "hetmix-confidence-records/1", conf);
    m.write_output(out, "confidence_bins.csv", "hetmix-confidence-bins/1", bins);
    m.write_output(out, "threshold_curve.csv", "hetmix-threshold-curve/1", curve);
    m.write_output(out, "eae_density.csv", "hetmix-eae-density/1", density);
    json failed = json::array();
    for (const auto& f : report.failures) failed.push_back({{"subject", f.subject}, {"order", f.order}, {"error", f.error}});
    m.set_result({{"mode", o.mode}, {"targets", cfg.targets}, {"failed_folds", failed}});
    return kOk;
}

int cmd_simulate(const Options& o, Manifest& m) {
    if (o.n == 0) throw ValidationError("--n must be at least 1");
    const MixtureModel model = load_model(o.model, m);
    Rng rng(o.seed);
    const Cohort cohort = sample_cohort(model, o.n, rng);
    std::string labels = "subject,component\n";
    for (std::size_t s = 0; s < cohort.labels.size(); ++s)
        labels += std::to_string(s) + "," + std::to_string(cohort.labels[s]) + "\n";
    const fs::path out(o.out_dir);
    m.write_output(out, "cohort.csv", "csv", io::write_csv(cohort.data, {o.missing_token}));
    m.write_output(out, "labels.csv", "hetmix-labels/1", labels);
    m.write_output(out, "schema.json", "hetmix-schema/1", io::write_schema(model.schemas));
    m.set_result({{"subjects", o.n}});
    return kOk;
}

int cmd_demo_model(const Options& o, Manifest& m) {
    const MixtureModel model = demo_generator();
    const fs::path out(o.out_dir);
    m.write_output(out, "model.json", "hetmix-model/1", io::write_model(model));
    m.write_output(out, "schema.json", "hetmix-schema/1", io::write_schema(model.schemas));
    return kOk;
}

int cmd_profile(const Options& o, Manifest& m) {
    const std::string schema_text = io::read_file(o.schema);
    const std::string data_text = io::read_file(o.data);
    m.add_input("schema", o.schema, schema_text);
    m.add_input("data", o.data, data_text);
    const Dataset data = io::parse_csv(data_text, io::parse_schema(schema_text), {o.missing_token});
    const ValidationReport report = validate_dataset(data);
    json cells = json::array();
    for (const auto& c : report.cells)
        cells.push_back({{"subject", c.subject}, {"variable", data.schema(c.variable).name}, {"message", c.message}});
    const json validation = {{"ok", report.ok()},
                             {"cells", cells},
                             {"zero_variability", report.zero_variability},
                             {"schema", report.schema}};
    const MissingnessProfile profile = missingness_profile(data);
    std::string curve = "missing_at_least,subjects\n";
    for (std::size_t k = 0; k < profile.at_least.size(); ++k)
        curve += std::to_string(k) + "," + std::to_string(profile.at_least[k]) + "\n";
    const fs::path out(o.out_dir);
    m.write_output(out, "validation.json", "hetmix-validation/1", validation.dump(2) + "\n");
    m.write_output(out, "missingness.csv", "hetmix-missingness/1", curve);
    return report.ok() ? kOk : kValidation;
}

int run(std::vector<std::string> args);

int cmd_replay(const Options& o) {
    const fs::path manifest_path(o.manifest);
    const json doc = json::parse(io::read_file(manifest_path));
    if (doc.value("format", std::string()) != "hetmix-manifest") throw ValidationError("not a hetmix manifest");
    for (const auto& [role, input] : doc.at("inputs").items()) {
        const std::string path = input.at("path").get<std::string>();
        if (sha256_hex(io::read_file(path)) != input.at("sha256").get<std::string>())
            throw ValidationError("input '" + role + "' (" + path + ") changed since the recorded run");
    }
    const fs::path out = o.out_dir.empty() ? manifest_path.parent_path() / "replay" : fs::path(o.out_dir);
    std::vector<std::string> args{"hetmix"};
    for (const auto& a : doc.at("argv")) args.push_back(a.get<std::string>());
    args.push_back("--out-dir");
    args.push_back(out.string());
    const int code = run(args);
    json mismatched = json::array();
    for (const auto& [name, output] : doc.at("outputs").items()) {
        std::string actual;
        try {
            actual = sha256_hex(io::read_file(out / name));
        } catch (const IoError&) {
        }
        if (actual != output.at("sha256").get<std::string>()) mismatched.push_back(name);
    }
    std::cout << json{{"replayed", doc.at("command")}, {"exit_code", code}, {"identical", mismatched.empty()},
                      {"mismatched", mismatched}}
                     .dump()
              << "\n";
    return mismatched.empty() ? code : kUsage;
}

// Arguments as recorded in the manifest: input paths made absolute, output
// directory removed so that replays can redirect it.
std::vector<std::string> recorded_argv(const std::vector<std::string>& args) {
    static const std::set<std::string> path_flags{"--data", "--schema", "--model", "--evidence"};
    std::vector<std::string> out;
    auto absolute = [](const std::string& p) { return fs::absolute(p).lexically_normal().string(); };
    for (std::size_t i = 1; i < args.size(); ++i) {
        const std::string& a = args[i];
        const auto eq = a.find('=');
        const std::string flag = a.substr(0, eq);
        if (flag == "--out-dir") {
            if (eq == std::string::npos) ++i;
            continue;
        }
        if (path_flags.count(flag)) {
            if (eq != std::string::npos) {
                out.push_back(flag + "=" + absolute(a.substr(eq + 1)));
            } else {
                out.push_back(a);
                if (i + 1 < args.size()) out.push_back(absolute(args[++i]));
            }
            continue;
        }
        out.push_back(a);
    }
    return out;
}

void add_em_options(CLI::App* sub, Options& o) {
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--max-iterations", o.max_iterations, "EM iteration cap")->check(CLI::PositiveNumber);
    sub->add_option("--rel-tol", o.rel_tol, "Relative NLL change that stops EM");
    sub->add_option("--restarts", o.restarts, "EM restarts per order")->check(CLI::PositiveNumber);
}

void add_data_options(CLI::App* sub, Options& o) {
    sub->add_option("--data", o.data, "CSV data file")->required();
    sub->add_option("--schema", o.schema, "Schema file")->required();
    sub->add_flag("--drop-constant", o.drop_constant, "Drop variables without variability instead of failing");
}

void add_output(CLI::App* sub, Options& o) {
    sub->add_option("--out-dir", o.out_dir, "Output directory")->required();
    sub->add_option("--missing-token", o.missing_token, "Cell text that marks a missing value");
}

json config_json(const std::string& command, const Options& o) {
    json c = {{"command", command}, {"missing_token", o.missing_token}};
    if (command == "fit" || command == "select" || command == "evaluate") {
        c["em"] = em_json(o);
        c["drop_constant"] = o.drop_constant;
    }
    if (command == "fit") c["order"] = o.order;
    if (command == "select" || command == "evaluate") c["orders"] = o.orders;
    if (command == "infer" || command == "evaluate") {
        c["mode"] = o.mode;
        c["targets"] = o.targets;
    }
    if (command == "evaluate") {
        c["cutoff"] = o.cutoff;
        c["threshold_step"] = o.threshold_step;
    }
    if (command == "simulate") {
        c["n"] = o.n;
        c["seed"] = o.seed;
    }
    return c;
}

int run(std::vector<std::string> args) {
    Options o;
    CLI::App app{"Mixture models for heterogeneous tabular data with missing values", "hetmix"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    auto* fit_cmd = app.add_subcommand("fit", "Fit a mixture of fixed order with EM");
    add_data_options(fit_cmd, o);
    add_em_options(fit_cmd, o);
    add_output(fit_cmd, o);
    fit_cmd->add_option("--order", o.order, "Number of components")->required()->check(CLI::PositiveNumber);

    auto* select_cmd = app.add_subcommand("select", "Choose the model order by BIC");
    add_data_options(select_cmd, o);
    add_em_options(select_cmd, o);
    add_output(select_cmd, o);
    select_cmd->add_option("--orders", o.orders, "Contiguous order range, e.g. 1-6")->capture_default_str();

    auto* infer_cmd = app.add_subcommand("infer", "Infer target distributions from evidence records");
    infer_cmd->add_option("--model", o.model, "Model file")->required();
    infer_cmd->add_option("--evidence", o.evidence, "CSV of evidence records")->required();
    infer_cmd->add_option("--mode", o.mode, "model_missing or ignore_missing")->required()->check(CLI::IsMember({"model_missing", "ignore_missing"}));
    infer_cmd->add_option("--targets", o.targets, "Target variables (default: outcome variables)")->delimiter(',');
    add_output(infer_cmd, o);

    auto* eval_cmd = app.add_subcommand("evaluate", "Leave-one-out evaluation with confidence analysis");
    add_data_options(eval_cmd, o);
    add_em_options(eval_cmd, o);
    add_output(eval_cmd, o);
    eval_cmd->add_option("--orders", o.orders, "Model orders, e.g. 1-6 or 1,3")->capture_default_str();
    eval_cmd->add_option("--mode", o.mode, "model_missing or ignore_missing")->required()->check(CLI::IsMember({"model_missing", "ignore_missing"}));
    eval_cmd->add_option("--targets", o.targets, "Outcome targets (default: finite-domain outcomes)")->delimiter(',');
    eval_cmd->add_option("--cutoff", o.cutoff, "Percentile cutoff for confidence bins")->capture_default_str();
    eval_cmd->add_option("--threshold-step", o.threshold_step, "Spacing of the threshold grid")->capture_default_str();

    auto* sim_cmd = app.add_subcommand("simulate", "Sample a cohort from a model file");
    sim_cmd->add_option("--model", o.model, "Generating model file")->required();
    sim_cmd->add_option("--n", o.n, "Number of subjects")->required();
    sim_cmd->add_option("--seed", o.seed, "Random seed");
    add_output(sim_cmd, o);

    auto* demo_cmd = app.add_subcommand("demo-model", "Write the bundled three-component demo generator");
    add_output(demo_cmd, o);

    auto* profile_cmd = app.add_subcommand("profile", "Validate a dataset and report its missingness profile");
    profile_cmd->add_option("--data", o.data, "CSV data file")->required();
    profile_cmd->add_option("--schema", o.schema, "Schema file")->required();
    add_output(profile_cmd, o);

    auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest and compare outputs");
    replay_cmd->add_option("manifest", o.manifest, "manifest.json of a previous run")->required();
    replay_cmd->add_option("--out-dir", o.out_dir, "Directory for the replayed outputs");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    auto fail = [](const char* kind, const std::string& message, int code) {
        std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
        return code;
    };

    try {
        if (replay_cmd->parsed()) return cmd_replay(o);
        CLI::App* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        Manifest manifest(command, recorded_argv(args), config_json(command, o));
        int code = kOk;
        if (sub == fit_cmd) code = cmd_fit(o, manifest);
        else if (sub == select_cmd) code = cmd_select(o, manifest);
        else if (sub == infer_cmd) code = cmd_infer(o, manifest);
        else if (sub == eval_cmd) code = cmd_evaluate(o, manifest);
        else if (sub == sim_cmd) code = cmd_simulate(o, manifest);
        else if (sub == demo_cmd) code = cmd_demo_model(o, manifest);
        else if (sub == profile_cmd) code = cmd_profile(o, manifest);
        manifest.save(fs::path(o.out_dir));
        return code;
    } catch (const ValidationError& e) {
        return fail("validation", e.what(), kValidation);
    } catch (const std::invalid_argument& e) {
        return fail("validation", e.what(), kValidation);
    } catch (const TrainingFailure& e) {
        return fail("training", e.what(), kTraining);
    } catch (const ComponentCollapse& e) {
        return fail("training", e.what(), kTraining);
    } catch (const EstimationError& e) {
        return fail("training", e.what(), kTraining);
    } catch (const InferenceError& e) {
        return fail("inference", e.what(), kInference);
    } catch (const ImpossibleObservation& e) {
        return fail("inference", e.what(), kInference);
    } catch (const IoError& e) {
        return fail("io", e.what(), kIo);
    } catch (const fs::filesystem_error& e) {
        return fail("io", e.what(), kIo);
    } catch (const nlohmann::json::exception& e) {
        return fail("validation", e.what(), kValidation);
    }
}

}  // namespace
}  // namespace hetmix::cli

int main(int argc, char** argv) { return hetmix::cli::run(std::vector<std::string>(argv, argv + argc)); }
