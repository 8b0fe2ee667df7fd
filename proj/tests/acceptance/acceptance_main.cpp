// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli_runner.hpp"
#include "hetmix/columns.hpp"
#include "hetmix/demo.hpp"
#include "hetmix/em.hpp"
#include "hetmix/errors.hpp"
#include "hetmix/evaluation.hpp"
#include "hetmix/inference.hpp"
#include "hetmix/io.hpp"
#include "support.hpp"

using namespace hetmix;
using namespace hetmix::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. likelihood, posterior, inference and confidence against enumeration

Outcome oracle_equivalence() {
    constexpr double tol = 1e-10;
    Rng rng(20240101);
    double worst = 0.0;
    int cases = 0;
    for (; cases < 1000; ++cases) {
        const std::size_t Z = 1 + static_cast<std::size_t>(cases % 3);
        const std::size_t V = 1 + static_cast<std::size_t>((cases / 3) % 3);
        const auto m = random_model(rng, Z, V);
        const auto row = random_row(m, rng, 0.3);
        const auto mode = cases % 2 ? MissingMode::IgnoreMissing : MissingMode::ModelMissing;
        const auto all = oracle::all_vars(m);

        worst = std::max(worst, std::abs(joint_log_likelihood(m, row, mode) - std::log(oracle::likelihood(m, row, mode, all))));
        const auto post = latent_posterior(m, row, mode);
        const auto ref_post = oracle::posterior(m, row, mode, all);
        for (std::size_t z = 0; z < Z; ++z) worst = std::max(worst, std::abs(post[static_cast<Eigen::Index>(z)] - ref_post[z]));

        // the last variable is the target, the rest are evidence and inputs
        const std::size_t target = V - 1;
        std::vector<std::size_t> evidence(all.begin(), all.end() - 1);
        const auto pred = infer(m, {evidence_from_row(row, evidence), {m.schemas[target].name}, mode});
        const auto& t = pred.targets[0];
        if (const auto* f = t.finite()) {
            const auto ref = oracle::conditional(m, row, mode, evidence, target);
            for (std::size_t d = 0; d < ref.size(); ++d)
                worst = std::max(worst, std::abs(f->probabilities[static_cast<Eigen::Index>(d)] - ref[d]));
        } else {
            const auto w = oracle::posterior(m, row, mode, evidence);
            const double x = m.schemas[target].kind == VariableKind::ContinuousReal ? 0.7 : 1.3;
            const Value probe = m.schemas[target].kind == VariableKind::ContinuousReal ? Value{Real{x}} : Value{Nonnegative{x}};
            double density = 0;
            for (std::size_t z = 0; z < Z; ++z) density += w[z] * oracle::density(m.theta(z, target), probe);
            const auto& c = std::get<ContinuousPredictive>(t.distribution);
            worst = std::max(worst, std::abs(c.log_density(x) - std::log(density)));
        }
        const double c = confidence_score(m, row, evidence, mode);
        const double ref_c = evidence.empty() ? 0.0 : std::log(oracle::likelihood(m, row, mode, evidence));
        worst = std::max(worst, std::abs(c - ref_c));
    }
    return {worst <= tol, fmt("%d cases, max deviation %.3g (tolerance %.0e)", cases, worst, tol)};
}

// ---------------------------------------------------------------------------
// 2. EM never increases the negative log-likelihood

Outcome em_monotonicity() {
    constexpr double slack = 1e-8;
    Rng rng(77);
    double worst_abs = 0.0, worst_rel = 0.0;
    int triples = 0, failed_fits = 0;
    for (; triples < 200; ++triples) {
        const std::size_t gen_order = 1 + static_cast<std::size_t>(triples % 3);
        const std::size_t V = 2 + static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 6)(rng));
        const std::size_t n = static_cast<std::size_t>(std::uniform_int_distribution<int>(60, 400)(rng));
        const auto gen = random_model(rng, gen_order, V);
        const auto cohort = sample_cohort(gen, n, rng);
        EmConfig cfg;
        cfg.seed = rng();
        cfg.restarts = 1;
        cfg.max_iterations = 300;
        cfg.rel_tol = 1e-10;
        const std::size_t order = 1 + static_cast<std::size_t>(triples % 4);
        try {
            const auto r = fit(cohort.data, order, cfg);
            for (std::size_t i = 1; i < r.trace.nll.size(); ++i) {
                const double rise = r.trace.nll[i] - r.trace.nll[i - 1];
                worst_abs = std::max(worst_abs, rise);
                worst_rel = std::max(worst_rel, rise / std::max(1.0, std::abs(r.trace.nll[i - 1])));
            }
        } catch (const TrainingFailure&) {
            ++failed_fits;
        }
    }
    return {worst_abs <= slack && failed_fits < triples / 10,
            fmt("%d triples (%d failed fits), largest per-iteration NLL rise %.3g (slack %.0e), relative %.3g", triples,
                failed_fits, worst_abs, slack, worst_rel)};
}

// ---------------------------------------------------------------------------
// 3. parameter recovery at n = 10^4

MixtureModel recovery_model() {
    MixtureModel m;
    m.schemas = {real_var("g"), nonneg_var("ig"), ordinal_var("qg", {1, 2, 3, 4, 5, 6, 7, 8, 9}),
                 categorical_var("c", {"a", "b", "c", "d"}), real_var("g2")};
    m.weights = Eigen::Vector2d(0.55, 0.45);
    m.missing_prob.resize(2, 5);
    m.missing_prob << 0.10, 0.03, 0.20, 0.05, 0.30,  //
                      0.25, 0.02, 0.05, 0.15, 0.10;
    m.params = {GaussianParams{-2.0, 1.5},
                InflatedGammaParams{0.05, 1.5, 2.0},
                QuantizedGaussianParams{3.0, 1.2, {1, 2, 3, 4, 5, 6, 7, 8, 9}},
                CategoricalParams{(Eigen::VectorXd(4) << 0.5, 0.3, 0.15, 0.05).finished()},
                GaussianParams{10.0, 4.0},
                GaussianParams{2.5, 0.8},
                InflatedGammaParams{0.08, 4.0, 3.5},
                QuantizedGaussianParams{6.5, 1.0, {1, 2, 3, 4, 5, 6, 7, 8, 9}},
                CategoricalParams{(Eigen::VectorXd(4) << 0.1, 0.2, 0.3, 0.4).finished()},
                GaussianParams{14.0, 3.0}};
    return m;
}

Outcome parameter_recovery() {
    const auto gen = recovery_model();
    const std::size_t n = 10000;
    Rng rng(3003);
    const auto cohort = sample_cohort(gen, n, rng);
    EmConfig cfg;
    cfg.seed = 11;
    const auto fitted = fit(cohort.data, 2, cfg).model;

    // align fitted components with generating ones by the first Gaussian mean
    std::vector<std::size_t> map{0, 1};
    if (std::get<GaussianParams>(fitted.theta(0, 0)).mu > std::get<GaussianParams>(fitted.theta(1, 0)).mu) map = {1, 0};

    std::vector<std::string> misses;
    double worst_w = 0, worst_q = 0, worst_z = 0, worst_gamma = 0;
    for (std::size_t z = 0; z < 2; ++z) {
        const auto fz = static_cast<Eigen::Index>(map[z]);
        const auto gz = static_cast<Eigen::Index>(z);
        worst_w = std::max(worst_w, std::abs(fitted.weights[fz] - gen.weights[gz]));
        for (Eigen::Index v = 0; v < 5; ++v)
            worst_q = std::max(worst_q, std::abs(fitted.missing_prob(fz, v) - gen.missing_prob(gz, v)));
        for (std::size_t v = 0; v < 5; ++v) {
            const double observed = static_cast<double>(n) * gen.weights[gz] * (1 - gen.missing_prob(gz, static_cast<Eigen::Index>(v)));
            const auto& g = gen.theta(z, v);
            const auto& f = fitted.theta(map[z], v);
            double mu_err = 0, se = 0;
            if (const auto* gg = std::get_if<GaussianParams>(&g)) {
                mu_err = std::get<GaussianParams>(f).mu - gg->mu;
                se = std::sqrt(gg->sigma2 / observed);
            } else if (const auto* gq = std::get_if<QuantizedGaussianParams>(&g)) {
                mu_err = std::get<QuantizedGaussianParams>(f).mu - gq->mu;
                const Eigen::VectorXd p = masses(*gq);
                double mean = 0, var = 0;
                for (Eigen::Index i = 0; i < p.size(); ++i) mean += p[i] * gq->levels[static_cast<std::size_t>(i)];
                for (Eigen::Index i = 0; i < p.size(); ++i)
                    var += p[i] * std::pow(gq->levels[static_cast<std::size_t>(i)] - mean, 2);
                se = std::sqrt(var / observed);
            } else if (const auto* gi = std::get_if<InflatedGammaParams>(&g)) {
                const auto& fi = std::get<InflatedGammaParams>(f);
                const double dk = std::abs(fi.k / gi->k - 1), dt = std::abs(fi.theta / gi->theta - 1);
                worst_gamma = std::max({worst_gamma, dk, dt});
                continue;
            } else {
                continue;
            }
            worst_z = std::max(worst_z, std::abs(mu_err) / se);
        }
    }
    const bool pass = worst_w <= 0.02 && worst_q <= 0.05 && worst_z <= 2.0 && worst_gamma <= 0.05;
    return {pass, fmt("weights %.4f (<= 0.02), q %.4f (<= 0.05), means %.2f SE (<= 2), gamma k/theta %.2f%% (<= 5%%)",
                      worst_w, worst_q, worst_z, 100 * worst_gamma)};
}

// ---------------------------------------------------------------------------
// 4. BIC order selection on the demo generator

Outcome order_selection() {
    const auto gen = demo_generator();
    int hits = 0;
    bool nll_ok = true;
    std::string picks;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed * 7919);
        const auto cohort = sample_cohort(gen, 5000, rng);
        EmConfig cfg;
        cfg.seed = seed;
        const auto sel = select_order(cohort.data, 1, 6, cfg);
        hits += sel.best_order == 3;
        picks += std::to_string(sel.best_order);
        for (std::size_t k = 1; k < sel.table.size(); ++k)
            if (!sel.table[k].ok || !sel.table[k - 1].ok ||
                sel.table[k].nll > sel.table[k - 1].nll + 1e-6 * std::abs(sel.table[k - 1].nll))
                nll_ok = false;
    }
    return {hits >= 9 && nll_ok, fmt("order 3 chosen in %d/10 seeds (picks %s), NLL column non-increasing: %s", hits,
                                     picks.c_str(), nll_ok ? "yes" : "no")};
}

// ---------------------------------------------------------------------------
// 5. chance > baseline > fitted on the component-separating target

LooReport separation_report;

Outcome uncertainty_reduction() {
    Rng rng(5005);
    const auto cohort = sample_cohort(demo_generator(), 400, rng);
    LooConfig cfg;
    cfg.orders = {2, 3, 4};
    cfg.targets = {"gose_6m"};
    cfg.em.seed = 17;
    separation_report = loo_evaluate(cohort.data, cfg);
    double chance = 0, baseline = 0, worst_fitted = 0;
    for (const auto& row : separation_report.performance) {
        if (row.order == 0) chance = row.mean_normalized;
        else if (row.order == 1) baseline = row.mean_normalized;
        else worst_fitted = std::max(worst_fitted, row.mean_normalized);
    }
    std::string table;
    for (const auto& row : separation_report.performance)
        table += fmt(" |Z|=%zu: %.2f", row.order, row.mean_normalized);
    const bool pass = chance - baseline >= 5.0 && baseline - worst_fitted >= 5.0 && separation_report.failures.empty();
    return {pass, fmt("normalized EAE%s; gaps %.2f and %.2f points (>= 5)", table.c_str(), chance - baseline,
                      baseline - worst_fitted)};
}

// ---------------------------------------------------------------------------
// 6. exact metric values

Outcome metric_exactness() {
    std::vector<int> levels{1, 2, 3, 4, 5, 6, 7, 8};
    const auto gose = ordinal_var("gose", levels, Role::Outcome);
    const auto chance = *chance_eae(gose, OrdinalLevel{8});
    const auto uniform = expected_absolute_error(gose, Eigen::VectorXd::Constant(8, 0.125), 8);
    bool pass = chance == 3.5 && uniform == 3.5 && max_error(gose) == 7.0 && normalized_error(gose, chance) == 50.0;
    std::string cats;
    for (std::size_t V = 2; V <= 8; ++V) {
        std::vector<std::string> symbols;
        for (std::size_t i = 0; i < V; ++i) symbols.push_back(std::string(1, static_cast<char>('a' + i)));
        const auto cat = categorical_var("c", symbols, Role::Outcome);
        for (std::size_t truth = 0; truth < V; ++truth)
            pass = pass && *chance_eae(cat, Category{truth}) == 1.0 - 1.0 / static_cast<double>(V);
    }
    for (int truth : levels) {
        Eigen::VectorXd point = Eigen::VectorXd::Zero(8);
        point[truth - 1] = 1.0;
        pass = pass && expected_absolute_error(gose, point, truth) == 0.0;
    }
    return {pass, fmt("chance EAE {1..8}, truth 8 = %.17g (%.17g%%); categorical chance = 1 - 1/V for V = 2..8; point "
                      "mass EAE = 0",
                      chance, normalized_error(gose, chance))};
}

// ---------------------------------------------------------------------------
// 7. percentile uniformity, E(0), out-of-distribution slice

Outcome confidence_machinery() {
    const auto gen = demo_generator();
    Rng rng(7007);
    const auto train = sample_cohort(gen, 1000, rng);
    EmConfig cfg;
    cfg.seed = 23;
    const auto model = fit(train.data, 3, cfg).model;
    const auto inputs = train.data.input_variables();
    const Eigen::VectorXd scores = confidence_scores(model, EncodedData::from(train.data), inputs, MissingMode::ModelMissing);
    const std::vector<double> population(scores.data(), scores.data() + scores.size());
    const std::size_t N = population.size();

    // sorted percentiles sit on the lattice k/N, with tied scores sharing the lowest rank
    std::vector<double> sorted = population;
    std::sort(sorted.begin(), sorted.end());
    bool uniform = true;
    std::size_t ties = 0;
    for (std::size_t k = 0; k < N; ++k) {
        std::size_t first = k;
        while (first > 0 && sorted[first - 1] == sorted[k]) --first;
        ties += first != k;
        uniform = uniform && percentile_rank(sorted[k], population) == static_cast<double>(first) / static_cast<double>(N);
    }

    // E(0) on the leave-one-out records of criterion 5
    if (separation_report.performance.empty()) uncertainty_reduction();
    bool e0 = true;
    for (auto order : separation_report.orders()) {
        const auto scored = join_records(separation_report.records, separation_report.confidence, "gose_6m", order);
        double sum = 0;
        for (const auto& s : scored) sum += s.error;
        const std::vector<double> zero{0.0};
        e0 = e0 && !scored.empty() && *threshold_curve(scored, zero)[0].mean == sum / static_cast<double>(scored.size());
    }
    e0 = e0 && !separation_report.orders().empty();

    // each cell of an out-of-distribution subject comes from an independently chosen component
    std::vector<Value> cells;
    const std::size_t slice = 100;
    for (std::size_t s = 0; s < slice; ++s) {
        for (std::size_t v = 0; v < gen.variables(); ++v) {
            const auto z = std::uniform_int_distribution<std::size_t>(0, gen.order() - 1)(rng);
            const bool missing = std::uniform_real_distribution<double>(0, 1)(rng) < gen.missing_prob(static_cast<Eigen::Index>(z), static_cast<Eigen::Index>(v));
            cells.push_back(missing ? Value{Missing{}} : sample(gen.theta(z, v), rng));
        }
    }
    const Dataset ood(gen.schemas, std::move(cells));
    const Eigen::VectorXd ood_scores = confidence_scores(model, EncodedData::from(ood), inputs, MissingMode::ModelMissing);
    double mean_percentile = 0;
    for (double c : ood_scores) mean_percentile += percentile_rank(c, population);
    mean_percentile /= static_cast<double>(slice);

    return {uniform && e0 && mean_percentile < 0.2,
            fmt("training percentiles on k/N lattice: %s (%zu tied); E(0) equals mean EAE: %s; OOD mean percentile "
                "%.4f (< 0.2)",
                uniform ? "yes" : "no", ties, e0 ? "yes" : "no", mean_percentile)};
}

// ---------------------------------------------------------------------------
// 8. every command replays byte-identically from its manifest

Outcome determinism() {
    const fs::path root = fs::path(HETMIX_TEST_TMP);
    fs::remove_all(root);
    auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    const auto demo = root / "demo", sim = root / "sim";
    run_cli("demo-model --out-dir " + q(demo), root / "log");
    run_cli("simulate --model " + q(demo / "model.json") + " --n 150 --seed 4 --out-dir " + q(sim), root / "log");

    const std::string data = " --data " + q(sim / "cohort.csv") + " --schema " + q(sim / "schema.json");
    io::write_file_atomic(root / "evidence.csv", "age,gcs,sex,uchl1\n40,14,F,0.5\n70,6,,2\n");
    const std::vector<std::pair<std::string, std::string>> commands{
        {"demo-model", "demo-model"},
        {"simulate", "simulate --model " + q(demo / "model.json") + " --n 150 --seed 4"},
        {"profile", "profile" + data},
        {"fit", "fit" + data + " --order 3 --seed 5"},
        {"select", "select" + data + " --orders 1-4 --seed 6 --workers 2"},
        {"infer", "infer --model " + q(demo / "model.json") + " --evidence " + q(root / "evidence.csv") +
                      " --mode ignore_missing"},
        {"evaluate", "evaluate" + data + " --orders 2 --restarts 2 --mode model_missing --seed 8 --workers 2"},
    };
    std::vector<std::string> failures;
    for (const auto& [name, args] : commands) {
        const auto first = root / (name + "_a");
        const auto r = run_cli(args + " --out-dir " + q(first), root / (name + "_log"));
        if (r.code != 0) {
            failures.push_back(name + " exited " + std::to_string(r.code));
            continue;
        }
        const auto replay = run_cli("replay " + q(first / "manifest.json") + " --out-dir " + q(root / (name + "_b")),
                                    root / (name + "_replay_log"));
        // the replay summary is the last line; the replayed command may print before it
        const auto last = replay.out.find_last_of('\n', replay.out.size() >= 2 ? replay.out.size() - 2 : 0);
        const auto line = last == std::string::npos ? replay.out : replay.out.substr(last + 1);
        const auto doc = nlohmann::json::parse(line, nullptr, false);
        if (replay.code != 0 || !doc.is_object() || !doc.value("identical", false)) {
            failures.push_back(name + " replay differs");
            continue;
        }
        for (const auto& [file, entry] : nlohmann::json::parse(slurp(first / "manifest.json"))["outputs"].items())
            if (slurp(first / file) != slurp(root / (name + "_b") / file)) failures.push_back(name + "/" + file);
    }
    std::string detail = fmt("%zu commands re-run from manifests", commands.size());
    for (const auto& f : failures) detail += "; " + f;
    return {failures.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    // optional arguments select criteria by number
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"oracle equivalence", oracle_equivalence},   {"EM monotonicity", em_monotonicity},
        {"parameter recovery", parameter_recovery},   {"order selection", order_selection},
        {"uncertainty reduction", uncertainty_reduction}, {"metric exactness", metric_exactness},
        {"confidence machinery", confidence_machinery}, {"determinism", determinism},
    };
    int failed = 0;
    std::vector<bool> selected(criteria.size(), argc == 1);
    for (int a = 1; a < argc; ++a) {
        const auto k = static_cast<std::size_t>(std::atoi(argv[a]));
        if (k >= 1 && k <= criteria.size()) selected[k - 1] = true;
    }
    std::size_t run = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i]) continue;
        ++run;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("[%s] %zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", run - static_cast<std::size_t>(failed), run);
    return failed ? 1 : 0;
}
