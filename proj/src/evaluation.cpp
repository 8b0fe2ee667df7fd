#include "hetmix/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "detail/parallel.hpp"
#include "hetmix/errors.hpp"
#include "hetmix/numeric.hpp"

namespace hetmix {

namespace {

int truth_level(const VariableSchema& schema, const Value& truth) {
    const auto* l = std::get_if<OrdinalLevel>(&truth);
    if (!l || schema.level_index(l->level) >= schema.levels.size())
        throw std::invalid_argument("truth for '" + schema.name + "' is not a level of its domain");
    return l->level;
}

std::size_t truth_code(const VariableSchema& schema, const Value& truth) {
    const auto* c = std::get_if<Category>(&truth);
    if (!c || c->code >= schema.symbols.size())
        throw std::invalid_argument("truth for '" + schema.name + "' is not a symbol of its domain");
    return c->code;
}

double plain_mean(std::span<const double> xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

double expected_absolute_error(const VariableSchema& schema, const Eigen::VectorXd& probabilities, int truth) {
    if (schema.kind != VariableKind::Ordinal) throw std::invalid_argument("EAE needs an ordinal target");
    if (static_cast<std::size_t>(probabilities.size()) != schema.levels.size())
        throw std::invalid_argument("predictive length differs from the ordinal domain");
    double e = 0.0;
    for (std::size_t i = 0; i < schema.levels.size(); ++i)
        e += probabilities[static_cast<Eigen::Index>(i)] * std::abs(schema.levels[i] - truth);
    return e;
}

std::optional<double> expected_absolute_error(const PredictiveDistribution& pred, std::string_view target,
                                              const Value& truth) {
    const auto& t = pred.target(target);
    if (t.schema.kind != VariableKind::Ordinal)
        throw std::invalid_argument("EAE is defined here for ordinal targets only; '" + t.schema.name + "' is " +
                                    std::string(to_string(t.schema.kind)));
    if (is_missing(truth)) return std::nullopt;
    return expected_absolute_error(t.schema, t.finite()->probabilities, truth_level(t.schema, truth));
}

std::optional<double> probability_of_error(const PredictiveDistribution& pred, std::string_view target,
                                           const Value& truth) {
    const auto& t = pred.target(target);
    if (t.schema.kind != VariableKind::Categorical)
        throw std::invalid_argument("probability of error needs a categorical target");
    if (is_missing(truth)) return std::nullopt;
    return 1.0 - t.finite()->probabilities[static_cast<Eigen::Index>(truth_code(t.schema, truth))];
}

std::optional<double> prediction_error(const PredictiveDistribution& pred, std::string_view target,
                                       const Value& truth) {
    if (pred.target(target).schema.kind == VariableKind::Categorical) return probability_of_error(pred, target, truth);
    return expected_absolute_error(pred, target, truth);
}

std::optional<double> chance_eae(const VariableSchema& schema, const Value& truth) {
    if (!schema.finite_domain()) throw std::invalid_argument("chance error needs a finite-domain target");
    if (is_missing(truth)) return std::nullopt;
    if (schema.kind == VariableKind::Categorical) {
        truth_code(schema, truth);
        return 1.0 - 1.0 / static_cast<double>(schema.symbols.size());
    }
    const int x = truth_level(schema, truth);
    double sum = 0.0;
    for (int level : schema.levels) sum += std::abs(level - x);
    return sum / static_cast<double>(schema.levels.size());
}

double max_error(const VariableSchema& schema) {
    if (schema.kind == VariableKind::Categorical) return 1.0;
    if (schema.kind == VariableKind::Ordinal) return static_cast<double>(schema.levels.back() - schema.levels.front());
    throw std::invalid_argument("maximum error is defined for finite-domain targets");
}

double normalized_error(const VariableSchema& schema, double error) { return 100.0 * error / max_error(schema); }

double confidence_score(const MixtureModel& model, std::span<const Value> row,
                        std::span<const std::size_t> input_variables, MissingMode mode) {
    return joint_log_likelihood(model, row, mode, input_variables);
}

Eigen::VectorXd confidence_scores(const MixtureModel& model, const EncodedData& data,
                                  std::span<const std::size_t> input_variables, MissingMode mode) {
    return row_log_sum_exp(component_log_joint(model, data, mode, input_variables));
}

double percentile_rank(double score, std::span<const double> reference) {
    if (reference.empty()) throw std::invalid_argument("percentile rank needs a non-empty reference population");
    const auto below = std::count_if(reference.begin(), reference.end(), [&](double c) { return score > c; });
    return static_cast<double>(below) / static_cast<double>(reference.size());
}

PerformanceRow summarize(std::string target, std::size_t order, std::span<const double> normalized) {
    PerformanceRow row;
    row.target = std::move(target);
    row.order = order;
    row.count = normalized.size();
    if (normalized.empty()) return row;
    row.mean_normalized = plain_mean(normalized);
    if (normalized.size() > 1) {
        double ss = 0.0;
        for (double x : normalized) ss += (x - row.mean_normalized) * (x - row.mean_normalized);
        row.two_sd = 2.0 * std::sqrt(ss / static_cast<double>(normalized.size() - 1));
    }
    return row;
}

std::vector<std::size_t> LooReport::orders() const {
    std::set<std::size_t> out;
    for (const auto& r : performance)
        if (r.order > 0) out.insert(r.order);
    return {out.begin(), out.end()};
}

LooReport loo_evaluate(const Dataset& dataset, const LooConfig& config) {
    config.em.validate();
    const std::size_t N = dataset.subjects();
    if (N < 3) throw ValidationError("leave-one-out needs at least 3 subjects");
    if (config.targets.empty()) throw ValidationError("leave-one-out needs at least one target");

    std::vector<std::size_t> targets;
    for (const auto& name : config.targets) {
        std::size_t v = 0;
        try {
            v = dataset.index_of(name);
        } catch (const std::out_of_range& e) {
            throw ValidationError(e.what());
        }
        const auto& s = dataset.schema(v);
        if (s.role != Role::Outcome) throw ValidationError("target '" + name + "' is not an outcome variable");
        if (!s.finite_domain()) throw ValidationError("target '" + name + "' must be ordinal or categorical");
        targets.push_back(v);
    }
    std::set<std::size_t> order_set(config.orders.begin(), config.orders.end());
    order_set.insert(1);
    if (order_set.count(0)) throw ValidationError("fitted model orders start at 1");
    const std::vector<std::size_t> orders(order_set.begin(), order_set.end());
    const std::vector<std::size_t> inputs = dataset.input_variables();

    struct FoldResult {
        std::vector<EaeRecord> records;
        std::vector<ConfidenceRecord> confidence;
        std::optional<FoldFailure> failure;
    };
    std::vector<FoldResult> folds(N);

    detail::parallel_for(N, config.em.workers, [&](std::size_t i) {
        FoldResult& out = folds[i];
        const Dataset train = dataset.without_subject(i);
        const EncodedData encoded = EncodedData::from(train);
        const auto row = dataset.row(i);
        EmConfig em = config.em;
        em.seed = splitmix64(config.em.seed ^ splitmix64(i));
        em.workers = 1;
        for (auto order : orders) {
            try {
                const FitResult fitted = fit(train, order, em);
                const Eigen::VectorXd population = confidence_scores(fitted.model, encoded, inputs, config.mode);
                const double score = confidence_score(fitted.model, row, inputs, config.mode);
                out.confidence.push_back(
                    {i, order, score,
                     percentile_rank(score, std::span<const double>(population.data(),
                                                                    static_cast<std::size_t>(population.size())))});
                const Eigen::VectorXd posterior = latent_posterior(fitted.model, row, config.mode, inputs);
                const PredictiveDistribution pred = predict_targets(fitted.model, posterior, targets);
                for (std::size_t t = 0; t < targets.size(); ++t) {
                    const auto& schema = dataset.schema(targets[t]);
                    auto err = prediction_error(pred, schema.name, row[targets[t]]);
                    if (err) out.records.push_back({i, schema.name, order, *err, normalized_error(schema, *err)});
                }
            } catch (const Error& e) {
                out.failure = FoldFailure{i, order, e.what()};
                out.records.clear();
                out.confidence.clear();
                return;
            }
        }
    });

    LooReport report;
    for (std::size_t i = 0; i < N; ++i) {
        if (folds[i].failure) {
            report.failures.push_back(*folds[i].failure);
            report.excluded_subjects.push_back(i);
        }
    }
    if (10 * report.failures.size() > N)
        throw TrainingFailure(std::to_string(report.failures.size()) + " of " + std::to_string(N) +
                              " leave-one-out folds failed; first: " + report.failures.front().error);

    for (std::size_t i = 0; i < N; ++i) {
        if (folds[i].failure) continue;
        for (auto v : targets) {
            const auto& schema = dataset.schema(v);
            auto err = chance_eae(schema, dataset.at(i, v));
            if (err) report.records.push_back({i, schema.name, 0, *err, normalized_error(schema, *err)});
        }
        report.records.insert(report.records.end(), folds[i].records.begin(), folds[i].records.end());
        report.confidence.insert(report.confidence.end(), folds[i].confidence.begin(), folds[i].confidence.end());
    }

    for (auto v : targets) {
        const auto& name = dataset.schema(v).name;
        std::map<std::size_t, std::vector<double>> by_order;
        by_order[0];
        for (auto o : orders) by_order[o];
        for (const auto& r : report.records)
            if (r.target == name) by_order[r.order].push_back(r.normalized);
        for (const auto& [order, values] : by_order) {
            report.performance.push_back(summarize(name, order, values));
            if (values.empty())
                report.warnings.push_back("no scored subjects for '" + name + "' at order " + std::to_string(order));
        }
    }
    for (const auto& f : report.failures)
        report.warnings.push_back("fold " + std::to_string(f.subject) + " excluded (order " + std::to_string(f.order) +
                                  "): " + f.error);
    return report;
}

std::vector<ScoredError> join_records(std::span<const EaeRecord> records,
                                      std::span<const ConfidenceRecord> confidence, std::string_view target,
                                      std::size_t order) {
    std::map<std::size_t, double> percentile;
    for (const auto& c : confidence)
        if (c.order == order) percentile[c.subject] = c.percentile;
    std::vector<ScoredError> out;
    for (const auto& r : records) {
        if (r.order != order || r.target != target) continue;
        auto it = percentile.find(r.subject);
        if (it != percentile.end()) out.push_back({it->second, r.normalized});
    }
    return out;
}

std::vector<ThresholdPoint> threshold_curve(std::span<const ScoredError> scored, std::span<const double> thresholds) {
    auto mean_above = [&](double tau, std::size_t& count) -> std::optional<double> {
        double sum = 0.0;
        count = 0;
        for (const auto& s : scored) {
            if (s.percentile >= tau) {
                sum += s.error;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    std::size_t all = 0;
    const auto e0 = mean_above(0.0, all);
    if (!e0) throw std::invalid_argument("threshold curve needs at least one subject at tau = 0");
    std::vector<ThresholdPoint> out;
    for (double tau : thresholds) {
        ThresholdPoint p;
        p.tau = tau;
        p.mean = mean_above(tau, p.count);
        if (p.mean) p.difference = *e0 - *p.mean;
        out.push_back(p);
    }
    return out;
}

ConfidenceBins confidence_bins(std::span<const ScoredError> scored, double cutoff) {
    ConfidenceBins bins;
    double low = 0.0;
    double high = 0.0;
    for (const auto& s : scored) {
        if (s.percentile < cutoff) {
            low += s.error;
            ++bins.low_count;
        } else {
            high += s.error;
            ++bins.high_count;
        }
    }
    if (bins.low_count) bins.low_mean = low / static_cast<double>(bins.low_count);
    if (bins.high_count) bins.high_mean = high / static_cast<double>(bins.high_count);
    if (bins.low_mean && bins.high_mean) bins.decrease = *bins.low_mean - *bins.high_mean;
    else bins.warning = bins.low_count ? "no subjects at or above the cutoff" : "no subjects below the cutoff";
    return bins;
}

double scott_bandwidth(std::span<const double> values) {
    if (values.size() < 2) throw ValidationError("density estimate needs at least 2 values");
    const double m = plain_mean(values);
    double ss = 0.0;
    for (double x : values) ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    if (!(sd > 0.0)) throw ValidationError("density estimate of a degenerate sample (all values identical)");
    return sd * std::pow(static_cast<double>(values.size()), -0.2);
}

std::vector<double> eae_density(std::span<const double> values, std::span<const double> grid) {
    const double h = scott_bandwidth(values);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out;
    out.reserve(grid.size());
    for (double g : grid) {
        double acc = 0.0;
        for (double x : values) {
            const double u = (g - x) / h;
            acc += std::exp(-0.5 * u * u);
        }
        out.push_back(acc * norm);
    }
    return out;
}

}  // namespace hetmix
