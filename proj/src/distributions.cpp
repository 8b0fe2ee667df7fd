#include "hetmix/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hetmix/errors.hpp"
#include "hetmix/numeric.hpp"

namespace hetmix {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

VariableKind family_kind(const FamilyParams& params) {
    return std::visit(overloaded{
                          [](const GaussianParams&) { return VariableKind::ContinuousReal; },
                          [](const InflatedGammaParams&) { return VariableKind::ContinuousNonnegative; },
                          [](const QuantizedGaussianParams&) { return VariableKind::Ordinal; },
                          [](const CategoricalParams&) { return VariableKind::Categorical; },
                      },
                      params);
}

std::size_t parameter_count(const FamilyParams& params) {
    return std::visit(overloaded{
                          [](const GaussianParams&) -> std::size_t { return 2; },
                          [](const InflatedGammaParams&) -> std::size_t { return 3; },
                          [](const QuantizedGaussianParams&) -> std::size_t { return 2; },
                          [](const CategoricalParams& c) -> std::size_t {
                              return c.p.size() > 0 ? static_cast<std::size_t>(c.p.size()) - 1 : 0;
                          },
                      },
                      params);
}

double log_density(const GaussianParams& params, double x) {
    const double d = x - params.mu;
    return -0.5 * std::log(2.0 * std::numbers::pi * params.sigma2) - d * d / (2.0 * params.sigma2);
}

double log_density(const InflatedGammaParams& params, double x) {
    if (x == 0.0) return safe_log(params.t);
    const double k = params.k;
    return safe_log(1.0 - params.t) + (k - 1.0) * std::log(x) - x / params.theta - std::lgamma(k) -
           k * std::log(params.theta);
}

Eigen::VectorXd log_masses(const QuantizedGaussianParams& params) {
    const auto n = static_cast<Eigen::Index>(params.levels.size());
    Eigen::VectorXd e(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = params.levels[static_cast<std::size_t>(i)] - params.mu;
        e[i] = -d * d / (2.0 * params.sigma2);
    }
    return e.array() - log_sum_exp(e);
}

Eigen::VectorXd masses(const QuantizedGaussianParams& params) { return log_masses(params).array().exp(); }

double log_mass(const QuantizedGaussianParams& params, int level) {
    auto it = std::lower_bound(params.levels.begin(), params.levels.end(), level);
    if (it == params.levels.end() || *it != level)
        throw std::invalid_argument("level " + std::to_string(level) + " outside the quantized domain");
    return log_masses(params)[it - params.levels.begin()];
}

double log_mass(const CategoricalParams& params, std::size_t code) {
    if (code >= static_cast<std::size_t>(params.p.size()))
        throw std::invalid_argument("category code " + std::to_string(code) + " outside the domain");
    return safe_log(params.p[static_cast<Eigen::Index>(code)]);
}

double log_density(const FamilyParams& params, const Value& x) {
    auto mismatch = [] { return std::invalid_argument("value does not match the distribution family"); };
    return std::visit(overloaded{
                          [&](const GaussianParams& p) {
                              const auto* r = std::get_if<Real>(&x);
                              if (!r) throw mismatch();
                              return log_density(p, r->value);
                          },
                          [&](const InflatedGammaParams& p) {
                              const auto* r = std::get_if<Nonnegative>(&x);
                              if (!r || r->value < 0.0) throw mismatch();
                              return log_density(p, r->value);
                          },
                          [&](const QuantizedGaussianParams& p) {
                              const auto* l = std::get_if<OrdinalLevel>(&x);
                              if (!l) throw mismatch();
                              return log_mass(p, l->level);
                          },
                          [&](const CategoricalParams& p) {
                              const auto* c = std::get_if<Category>(&x);
                              if (!c) throw mismatch();
                              return log_mass(p, c->code);
                          },
                      },
                      params);
}

Value sample(const FamilyParams& params, Rng& rng) {
    return std::visit(overloaded{
                          [&](const GaussianParams& p) -> Value {
                              std::normal_distribution<double> d(p.mu, std::sqrt(p.sigma2));
                              return Real{d(rng)};
                          },
                          [&](const InflatedGammaParams& p) -> Value {
                              std::uniform_real_distribution<double> u(0.0, 1.0);
                              if (u(rng) < p.t) return Nonnegative{0.0};
                              std::gamma_distribution<double> g(p.k, p.theta);
                              double x = 0.0;
                              while (x <= 0.0) x = g(rng);
                              return Nonnegative{x};
                          },
                          [&](const QuantizedGaussianParams& p) -> Value {
                              const Eigen::VectorXd m = masses(p);
                              std::discrete_distribution<std::size_t> d(m.data(), m.data() + m.size());
                              return OrdinalLevel{p.levels[d(rng)]};
                          },
                          [&](const CategoricalParams& p) -> Value {
                              std::discrete_distribution<std::size_t> d(p.p.data(), p.p.data() + p.p.size());
                              return Category{d(rng)};
                          },
                      },
                      params);
}

double mean(const FamilyParams& params) {
    return std::visit(overloaded{
                          [](const GaussianParams& p) { return p.mu; },
                          [](const InflatedGammaParams& p) { return (1.0 - p.t) * p.k * p.theta; },
                          [](const QuantizedGaussianParams& p) {
                              const Eigen::VectorXd m = masses(p);
                              double e = 0.0;
                              for (Eigen::Index i = 0; i < m.size(); ++i)
                                  e += m[i] * p.levels[static_cast<std::size_t>(i)];
                              return e;
                          },
                          [](const CategoricalParams&) -> double {
                              throw std::invalid_argument("categorical distribution has no mean");
                          },
                      },
                      params);
}

FitOptions FitOptions::for_scale(double scale) {
    FitOptions o;
    if (std::isfinite(scale) && scale > 0.0) o.variance_floor = 1e-6 * scale * scale;
    return o;
}

void MomentStats::add(double x, double w) {
    if (w == 0.0) return;
    const double total = weight_ + w;
    const double delta = x - mean_;
    mean_ += (w / total) * delta;
    m2_ += w * delta * (x - mean_);
    weight_ = total;
}

void InflatedGammaStats::add(double x, double w) {
    if (w == 0.0) return;
    weight_ += w;
    if (x == 0.0) {
        zero_weight_ += w;
        return;
    }
    positive_.add(x, w);
    log_mean_ += (w / positive_.weight()) * (std::log(x) - log_mean_);
}

double gamma_shape_estimate(double gamma, const FitOptions& options) {
    if (!(gamma > 0.0)) return options.max_shape;
    const double k = (3.0 - gamma + std::sqrt((gamma - 3.0) * (gamma - 3.0) + 24.0 * gamma)) / (12.0 * gamma);
    return std::clamp(k, options.min_shape, options.max_shape);
}

GaussianParams estimate_gaussian(const MomentStats& stats, const FitOptions& options) {
    if (!(stats.weight() > 0.0)) throw EstimationError("Gaussian update with zero total weight");
    return {stats.mean(), std::max(stats.variance(), options.variance_floor)};
}

InflatedGammaParams estimate_inflated_gamma(const InflatedGammaStats& stats, const FitOptions& options) {
    if (!(stats.weight() > 0.0)) throw EstimationError("inflated Gamma update with zero total weight");
    InflatedGammaParams p;
    p.t = std::clamp(stats.zero_weight() / stats.weight(), 0.0, 1.0);
    if (!(stats.positive_weight() > 0.0)) {
        p.k = options.default_shape;
        p.theta = options.default_scale;
        return p;
    }
    const double m = stats.positive_mean();
    const double gamma = std::log(m) - stats.positive_mean_log();
    p.k = gamma_shape_estimate(gamma, options);
    p.theta = std::max(m / p.k, options.min_scale);
    return p;
}

QuantizedGaussianParams estimate_quantized_gaussian(const MomentStats& stats, std::vector<int> levels,
                                                    const FitOptions& options) {
    if (!(stats.weight() > 0.0)) throw EstimationError("quantized Gaussian update with zero total weight");
    return {stats.mean(), std::max(stats.variance(), options.variance_floor), std::move(levels)};
}

CategoricalParams estimate_categorical(const CategoricalStats& stats, const FitOptions& options) {
    const double total = stats.weight();
    if (!(total > 0.0)) throw EstimationError("categorical update with zero total weight");
    Eigen::VectorXd p = stats.weights().array() / total + options.probability_floor;
    p /= p.sum();
    return {std::move(p)};
}

FamilyParams weighted_mle(const VariableSchema& schema, std::span<const WeightedSample> samples,
                          const FitOptions& options) {
    for (const auto& s : samples) {
        if (!std::isfinite(s.weight) || s.weight < 0.0)
            throw std::invalid_argument("sample weights must be finite and nonnegative");
        if (!conforms(s.value, schema)) throw std::invalid_argument("sample does not fit '" + schema.name + "'");
    }
    switch (schema.kind) {
        case VariableKind::ContinuousReal: {
            MomentStats st;
            for (const auto& s : samples)
                if (!is_missing(s.value)) st.add(std::get<Real>(s.value).value, s.weight);
            return estimate_gaussian(st, options);
        }
        case VariableKind::ContinuousNonnegative: {
            InflatedGammaStats st;
            for (const auto& s : samples)
                if (!is_missing(s.value)) st.add(std::get<Nonnegative>(s.value).value, s.weight);
            return estimate_inflated_gamma(st, options);
        }
        case VariableKind::Ordinal: {
            MomentStats st;
            for (const auto& s : samples)
                if (!is_missing(s.value)) st.add(std::get<OrdinalLevel>(s.value).level, s.weight);
            return estimate_quantized_gaussian(st, schema.levels, options);
        }
        case VariableKind::Categorical: {
            CategoricalStats st(schema.symbols.size());
            for (const auto& s : samples)
                if (!is_missing(s.value)) st.add(std::get<Category>(s.value).code, s.weight);
            return estimate_categorical(st, options);
        }
    }
    throw std::logic_error("unhandled variable kind");
}

FamilyParams default_params(const VariableSchema& schema, const FitOptions& options) {
    switch (schema.kind) {
        case VariableKind::ContinuousReal: return GaussianParams{0.0, 1.0};
        case VariableKind::ContinuousNonnegative:
            return InflatedGammaParams{0.0, options.default_scale, options.default_shape};
        case VariableKind::Ordinal: {
            MomentStats st;
            for (int l : schema.levels) st.add(l, 1.0);
            return QuantizedGaussianParams{st.mean(), std::max(st.variance(), options.variance_floor), schema.levels};
        }
        case VariableKind::Categorical: {
            const auto n = static_cast<Eigen::Index>(schema.symbols.size());
            return CategoricalParams{Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n))};
        }
    }
    throw std::logic_error("unhandled variable kind");
}

std::string params_problem(const FamilyParams& params, const VariableSchema& schema) {
    if (family_kind(params) != schema.kind)
        return "family does not match kind " + std::string(to_string(schema.kind));
    return std::visit(
        overloaded{
            [](const GaussianParams& p) -> std::string {
                if (!std::isfinite(p.mu) || !std::isfinite(p.sigma2) || !(p.sigma2 > 0.0))
                    return "Gaussian needs finite mu and sigma2 > 0";
                return {};
            },
            [](const InflatedGammaParams& p) -> std::string {
                if (!(p.t >= 0.0 && p.t <= 1.0)) return "inflated Gamma t outside [0, 1]";
                if (!std::isfinite(p.theta) || !(p.theta > 0.0) || !std::isfinite(p.k) || !(p.k > 0.0))
                    return "inflated Gamma needs finite theta > 0 and k > 0";
                return {};
            },
            [&](const QuantizedGaussianParams& p) -> std::string {
                if (p.levels != schema.levels) return "quantized Gaussian levels differ from the schema domain";
                if (!std::isfinite(p.mu) || !std::isfinite(p.sigma2) || !(p.sigma2 > 0.0))
                    return "quantized Gaussian needs finite mu and sigma2 > 0";
                return {};
            },
            [&](const CategoricalParams& p) -> std::string {
                if (static_cast<std::size_t>(p.p.size()) != schema.symbols.size())
                    return "categorical probability vector length differs from the domain";
                if ((p.p.array() < 0.0).any() || !p.p.allFinite()) return "negative categorical probability";
                if (std::abs(p.p.sum() - 1.0) > 1e-12) return "categorical probabilities do not sum to 1";
                return {};
            },
        },
        params);
}

}  // namespace hetmix
