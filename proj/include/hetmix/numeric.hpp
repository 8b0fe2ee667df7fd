#ifndef HETMIX_NUMERIC_HPP
#define HETMIX_NUMERIC_HPP

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace hetmix {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum(exp(x))); -inf for an empty or all -inf input.
template <typename Derived>
double log_sum_exp(const Eigen::DenseBase<Derived>& x) {
    if (x.size() == 0) return kNegInf;
    const double m = x.maxCoeff();
    if (!std::isfinite(m)) return m;
    return m + std::log((x.derived().array() - m).exp().sum());
}

// Log of a probability that may be exactly zero.
inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

}  // namespace hetmix

#endif  // HETMIX_NUMERIC_HPP
