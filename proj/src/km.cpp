#include "km2sls/km.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <utility>

namespace km2sls {

StepCdf::StepCdf(std::vector<double> jump_points,
                 std::vector<double> jump_values)
    : jump_points_(std::move(jump_points)),
      jump_values_(std::move(jump_values)) {
    if (jump_points_.size() != jump_values_.size()) {
        throw std::invalid_argument("StepCdf: points/values size mismatch");
    }
    if (std::adjacent_find(jump_points_.begin(), jump_points_.end(),
                           std::greater_equal<double>()) !=
        jump_points_.end()) {
        throw std::invalid_argument(
            "StepCdf: jump points must be strictly increasing");
    }
}

double StepCdf::value(double t) const {
    const auto it =
        std::upper_bound(jump_points_.begin(), jump_points_.end(), t);
    const auto idx = it - jump_points_.begin();
    return idx == 0 ? 0.0 : jump_values_[idx - 1];
}

double StepCdf::left_value(double t) const {
    const auto it =
        std::lower_bound(jump_points_.begin(), jump_points_.end(), t);
    const auto idx = it - jump_points_.begin();
    return idx == 0 ? 0.0 : jump_values_[idx - 1];
}

KmWeights km_weights(const SortedSample& s) {
    const Eigen::Index n = s.n();
    Eigen::VectorXd w(n);
    // The weight formula's product telescopes along runs of events, so the
    // weight is constant between censored observations and only a censored
    // observation updates the running factor. One rounding per censored
    // observation; with no censoring every weight is exactly 1/n.
    double base = 1.0;
    Eigen::Index last_censored = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (s.delta[i]) {
            w[i] = base / static_cast<double>(n - last_censored - 1);
        } else {
            w[i] = 0.0;
            base *= static_cast<double>(n - i) /
                    static_cast<double>(n - last_censored - 1);
            last_censored = i;
        }
    }
    return KmWeights{std::move(w)};
}

StepCdf km_censoring_cdf(const SortedSample& s) {
    const Eigen::Index n = s.n();
    std::vector<double> points;
    std::vector<double> values;
    double survival = 1.0;
    Eigen::Index i = 0;
    while (i < n) {
        // Walk one block of tied follow-up times; all its censored members
        // contribute to the same jump.
        const double t = s.y[i];
        bool any_censored = false;
        for (; i < n && s.y[i] == t; ++i) {
            if (!s.delta[i]) {
                survival *=
                    static_cast<double>(n - i - 1) / static_cast<double>(n - i);
                any_censored = true;
            }
        }
        if (any_censored) {
            points.push_back(t);
            values.push_back(1.0 - survival);
        }
    }
    return StepCdf(std::move(points), std::move(values));
}

StepCdf empirical_cdf(const SortedSample& s) {
    const Eigen::Index n = s.n();
    std::vector<double> points;
    std::vector<double> values;
    Eigen::Index i = 0;
    while (i < n) {
        const double t = s.y[i];
        while (i < n && s.y[i] == t) ++i;
        points.push_back(t);
        values.push_back(static_cast<double>(i) / static_cast<double>(n));
    }
    return StepCdf(std::move(points), std::move(values));
}

}  // namespace km2sls
