#pragma once

#include <vector>

#include "km2sls/sample.hpp"

namespace km2sls {

// Right-continuous step function rising from 0, described by its jump points
// (strictly increasing) and the function value at each jump. Used for the
// Kaplan-Meier censoring CDF and the empirical CDF of the follow-up times.
class StepCdf {
public:
    StepCdf() = default;
    StepCdf(std::vector<double> jump_points, std::vector<double> jump_values);

    // F(t)
    double value(double t) const;
    // F(t-), the limit from the left
    double left_value(double t) const;

    const std::vector<double>& jump_points() const { return jump_points_; }
    const std::vector<double>& jump_values() const { return jump_values_; }

private:
    std::vector<double> jump_points_;
    std::vector<double> jump_values_;
};

// Kaplan-Meier weights aligned with sorted positions. w[i] is zero exactly
// when observation i is censored; the weights sum to 1 exactly when the last
// sorted observation is an event.
struct KmWeights {
    Eigen::VectorXd w;
    double sum() const { return w.sum(); }
};

// Weight attached to each sorted observation:
//   w_(1) = delta_(1)/n,
//   w_(i) = delta_(i)/(n-i+1) * prod_{j<i} ((n-j)/(n-j+1))^{delta_(j)}.
KmWeights km_weights(const SortedSample& s);

// Kaplan-Meier estimate G of the censoring distribution:
//   1 - G(t) = prod_{i: y_(i) <= t} ((n-i)/(n-i+1))^{1-delta_(i)},
// so G jumps only at censored observation times. Satisfies
//   w_(i) = delta_(i) / (n * (1 - G(y_(i)-))).
StepCdf km_censoring_cdf(const SortedSample& s);

// Empirical CDF H of the follow-up times, H(t) = #{y_(i) <= t}/n.
StepCdf empirical_cdf(const SortedSample& s);

}  // namespace km2sls
