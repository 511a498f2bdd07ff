#pragma once

#include <functional>

#include "km2sls/km.hpp"

namespace km2sls {

// Vector-valued moment map phi(x, z, y) with a declared output dimension.
struct MomentFunction {
    Eigen::Index dim;
    std::function<Eigen::VectorXd(const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& z, double y)>
        eval;
};

// Kaplan-Meier weighted moment sum_i w_(i) * phi(x_(i), z_(i), y_(i)).
// Under no censoring this is the plain sample average of phi. Throws
// EvaluationError if phi returns a wrong dimension or a non-finite value.
Eigen::VectorXd weighted_moment(const SortedSample& s, const KmWeights& kw,
                                const MomentFunction& phi);

// The three weighted Gram aggregates both regression stages are built from:
//   szz = sum_i w_i z_i z_i^T   (L x L, symmetric psd)
//   szx = sum_i w_i z_i x_i^T   (L x K)
//   szy = sum_i w_i y_i z_i     (L)
struct WeightedGrams {
    Eigen::MatrixXd szz;
    Eigen::MatrixXd szx;
    Eigen::VectorXd szy;
};

WeightedGrams weighted_grams(const SortedSample& s, const KmWeights& kw);

}  // namespace km2sls
