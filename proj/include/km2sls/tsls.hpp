#pragma once

#include "km2sls/stute.hpp"

namespace km2sls {

// First-stage coefficients: gamma (L x K) solves szz * gamma = szx, i.e. the
// weighted least-squares projection of each regressor on the instruments.
struct FirstStageFit {
    Eigen::MatrixXd gamma;
};

FirstStageFit first_stage(const WeightedGrams& g);

// Second-stage coefficients: beta solves
//   (gamma^T szz gamma) beta = gamma^T szy.
// When L == K this collapses to beta = szx^{-1} szy.
Eigen::VectorXd second_stage(const WeightedGrams& g, const FirstStageFit& fs);

// Everything that goes into the sandwich variance. Rows follow sorted
// positions; columns follow instruments.
//   psi        n x L influence contributions
//   gamma1     n x L, first correction curve evaluated at each y_(i)
//   gamma2     n x L, second correction curve evaluated at each y_(i)
//   sigma_psi  L x L, (1/n) sum_i psi_i psi_i^T
//   w_hat      K x L, (gamma^T szz gamma)^{-1} gamma^T
struct InfluenceComponents {
    Eigen::MatrixXd psi;
    Eigen::MatrixXd gamma1;
    Eigen::MatrixXd gamma2;
    Eigen::MatrixXd sigma_psi;
    Eigen::MatrixXd w_hat;
};

InfluenceComponents influence_components(const SortedSample& s,
                                         const KmWeights& kw,
                                         const StepCdf& censor_cdf,
                                         const StepCdf& outcome_cdf,
                                         const Eigen::VectorXd& beta,
                                         const WeightedGrams& g,
                                         const FirstStageFit& fs);

// Full fit: point estimates, sandwich covariance, per-coefficient standard
// errors and normal confidence intervals at level 1 - alpha.
struct TwoSlsFit {
    Eigen::VectorXd beta;       // K
    Eigen::VectorXd residuals;  // n, sorted order
    Eigen::MatrixXd sigma;      // K x K asymptotic covariance of sqrt(n) beta
    Eigen::VectorXd se;         // K, sqrt(sigma_kk / n)
    Eigen::VectorXd ci_lower;   // K
    Eigen::VectorXd ci_upper;   // K
    double alpha = 0.05;
};

TwoSlsFit fit(const Sample& sample, double alpha = 0.05);

}  // namespace km2sls
