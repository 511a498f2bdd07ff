#pragma once

#include <cstdint>
#include <optional>

#include "km2sls/tsls.hpp"

namespace km2sls {

// Data-generating design for the Monte Carlo study. Per unit, with
// z2, x3, v, e drawn iid uniform on [-1,1]:
//   x2 = z2 + v          endogenous regressor
//   u  = v + e           structural error, correlated with x2 through v
//   t  = 0.5 + x2 + x3 + u
//   c  = rho + Exp(1)    censoring time (rho absent means plain Exp(1))
//   y  = min(t, c), delta = 1{t <= c}
// Regressors x = (1, x2, x3), instruments z = (1, z2, x3).
struct DgpConfig {
    Eigen::Index n = 1000;
    std::optional<double> rho;
    std::uint64_t seed = 0;
};

// True coefficients of the design above: (0.5, 1, 1).
Eigen::VectorXd dgp_true_beta();

// Draws one dataset. Deterministic in (cfg.seed, rep_index): each rep gets
// its own RNG substream, so reps can be generated in any order or in
// parallel and still reproduce bit for bit.
Sample draw_sample(const DgpConfig& cfg, std::uint64_t rep_index = 0);

struct McConfig {
    DgpConfig dgp;
    int reps = 1000;
    double alpha = 0.05;
    // Which coefficient the summary tracks; 1 is the endogenous slope.
    Eigen::Index target = 1;
    // 0 means use all hardware threads. Results do not depend on this.
    unsigned threads = 0;
};

struct McSummary {
    double bias = 0;             // mean(beta_hat) - truth
    double variance = 0;         // sample variance of beta_hat across reps
    double mse = 0;              // bias^2 + variance
    double coverage = 0;         // share of CIs containing the truth
    double mean_ci_width = 0;
    double pct_significant = 0;  // share of reps with |beta_hat| > q * se
    int n_failed = 0;            // reps whose fit threw a numerical error
    int reps = 0;
};

// Runs the full study and summarizes the target coefficient. Failed reps are
// excluded from the summaries; more than 5% failures aborts with
// NumericError.
McSummary run_monte_carlo(const McConfig& cfg);

}  // namespace km2sls
