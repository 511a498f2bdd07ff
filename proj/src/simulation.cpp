#include "km2sls/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "km2sls/errors.hpp"
#include "km2sls/stats.hpp"

namespace km2sls {

namespace {

// One independent RNG substream per (seed, rep) pair, so replications
// reproduce bit for bit no matter how they are scheduled.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rep & 0xffffffffULL),
                      static_cast<std::uint32_t>(rep >> 32)};
    return std::mt19937_64(seq);
}

// Top 53 bits of the draw, uniform on [0,1).
double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

double uniform_sym(std::mt19937_64& g) { return 2.0 * uniform01(g) - 1.0; }

// Exp(1) by inverse CDF.
double exponential1(std::mt19937_64& g) { return -std::log1p(-uniform01(g)); }

}  // namespace

Eigen::VectorXd dgp_true_beta() {
    Eigen::VectorXd b(3);
    b << 0.5, 1.0, 1.0;
    return b;
}

Sample draw_sample(const DgpConfig& cfg, std::uint64_t rep_index) {
    if (cfg.n < 10) {
        throw InvalidDataError("simulated sample size must be at least 10");
    }
    const Eigen::Index n = cfg.n;
    const double shift = cfg.rho.value_or(0.0);

    Eigen::VectorXd y(n);
    std::vector<std::uint8_t> delta(n);
    Eigen::MatrixXd x(n, 3);
    Eigen::MatrixXd z(n, 3);

    auto rng = substream(cfg.seed, rep_index);
    for (Eigen::Index i = 0; i < n; ++i) {
        // Draw order per unit is fixed: z2, x3, v, e, censoring.
        const double z2 = uniform_sym(rng);
        const double x3 = uniform_sym(rng);
        const double v = uniform_sym(rng);
        const double e = uniform_sym(rng);
        const double x2 = z2 + v;
        const double t = 0.5 + x2 + x3 + v + e;
        const double c = shift + exponential1(rng);
        y[i] = std::min(t, c);
        delta[i] = t <= c ? 1 : 0;
        x(i, 0) = 1.0;
        x(i, 1) = x2;
        x(i, 2) = x3;
        z(i, 0) = 1.0;
        z(i, 1) = z2;
        z(i, 2) = x3;
    }
    return Sample(std::move(y), std::move(delta), std::move(x), std::move(z));
}

McSummary run_monte_carlo(const McConfig& cfg) {
    if (cfg.reps < 1) {
        throw InvalidDataError("need at least one replication");
    }
    if (cfg.dgp.n < 10) {
        // Checked up front: worker threads must not throw for bad config.
        throw InvalidDataError("simulated sample size must be at least 10");
    }
    if (cfg.target < 0 || cfg.target >= dgp_true_beta().size()) {
        throw InvalidDataError("target coefficient index out of range");
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw std::invalid_argument("run_monte_carlo: alpha must lie in (0,1)");
    }

    struct RepResult {
        double est = 0;
        double se = 0;
        double lo = 0;
        double hi = 0;
        bool ok = false;
    };
    const int reps = cfg.reps;
    std::vector<RepResult> results(reps);

    auto run_range = [&](int first, int last) {
        for (int r = first; r < last; ++r) {
            try {
                const Sample sample =
                    draw_sample(cfg.dgp, static_cast<std::uint64_t>(r));
                const TwoSlsFit f = fit(sample, cfg.alpha);
                results[r] = {f.beta[cfg.target], f.se[cfg.target],
                              f.ci_lower[cfg.target], f.ci_upper[cfg.target],
                              true};
            } catch (const NumericError&) {
                results[r].ok = false;
            }
        }
    };

    unsigned threads =
        cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min(threads, static_cast<unsigned>(reps)));
    if (threads == 1) {
        run_range(0, reps);
    } else {
        const int chunk =
            (reps + static_cast<int>(threads) - 1) / static_cast<int>(threads);
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            const int first = static_cast<int>(t) * chunk;
            const int last = std::min(reps, first + chunk);
            if (first >= last) break;
            pool.emplace_back(run_range, first, last);
        }
        for (auto& th : pool) th.join();
    }

    // Aggregate sequentially in replication order; thread count cannot
    // change the result.
    int failed = 0;
    int used = 0;
    double mean = 0.0;
    for (const auto& r : results) {
        if (r.ok) {
            mean += r.est;
            ++used;
        } else {
            ++failed;
        }
    }
    if (failed * 20 > reps) {
        throw NumericError(std::to_string(failed) + " of " +
                           std::to_string(reps) +
                           " replications failed to fit");
    }
    mean /= used;

    const double truth = dgp_true_beta()[cfg.target];
    const double q = normal_quantile(1.0 - cfg.alpha / 2.0);
    double ss = 0.0;
    double width = 0.0;
    int covered = 0;
    int significant = 0;
    for (const auto& r : results) {
        if (!r.ok) continue;
        ss += (r.est - mean) * (r.est - mean);
        width += r.hi - r.lo;
        if (r.lo <= truth && truth <= r.hi) ++covered;
        if (std::abs(r.est) > q * r.se) ++significant;
    }

    McSummary out;
    out.bias = mean - truth;
    out.variance = used > 1 ? ss / (used - 1) : 0.0;
    out.mse = out.bias * out.bias + out.variance;
    out.coverage = static_cast<double>(covered) / used;
    out.mean_ci_width = width / used;
    out.pct_significant = static_cast<double>(significant) / used;
    out.n_failed = failed;
    out.reps = reps;
    return out;
}

}  // namespace km2sls
