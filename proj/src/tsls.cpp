#include "km2sls/tsls.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "km2sls/errors.hpp"
#include "km2sls/stats.hpp"

namespace km2sls {

namespace {

constexpr double kRcondFloor = 1e-12;

// Factorizes a symmetric positive (semi)definite matrix and refuses to
// proceed when it is numerically rank deficient. The reciprocal condition
// is estimated from the pivot spread of the factorization, which stays
// meaningful for exactly singular inputs. All solves go through the
// factorization; no explicit inverse is ever formed.
Eigen::LDLT<Eigen::MatrixXd> factorize(const Eigen::MatrixXd& m,
                                       const std::string& what,
                                       const std::string& hint) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    const double dmax = d.size() > 0 ? d.maxCoeff() : 0.0;
    const double rc = dmax > 0.0 ? d.minCoeff() / dmax : 0.0;
    if (ldlt.info() != Eigen::Success || !(rc > kRcondFloor)) {
        std::ostringstream msg;
        msg << what << " is singular or near-singular (reciprocal condition "
            << std::scientific << rc << "); " << hint;
        throw RankError(msg.str());
    }
    return ldlt;
}

}  // namespace

FirstStageFit first_stage(const WeightedGrams& g) {
    if (g.szx.rows() != g.szz.rows() || g.szy.size() != g.szz.rows()) {
        throw InvalidDataError("gram matrices have inconsistent dimensions");
    }
    const auto ldlt = factorize(g.szz, "weighted instrument gram",
                                "instruments may be collinear");
    return FirstStageFit{ldlt.solve(g.szx)};
}

Eigen::VectorXd second_stage(const WeightedGrams& g, const FirstStageFit& fs) {
    const Eigen::MatrixXd projected =
        fs.gamma.transpose() * g.szz * fs.gamma;
    const auto ldlt =
        factorize(projected, "projected regressor gram",
                  "instruments may be collinear or too weak to identify the "
                  "regressors");
    return ldlt.solve(fs.gamma.transpose() * g.szy);
}

InfluenceComponents influence_components(const SortedSample& s,
                                         const KmWeights& kw,
                                         const StepCdf& censor_cdf,
                                         const StepCdf& outcome_cdf,
                                         const Eigen::VectorXd& beta,
                                         const WeightedGrams& g,
                                         const FirstStageFit& fs) {
    const Eigen::Index n = s.n();
    const Eigen::Index l = s.l();
    if (kw.w.size() != n) {
        throw InvalidDataError("weight vector does not match sample size");
    }
    if (beta.size() != s.k()) {
        throw InvalidDataError("coefficient vector does not match regressors");
    }
    const Eigen::VectorXd u = s.y - s.x * beta;
    const double nd = static_cast<double>(n);

    // Per-observation score delta_i u_i z_i / (1 - G(y_i-)). The left limit
    // is always positive: the factor that could drive the survival to zero
    // belongs to the largest observation and never enters its own left limit.
    Eigen::MatrixXd score = Eigen::MatrixXd::Zero(n, l);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!s.delta[i]) continue;
        const double g_left = 1.0 - censor_cdf.left_value(s.y[i]);
        score.row(i) = (u[i] / g_left) * s.z.row(i);
    }

    // Blocks of tied follow-up times. Curves are constant on each block, so
    // everything below is aggregated per block and then broadcast to rows.
    std::vector<Eigen::Index> begin;
    std::vector<Eigen::Index> end;
    for (Eigen::Index i = 0; i < n;) {
        Eigen::Index j = i;
        while (j < n && s.y[j] == s.y[i]) ++j;
        begin.push_back(i);
        end.push_back(j);
        i = j;
    }
    const std::size_t nblocks = begin.size();

    std::vector<Eigen::RowVectorXd> block_score(nblocks);
    std::vector<double> h_surv(nblocks);
    std::vector<Eigen::Index> censored_in(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        block_score[b] = Eigen::RowVectorXd::Zero(l);
        censored_in[b] = 0;
        for (Eigen::Index i = begin[b]; i < end[b]; ++i) {
            block_score[b] += score.row(i);
            if (!s.delta[i]) ++censored_in[b];
        }
        h_surv[b] = 1.0 - outcome_cdf.value(s.y[begin[b]]);
    }

    // after[b] = sum of scores strictly above block b.
    std::vector<Eigen::RowVectorXd> after(nblocks);
    Eigen::RowVectorXd tail = Eigen::RowVectorXd::Zero(l);
    for (std::size_t b = nblocks; b-- > 0;) {
        after[b] = tail;
        tail += block_score[b];
    }

    // First correction curve at each block value t:
    //   gamma1(t) = [sum_{y_i > t} score_i] / (n * (1 - H(t))),
    // an empty sum over an empty tail is 0, not 0/0.
    std::vector<Eigen::RowVectorXd> gamma1_at(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        gamma1_at[b] = b + 1 == nblocks
                           ? Eigen::RowVectorXd::Zero(l)
                           : Eigen::RowVectorXd(after[b] / (nd * h_surv[b]));
    }

    // Second correction curve: each censored observation j with y_j < t
    // contributes the score mass above y_j scaled by (1 - H(y_j))^{-2}.
    std::vector<Eigen::RowVectorXd> gamma2_at(nblocks);
    Eigen::RowVectorXd prefix = Eigen::RowVectorXd::Zero(l);
    for (std::size_t b = 0; b < nblocks; ++b) {
        gamma2_at[b] = prefix;
        if (censored_in[b] > 0 && b + 1 < nblocks) {
            prefix += (static_cast<double>(censored_in[b]) /
                       (nd * nd * h_surv[b] * h_surv[b])) *
                      after[b];
        }
    }

    InfluenceComponents out;
    out.psi.resize(n, l);
    out.gamma1.resize(n, l);
    out.gamma2.resize(n, l);
    for (std::size_t b = 0; b < nblocks; ++b) {
        for (Eigen::Index i = begin[b]; i < end[b]; ++i) {
            out.gamma1.row(i) = gamma1_at[b];
            out.gamma2.row(i) = gamma2_at[b];
            out.psi.row(i) = score.row(i) - gamma2_at[b];
            if (!s.delta[i]) out.psi.row(i) += gamma1_at[b];
        }
    }
    out.sigma_psi = (out.psi.transpose() * out.psi) / nd;

    const Eigen::MatrixXd projected = fs.gamma.transpose() * g.szz * fs.gamma;
    const auto ldlt =
        factorize(projected, "projected regressor gram",
                  "instruments may be collinear or too weak to identify the "
                  "regressors");
    out.w_hat = ldlt.solve(fs.gamma.transpose());
    return out;
}

TwoSlsFit fit(const Sample& sample, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("fit: alpha must lie in (0,1)");
    }
    if (sample.event_count() == 0) {
        throw DegenerateSampleError(
            "every observation is censored; nothing to fit");
    }
    const SortedSample s = sort_by_outcome(sample);
    const KmWeights kw = km_weights(s);
    const StepCdf censor_cdf = km_censoring_cdf(s);
    const StepCdf outcome_cdf = empirical_cdf(s);
    const WeightedGrams g = weighted_grams(s, kw);
    const FirstStageFit fs = first_stage(g);

    TwoSlsFit out;
    out.alpha = alpha;
    out.beta = second_stage(g, fs);
    out.residuals = s.y - s.x * out.beta;

    const InfluenceComponents ic = influence_components(
        s, kw, censor_cdf, outcome_cdf, out.beta, g, fs);
    // sigma = w_hat sigma_psi w_hat^T, assembled as a Gram product so it is
    // symmetric psd by construction.
    const Eigen::MatrixXd m = ic.psi * ic.w_hat.transpose();
    out.sigma = (m.transpose() * m) / static_cast<double>(s.n());

    const Eigen::Index k = sample.k();
    const double q = normal_quantile(1.0 - alpha / 2.0);
    out.se.resize(k);
    out.ci_lower.resize(k);
    out.ci_upper.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        out.se[j] = std::sqrt(std::max(out.sigma(j, j), 0.0) /
                              static_cast<double>(s.n()));
        out.ci_lower[j] = out.beta[j] - q * out.se[j];
        out.ci_upper[j] = out.beta[j] + q * out.se[j];
    }
    return out;
}

}  // namespace km2sls
