#include "km2sls/stute.hpp"

#include <cmath>
#include <string>

#include "km2sls/errors.hpp"

namespace km2sls {

Eigen::VectorXd weighted_moment(const SortedSample& s, const KmWeights& kw,
                                const MomentFunction& phi) {
    const Eigen::Index n = s.n();
    if (kw.w.size() != n) {
        throw InvalidDataError("weight vector does not match sample size");
    }
    if (phi.dim <= 0) {
        throw EvaluationError("moment function declares a non-positive dimension");
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(phi.dim);
    Eigen::VectorXd comp = Eigen::VectorXd::Zero(phi.dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd v = phi.eval(s.x.row(i), s.z.row(i), s.y[i]);
        if (v.size() != phi.dim) {
            throw EvaluationError(
                "moment function returned dimension " + std::to_string(v.size()) +
                ", declared " + std::to_string(phi.dim) + " (row " +
                std::to_string(s.perm[i]) + ")");
        }
        if (!v.allFinite()) {
            throw EvaluationError(
                "moment function returned a non-finite value at row " +
                std::to_string(s.perm[i]));
        }
        if (kw.w[i] == 0.0) continue;
        // Kahan compensation keeps long weighted sums tight.
        for (Eigen::Index d = 0; d < phi.dim; ++d) {
            const double term = kw.w[i] * v[d] - comp[d];
            const double next = acc[d] + term;
            comp[d] = (next - acc[d]) - term;
            acc[d] = next;
        }
    }
    return acc;
}

WeightedGrams weighted_grams(const SortedSample& s, const KmWeights& kw) {
    const Eigen::Index n = s.n();
    if (kw.w.size() != n) {
        throw InvalidDataError("weight vector does not match sample size");
    }
    WeightedGrams g;
    g.szz = Eigen::MatrixXd::Zero(s.l(), s.l());
    g.szx = Eigen::MatrixXd::Zero(s.l(), s.k());
    g.szy = Eigen::VectorXd::Zero(s.l());
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = kw.w[i];
        if (w == 0.0) continue;
        const auto zi = s.z.row(i);
        // Rank-1 update touches one triangle only; mirroring afterwards
        // makes szz symmetric by construction, not just up to rounding.
        g.szz.selfadjointView<Eigen::Lower>().rankUpdate(zi.transpose(), w);
        g.szx.noalias() += w * (zi.transpose() * s.x.row(i));
        g.szy.noalias() += (w * s.y[i]) * zi.transpose();
    }
    g.szz.triangularView<Eigen::StrictlyUpper>() =
        g.szz.transpose().triangularView<Eigen::StrictlyUpper>();
    return g;
}

}  // namespace km2sls
