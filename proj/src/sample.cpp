#include "km2sls/sample.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <utility>

#include "km2sls/errors.hpp"

namespace km2sls {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidDataError(what);
}

}  // namespace

Sample::Sample(Eigen::VectorXd y, std::vector<std::uint8_t> delta,
               Eigen::MatrixXd x, Eigen::MatrixXd z)
    : y_(std::move(y)), delta_(std::move(delta)), x_(std::move(x)),
      z_(std::move(z)) {
    const Eigen::Index n = y_.size();
    require(n > 0, "sample is empty");
    require(static_cast<Eigen::Index>(delta_.size()) == n,
            "status vector has " + std::to_string(delta_.size()) +
                " entries but there are " + std::to_string(n) + " outcomes");
    require(x_.rows() == n, "regressor matrix has " +
                                std::to_string(x_.rows()) + " rows, expected " +
                                std::to_string(n));
    require(z_.rows() == n, "instrument matrix has " +
                                std::to_string(z_.rows()) +
                                " rows, expected " + std::to_string(n));
    require(x_.cols() >= 1, "regressor matrix has no columns");
    require(z_.cols() >= x_.cols(),
            "fewer instruments (" + std::to_string(z_.cols()) +
                ") than regressors (" + std::to_string(x_.cols()) + ")");
    require(n > std::max(x_.cols(), z_.cols()),
            "need more than " + std::to_string(std::max(x_.cols(), z_.cols())) +
                " observations, got " + std::to_string(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        require(std::isfinite(y_[i]),
                "outcome is not finite at row " + std::to_string(i));
        require(delta_[i] == 0 || delta_[i] == 1,
                "status flag is not 0 or 1 at row " + std::to_string(i));
    }
    require(x_.allFinite(), "regressor matrix contains non-finite values");
    require(z_.allFinite(), "instrument matrix contains non-finite values");
}

Eigen::Index Sample::event_count() const {
    return static_cast<Eigen::Index>(
        std::count(delta_.begin(), delta_.end(), std::uint8_t{1}));
}

double Sample::censored_fraction() const {
    return 1.0 - static_cast<double>(event_count()) / static_cast<double>(n());
}

SortedSample sort_by_outcome(const Sample& sample) {
    const Eigen::Index n = sample.n();
    std::vector<Eigen::Index> perm(n);
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    // Events before censorings at tied times; stable_sort keeps original
    // order within remaining ties.
    std::stable_sort(perm.begin(), perm.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                         if (sample.y()[a] != sample.y()[b]) {
                             return sample.y()[a] < sample.y()[b];
                         }
                         return sample.delta()[a] > sample.delta()[b];
                     });

    SortedSample out;
    out.perm = std::move(perm);
    out.y.resize(n);
    out.delta.resize(n);
    out.x.resize(n, sample.k());
    out.z.resize(n, sample.l());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index src = out.perm[i];
        out.y[i] = sample.y()[src];
        out.delta[i] = sample.delta()[src];
        out.x.row(i) = sample.x().row(src);
        out.z.row(i) = sample.z().row(src);
    }
    return out;
}

}  // namespace km2sls
