#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "km2sls/errors.hpp"
#include "km2sls/simulation.hpp"
#include "km2sls/stute.hpp"
#include "oracles.hpp"

using km2sls::KmWeights;
using km2sls::MomentFunction;
using km2sls::Sample;
using km2sls::SortedSample;
using km2sls::WeightedGrams;

namespace {

SortedSample sorted_of(const std::vector<double>& y,
                       const std::vector<int>& delta) {
    const Eigen::Index n = static_cast<Eigen::Index>(y.size());
    Eigen::VectorXd yv(n);
    std::vector<std::uint8_t> dv(n);
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(n, 1);
    Eigen::MatrixXd z = Eigen::MatrixXd::Ones(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        yv[i] = y[static_cast<std::size_t>(i)];
        dv[i] = static_cast<std::uint8_t>(delta[static_cast<std::size_t>(i)]);
    }
    return sort_by_outcome(Sample(yv, dv, x, z));
}

MomentFunction constant_one() {
    return {1, [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
                Eigen::VectorXd v(1);
                v << 1.0;
                return v;
            }};
}

MomentFunction outcome_identity() {
    return {1, [](const Eigen::VectorXd&, const Eigen::VectorXd&, double y) {
                Eigen::VectorXd v(1);
                v << y;
                return v;
            }};
}

}  // namespace

TEST_CASE("weighted moments") {
    SECTION("constant map with no censoring sums to one") {
        const SortedSample s = sorted_of({2, 1, 3}, {1, 1, 1});
        const KmWeights kw = km_weights(s);
        const Eigen::VectorXd m = weighted_moment(s, kw, constant_one());
        CHECK(m[0] == 1.0);
    }
    SECTION("worked outcome example") {
        const SortedSample s = sorted_of({1, 2, 3}, {0, 1, 1});
        const Eigen::VectorXd m =
            weighted_moment(s, km_weights(s), outcome_identity());
        CHECK(m[0] == Catch::Approx(2.5).margin(1e-15));
    }
    SECTION("constant map recovers the weight sum") {
        const SortedSample s = sorted_of({1, 2, 3, 4}, {1, 0, 1, 1});
        const Eigen::VectorXd m =
            weighted_moment(s, km_weights(s), constant_one());
        CHECK(m[0] == Catch::Approx(1.0).margin(1e-15));
    }
    SECTION("linear in the moment map") {
        std::mt19937_64 rng(30111);
        const MomentFunction phi1{
            2, [](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                  double y) {
                Eigen::VectorXd v(2);
                v << x[0] * y, z[0] - y;
                return v;
            }};
        const MomentFunction phi2{
            2, [](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                  double y) {
                Eigen::VectorXd v(2);
                v << std::sin(y) + z[0], x[0];
                return v;
            }};
        for (int rep = 0; rep < 50; ++rep) {
            const Sample sample = oracle::random_survival_sample(
                rng, 40, 0.35, rep % 2 == 0);
            const SortedSample s = sort_by_outcome(sample);
            const KmWeights kw = km_weights(s);
            const double a =
                std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
            const double b =
                std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
            const MomentFunction combo{
                2, [&](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                       double y) {
                    return Eigen::VectorXd(a * phi1.eval(x, z, y) +
                                           b * phi2.eval(x, z, y));
                }};
            const Eigen::VectorXd lhs = weighted_moment(s, kw, combo);
            const Eigen::VectorXd rhs = a * weighted_moment(s, kw, phi1) +
                                        b * weighted_moment(s, kw, phi2);
            REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SECTION("no censoring reduces to the sample average") {
        std::mt19937_64 rng(30222);
        const MomentFunction phi{
            2, [](const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                  double y) {
                Eigen::VectorXd v(2);
                v << y * y + z[0], x[0] * y;
                return v;
            }};
        for (int rep = 0; rep < 50; ++rep) {
            const Sample sample =
                oracle::random_survival_sample(rng, 60, 0.0, false);
            const SortedSample s = sort_by_outcome(sample);
            const Eigen::VectorXd m = weighted_moment(s, km_weights(s), phi);
            Eigen::VectorXd avg = Eigen::VectorXd::Zero(2);
            for (Eigen::Index i = 0; i < s.n(); ++i) {
                avg += phi.eval(s.x.row(i), s.z.row(i), s.y[i]);
            }
            avg /= static_cast<double>(s.n());
            REQUIRE((m - avg).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SECTION("estimates the uncensored outcome mean") {
        // Grand mean over replications against its own replication noise.
        const int reps = 16;
        Eigen::VectorXd est(reps);
        for (int r = 0; r < reps; ++r) {
            km2sls::DgpConfig cfg;
            cfg.n = 100000;
            cfg.seed = 555;
            const SortedSample s = sort_by_outcome(
                km2sls::draw_sample(cfg, static_cast<std::uint64_t>(r)));
            est[r] =
                weighted_moment(s, km_weights(s), outcome_identity())[0];
        }
        const double mean = est.mean();
        const double sd = std::sqrt((est.array() - mean).square().sum() /
                                    (reps - 1));
        REQUIRE(std::abs(mean - 0.5) <= 3.0 * sd / std::sqrt(double(reps)));
    }
    SECTION("rejects inconsistent inputs and bad evaluations") {
        const SortedSample s = sorted_of({3, 1, 2}, {1, 1, 1});
        KmWeights wrong{Eigen::VectorXd::Zero(2)};
        CHECK_THROWS_AS(weighted_moment(s, wrong, constant_one()),
                        km2sls::InvalidDataError);

        const MomentFunction bad_dim{
            2, [](const Eigen::VectorXd&, const Eigen::VectorXd&, double) {
                return Eigen::VectorXd::Ones(3);
            }};
        CHECK_THROWS_AS(weighted_moment(s, km_weights(s), bad_dim),
                        km2sls::EvaluationError);

        // The largest outcome (3.0) came from original row 0; the error
        // message must point there.
        const MomentFunction sometimes_nan{
            1, [](const Eigen::VectorXd&, const Eigen::VectorXd&, double y) {
                Eigen::VectorXd v(1);
                v << (y > 2.5 ? std::nan("") : 1.0);
                return v;
            }};
        CHECK_THROWS_WITH(weighted_moment(s, km_weights(s), sometimes_nan),
                          Catch::Matchers::ContainsSubstring("row 0"));
    }
}

TEST_CASE("weighted gram matrices") {
    SECTION("no censoring reduces to sample second moments") {
        std::mt19937_64 rng(30333);
        const Sample sample = oracle::random_iv_sample(rng, 80, 2, 3, 0.0);
        const SortedSample s = sort_by_outcome(sample);
        const WeightedGrams g = weighted_grams(s, km_weights(s));
        const double n = static_cast<double>(s.n());
        REQUIRE((g.szz - s.z.transpose() * s.z / n).cwiseAbs().maxCoeff() <=
                1e-12);
        REQUIRE((g.szx - s.z.transpose() * s.x / n).cwiseAbs().maxCoeff() <=
                1e-12);
        REQUIRE((g.szy - s.z.transpose() * s.y / n).cwiseAbs().maxCoeff() <=
                1e-12);
    }
    SECTION("worked one-instrument example") {
        const SortedSample s = sorted_of({1, 2}, {1, 1});
        const WeightedGrams g = weighted_grams(s, km_weights(s));
        CHECK(g.szy[0] == 1.5);
        CHECK(g.szz(0, 0) == 1.0);
    }
    SECTION("all-censored input yields zero matrices") {
        const SortedSample s = sorted_of({1, 2, 3}, {0, 0, 0});
        const WeightedGrams g = weighted_grams(s, km_weights(s));
        CHECK(g.szz.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.szx.cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.szy.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("szz is exactly symmetric and positive semidefinite") {
        std::mt19937_64 rng(30444);
        for (int rep = 0; rep < 50; ++rep) {
            const Sample sample = oracle::random_survival_sample(
                rng, 50, 0.4, rep % 2 == 0);
            const SortedSample s = sort_by_outcome(sample);
            const WeightedGrams g = weighted_grams(s, km_weights(s));
            const Eigen::MatrixXd t = g.szz.transpose();
            REQUIRE((g.szz.array() == t.array()).all());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.szz);
            REQUIRE(eig.eigenvalues().minCoeff() >=
                    -1e-12 * std::max(1.0, g.szz.trace()));
        }
    }
    SECTION("rejects mismatched weights") {
        const SortedSample s = sorted_of({1, 2, 3}, {1, 1, 1});
        KmWeights wrong{Eigen::VectorXd::Zero(5)};
        CHECK_THROWS_AS(weighted_grams(s, wrong), km2sls::InvalidDataError);
    }
}
