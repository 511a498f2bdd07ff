#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace km2sls {

// One dataset of n units under random right censoring. Per unit:
//   y      observed follow-up time, min(event time, censoring time)
//   delta  1 if the event was observed, 0 if censored
//   x      K regressors (the equation of interest)
//   z      L instruments, L >= K
// Construction validates shapes, finiteness and the status flags and throws
// InvalidDataError on any violation.
class Sample {
public:
    Sample(Eigen::VectorXd y, std::vector<std::uint8_t> delta,
           Eigen::MatrixXd x, Eigen::MatrixXd z);

    Eigen::Index n() const { return y_.size(); }
    Eigen::Index k() const { return x_.cols(); }
    Eigen::Index l() const { return z_.cols(); }

    const Eigen::VectorXd& y() const { return y_; }
    const std::vector<std::uint8_t>& delta() const { return delta_; }
    const Eigen::MatrixXd& x() const { return x_; }
    const Eigen::MatrixXd& z() const { return z_; }

    Eigen::Index event_count() const;
    double censored_fraction() const;

private:
    Eigen::VectorXd y_;
    std::vector<std::uint8_t> delta_;
    Eigen::MatrixXd x_;
    Eigen::MatrixXd z_;
};

// A Sample with rows rearranged into the order every estimator here works in:
// y ascending, ties broken events-first, remaining ties kept in original
// order. perm[i] is the original row now sitting at sorted position i.
struct SortedSample {
    std::vector<Eigen::Index> perm;
    Eigen::VectorXd y;
    std::vector<std::uint8_t> delta;
    Eigen::MatrixXd x;
    Eigen::MatrixXd z;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index k() const { return x.cols(); }
    Eigen::Index l() const { return z.cols(); }
};

SortedSample sort_by_outcome(const Sample& sample);

}  // namespace km2sls
