#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cocurve/errors.hpp"

namespace cocurve {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

void require_finite(const Matrix& m, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

// Strictly increasing time points in years (ACT/365 everywhere).
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> times);
    static TimeGrid uniform(double t0, double t1, int steps);

    std::size_t size() const { return times_.size(); }
    std::size_t steps() const { return times_.size() - 1; }
    double operator[](std::size_t k) const { return times_[k]; }
    double front() const { return times_.front(); }
    double back() const { return times_.back(); }
    double dt(std::size_t k) const { return times_[k + 1] - times_[k]; }
    const std::vector<double>& times() const { return times_; }

private:
    std::vector<double> times_;
};

}  // namespace cocurve
