#include "cocurve/linalg.hpp"

#include <cmath>

namespace cocurve {

void require_finite(const Matrix& m, const std::string& what) {
    if (!m.allFinite()) {
        throw DataError(what + ": non-finite entries");
    }
}

void require_finite(const Vector& v, const std::string& what) {
    if (!v.allFinite()) {
        throw DataError(what + ": non-finite entries");
    }
}

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
    if (times_.size() < 2) {
        throw ParameterError("TimeGrid: need at least two points");
    }
    for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
        if (!(times_[k + 1] > times_[k])) {
            throw ParameterError("TimeGrid: times must be strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(double t0, double t1, int steps) {
    if (steps < 1 || !(t1 > t0)) {
        throw ParameterError("TimeGrid::uniform: need t1 > t0 and steps >= 1");
    }
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        t[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * k / steps;
    }
    t.back() = t1;
    return TimeGrid(std::move(t));
}

}  // namespace cocurve
