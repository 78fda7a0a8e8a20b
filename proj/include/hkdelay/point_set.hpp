#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hkdelay/errors.hpp"

namespace hkdelay {

/// N points in R^d, stored row-major (agent-major) in one contiguous buffer.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t n_points, std::size_t dim)
        : n_(n_points), dim_(dim), coords_(n_points * dim, 0.0) {}
    PointSet(std::size_t n_points, std::size_t dim, std::vector<double> coords)
        : n_(n_points), dim_(dim), coords_(std::move(coords)) {
        if (coords_.size() != n_ * dim_) {
            throw ParameterError("PointSet: coordinate count does not match n*dim");
        }
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }

    std::span<double> operator[](std::size_t i) noexcept {
        return {coords_.data() + i * dim_, dim_};
    }
    std::span<const double> operator[](std::size_t i) const noexcept {
        return {coords_.data() + i * dim_, dim_};
    }

    std::span<const double> flat() const noexcept { return coords_; }
    std::span<double> flat() noexcept { return coords_; }

    bool operator==(const PointSet&) const = default;

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> coords_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

inline double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        s += diff * diff;
    }
    return std::sqrt(s);
}

}  // namespace hkdelay
