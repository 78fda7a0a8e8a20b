#pragma once

// Reductions over point clouds that dominate the diagnostics cost: maximal
// pairwise distance, maximal norm, and the range of projections onto a
// direction. Each has a scalar reference implementation and an AVX2 variant
// chosen at runtime; both evaluate every lane in the same operation order, so
// their results are bit-identical.

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hkdelay/point_set.hpp"

namespace hkdelay::kernels {

/// Structure-of-arrays view: coordinate c of point p is data[c * count + p].
struct SoaView {
    const double* data = nullptr;
    std::size_t count = 0;
    std::size_t dim = 0;

    const double* coord(std::size_t c) const noexcept { return data + c * count; }
};

/// Owning SoA buffer.
class SoaCloud {
public:
    SoaCloud() = default;
    explicit SoaCloud(std::size_t dim) : dim_(dim) {}
    SoaCloud(std::size_t count, std::size_t dim) : count_(count), dim_(dim), data_(count * dim, 0.0) {}

    static SoaCloud from_points(const PointSet& points);
    /// Builds from agent-major rows of `dim` coordinates each.
    static SoaCloud from_rows(std::span<const double> rows, std::size_t dim);

    std::size_t size() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    double& at(std::size_t p, std::size_t c) noexcept { return data_[c * count_ + p]; }
    double at(std::size_t p, std::size_t c) const noexcept { return data_[c * count_ + p]; }
    SoaView view() const noexcept { return {data_.data(), count_, dim_}; }

private:
    std::size_t count_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

struct DotRange {
    double min = 0.0;
    double max = 0.0;
};

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);
bool isa_available(Isa isa);
/// Selected implementation: AVX2 when the CPU supports it, unless the
/// HKDELAY_KERNELS environment variable is set to "scalar".
Isa active_isa();
/// Overrides the runtime choice; throws ParameterError if `isa` is unavailable.
void set_active_isa(Isa isa);

namespace scalar {
double max_pair_dist2(SoaView cloud);
double max_norm2(SoaView cloud);
DotRange dot_range(SoaView cloud, std::span<const double> direction);
}  // namespace scalar

namespace avx2 {
double max_pair_dist2(SoaView cloud);
double max_norm2(SoaView cloud);
DotRange dot_range(SoaView cloud, std::span<const double> direction);
}  // namespace avx2

/// Max squared distance over all pairs of points (0 for fewer than two).
double max_pair_dist2(SoaView cloud);
/// Max squared Euclidean norm (0 for an empty cloud).
double max_norm2(SoaView cloud);
/// Min and max of <p, direction> over the cloud; requires a nonempty cloud.
DotRange dot_range(SoaView cloud, std::span<const double> direction);

}  // namespace hkdelay::kernels
