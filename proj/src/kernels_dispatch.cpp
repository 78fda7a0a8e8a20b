#include <atomic>
#include <cstdlib>
#include <string>

#include "hkdelay/errors.hpp"
#include "hkdelay/kernels.hpp"

namespace hkdelay::kernels {

namespace {

Isa detect() {
    if (const char* env = std::getenv("HKDELAY_KERNELS")) {
        if (std::string(env) == "scalar") return Isa::Scalar;
    }
    return isa_available(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& selected() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

SoaCloud SoaCloud::from_points(const PointSet& points) {
    return from_rows(points.flat(), points.dim());
}

SoaCloud SoaCloud::from_rows(std::span<const double> rows, std::size_t dim) {
    const std::size_t count = dim == 0 ? 0 : rows.size() / dim;
    SoaCloud cloud(count, dim);
    for (std::size_t p = 0; p < count; ++p) {
        for (std::size_t c = 0; c < dim; ++c) cloud.at(p, c) = rows[p * dim + c];
    }
    return cloud;
}

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
    if (isa == Isa::Scalar) return true;
#if defined(HKDELAY_HAVE_AVX2)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa active_isa() { return selected().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_available(isa)) {
        throw ParameterError("kernel ISA " + std::string(to_string(isa)) + " is not available");
    }
    selected().store(isa, std::memory_order_relaxed);
}

#if defined(HKDELAY_HAVE_AVX2)
#define HKDELAY_DISPATCH(fn, ...) \
    (active_isa() == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define HKDELAY_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double max_pair_dist2(SoaView cloud) { return HKDELAY_DISPATCH(max_pair_dist2, cloud); }

double max_norm2(SoaView cloud) { return HKDELAY_DISPATCH(max_norm2, cloud); }

DotRange dot_range(SoaView cloud, std::span<const double> direction) {
    if (cloud.count == 0) throw RangeError("dot_range: empty cloud");
    return HKDELAY_DISPATCH(dot_range, cloud, direction);
}

}  // namespace hkdelay::kernels
