#include <algorithm>
#include <limits>

#include "hkdelay/kernels.hpp"

namespace hkdelay::kernels::scalar {

double max_pair_dist2(SoaView cloud) {
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < cloud.count; ++i) {
        for (std::size_t j = i + 1; j < cloud.count; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < cloud.dim; ++c) {
                const double* x = cloud.coord(c);
                const double diff = x[j] - x[i];
                s = s + diff * diff;
            }
            best = std::max(best, s);
        }
    }
    return best;
}

double max_norm2(SoaView cloud) {
    double best = 0.0;
    for (std::size_t p = 0; p < cloud.count; ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < cloud.dim; ++c) {
            const double v = cloud.coord(c)[p];
            s = s + v * v;
        }
        best = std::max(best, s);
    }
    return best;
}

DotRange dot_range(SoaView cloud, std::span<const double> direction) {
    DotRange r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t p = 0; p < cloud.count; ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < cloud.dim; ++c) s = s + cloud.coord(c)[p] * direction[c];
        r.min = std::min(r.min, s);
        r.max = std::max(r.max, s);
    }
    return r;
}

}  // namespace hkdelay::kernels::scalar
