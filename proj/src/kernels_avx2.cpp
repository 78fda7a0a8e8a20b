// Compiled with -mavx2 only; no FMA so each lane rounds like the scalar path.

#include <immintrin.h>

#include <algorithm>
#include <limits>

#include "hkdelay/kernels.hpp"

namespace hkdelay::kernels::avx2 {

namespace {

inline double hmax(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

inline double hmin(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d m = _mm_min_pd(lo, hi);
    return std::min(_mm_cvtsd_f64(m), _mm_cvtsd_f64(_mm_unpackhi_pd(m, m)));
}

}  // namespace

double max_pair_dist2(SoaView cloud) {
    const std::size_t n = cloud.count;
    double best = 0.0;
    __m256d vbest = _mm256_setzero_pd();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) {
            __m256d s = _mm256_setzero_pd();
            for (std::size_t c = 0; c < cloud.dim; ++c) {
                const double* x = cloud.coord(c);
                const __m256d xi = _mm256_set1_pd(x[i]);
                const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(x + j), xi);
                s = _mm256_add_pd(s, _mm256_mul_pd(diff, diff));
            }
            vbest = _mm256_max_pd(vbest, s);
        }
        for (; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < cloud.dim; ++c) {
                const double* x = cloud.coord(c);
                const double diff = x[j] - x[i];
                s = s + diff * diff;
            }
            best = std::max(best, s);
        }
    }
    return std::max(best, hmax(vbest));
}

double max_norm2(SoaView cloud) {
    const std::size_t n = cloud.count;
    __m256d vbest = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
        __m256d s = _mm256_setzero_pd();
        for (std::size_t c = 0; c < cloud.dim; ++c) {
            const __m256d v = _mm256_loadu_pd(cloud.coord(c) + p);
            s = _mm256_add_pd(s, _mm256_mul_pd(v, v));
        }
        vbest = _mm256_max_pd(vbest, s);
    }
    double best = hmax(vbest);
    for (; p < n; ++p) {
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
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = cloud.count;
    __m256d vmin = _mm256_set1_pd(inf);
    __m256d vmax = _mm256_set1_pd(-inf);
    std::size_t p = 0;
    for (; p + 4 <= n; p += 4) {
        __m256d s = _mm256_setzero_pd();
        for (std::size_t c = 0; c < cloud.dim; ++c) {
            const __m256d v = _mm256_loadu_pd(cloud.coord(c) + p);
            s = _mm256_add_pd(s, _mm256_mul_pd(v, _mm256_set1_pd(direction[c])));
        }
        vmin = _mm256_min_pd(vmin, s);
        vmax = _mm256_max_pd(vmax, s);
    }
    DotRange r{hmin(vmin), hmax(vmax)};
    for (; p < n; ++p) {
        double s = 0.0;
        for (std::size_t c = 0; c < cloud.dim; ++c) s = s + cloud.coord(c)[p] * direction[c];
        r.min = std::min(r.min, s);
        r.max = std::max(r.max, s);
    }
    return r;
}

}  // namespace hkdelay::kernels::avx2
