// AVX2 variants of the scheduler inner loops. Compiled with -mavx2; only
// reached after the runtime CPU check in kernels.cpp.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "cmass/kernels.hpp"

namespace cmass::kernels::avx2 {

namespace {
inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}
}  // namespace

MarginalResult marginal_utilities(const double* w, const double* d,
                                  const double* row, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc_pending = zero;
    __m256d acc_actual = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d wv = _mm256_loadu_pd(w + i);
        const __m256d dv = _mm256_loadu_pd(d + i);
        const __m256d rv = _mm256_loadu_pd(row + i);
        const __m256d gap = _mm256_max_pd(_mm256_sub_pd(rv, dv), zero);
        acc_pending = _mm256_add_pd(acc_pending, _mm256_mul_pd(wv, gap));
        const __m256d row_full = _mm256_cmp_pd(rv, one, _CMP_GE_OQ);
        const __m256d d_open = _mm256_cmp_pd(dv, one, _CMP_LT_OQ);
        const __m256d mask = _mm256_and_pd(row_full, d_open);
        acc_actual = _mm256_add_pd(acc_actual, _mm256_and_pd(mask, wv));
    }
    MarginalResult r;
    r.pending = hsum(acc_pending);
    r.actual = hsum(acc_actual);
    for (; i < n; ++i) {
        const double gap = row[i] - d[i];
        if (gap > 0.0) r.pending += w[i] * gap;
        if (row[i] >= 1.0 && d[i] < 1.0) r.actual += w[i];
    }
    return r;
}

void max_update(double* d, const double* row, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dv = _mm256_loadu_pd(d + i);
        const __m256d rv = _mm256_loadu_pd(row + i);
        _mm256_storeu_pd(d + i, _mm256_max_pd(dv, rv));
    }
    for (; i < n; ++i) {
        if (row[i] > d[i]) d[i] = row[i];
    }
}

LevelSums level_sums(const double* w, const double* d, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d acc_level = _mm256_setzero_pd();
    __m256d acc_det = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d wv = _mm256_loadu_pd(w + i);
        const __m256d dv = _mm256_loadu_pd(d + i);
        acc_level = _mm256_add_pd(acc_level, _mm256_mul_pd(wv, dv));
        const __m256d mask = _mm256_cmp_pd(dv, one, _CMP_GE_OQ);
        acc_det = _mm256_add_pd(acc_det, _mm256_and_pd(mask, wv));
    }
    LevelSums s;
    s.level = hsum(acc_level);
    s.detected = hsum(acc_det);
    for (; i < n; ++i) {
        s.level += w[i] * d[i];
        if (d[i] >= 1.0) s.detected += w[i];
    }
    return s;
}

}  // namespace cmass::kernels::avx2

#endif  // x86_64
