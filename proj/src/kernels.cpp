#include "cmass/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <cpuid.h>
#endif

namespace cmass::kernels {

namespace scalar {

MarginalResult marginal_utilities(const double* w, const double* d,
                                  const double* row, std::size_t n) {
    MarginalResult r;
    for (std::size_t i = 0; i < n; ++i) {
        const double gap = row[i] - d[i];
        if (gap > 0.0) r.pending += w[i] * gap;
        if (row[i] >= 1.0 && d[i] < 1.0) r.actual += w[i];
    }
    return r;
}

void max_update(double* d, const double* row, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (row[i] > d[i]) d[i] = row[i];
    }
}

LevelSums level_sums(const double* w, const double* d, std::size_t n) {
    LevelSums s;
    for (std::size_t i = 0; i < n; ++i) {
        s.level += w[i] * d[i];
        if (d[i] >= 1.0) s.detected += w[i];
    }
    return s;
}

}  // namespace scalar

namespace {

#if defined(__x86_64__) || defined(_M_X64)
bool detect_avx2() {
    unsigned int eax = 0, ebx = 0, ecx = 0, edx = 0;
    if (!__get_cpuid_count(7, 0, &eax, &ebx, &ecx, &edx)) return false;
    return (ebx & (1u << 5)) != 0;
}
#else
bool detect_avx2() { return false; }
#endif

Backend g_backend = Backend::Auto;

Backend resolve(Backend b) {
    if (b == Backend::Auto) return detect_avx2() ? Backend::Avx2 : Backend::Scalar;
    return b;
}

Backend& effective() {
    static Backend b = resolve(Backend::Auto);
    return b;
}

}  // namespace

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    static const bool ok = detect_avx2();
    return ok;
#else
    return false;
#endif
}

Backend select_backend(Backend requested) {
    if (requested == Backend::Avx2 && !avx2_supported()) requested = Backend::Scalar;
    g_backend = requested;
    effective() = resolve(requested);
    return effective();
}

Backend active_backend() { return effective(); }

MarginalResult marginal_utilities(const double* w, const double* d,
                                  const double* row, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
    if (effective() == Backend::Avx2) return avx2::marginal_utilities(w, d, row, n);
#endif
    return scalar::marginal_utilities(w, d, row, n);
}

void max_update(double* d, const double* row, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
    if (effective() == Backend::Avx2) return avx2::max_update(d, row, n);
#endif
    scalar::max_update(d, row, n);
}

LevelSums level_sums(const double* w, const double* d, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
    if (effective() == Backend::Avx2) return avx2::level_sums(w, d, n);
#endif
    return scalar::level_sums(w, d, n);
}

}  // namespace cmass::kernels
