#pragma once

#include <cstddef>

// Dense inner loops of the greedy scheduler. Detection levels live in [0, 1];
// a level of exactly 1.0 means "detected". The hot path evaluates, for every
// candidate CoV each round, a weighted reduction over all objects, so these
// loops get scalar reference implementations plus an AVX2 variant selected at
// runtime. The two backends are equivalence-tested against each other.
namespace cmass::kernels {

struct MarginalResult {
    double actual = 0.0;   // sum of w[n] where row[n] == 1 and d[n] < 1
    double pending = 0.0;  // sum of w[n] * max(row[n] - d[n], 0)
};

struct LevelSums {
    double detected = 0.0;  // sum of w[n] over d[n] == 1
    double level = 0.0;     // sum of w[n] * d[n]
};

enum class Backend { Auto, Scalar, Avx2 };

// Selects the backend for subsequent calls. Auto picks AVX2 when the CPU
// supports it. Returns the backend actually in effect.
Backend select_backend(Backend requested);
Backend active_backend();
bool avx2_supported();

// Marginal utility terms of one candidate row against the current levels.
MarginalResult marginal_utilities(const double* w, const double* d,
                                  const double* row, std::size_t n);

// d[n] = max(d[n], row[n]).
void max_update(double* d, const double* row, std::size_t n);

// Weighted sums of the current levels (actual / pending utility of the
// scheduled set).
LevelSums level_sums(const double* w, const double* d, std::size_t n);

namespace scalar {
MarginalResult marginal_utilities(const double* w, const double* d,
                                  const double* row, std::size_t n);
void max_update(double* d, const double* row, std::size_t n);
LevelSums level_sums(const double* w, const double* d, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
MarginalResult marginal_utilities(const double* w, const double* d,
                                  const double* row, std::size_t n);
void max_update(double* d, const double* row, std::size_t n);
LevelSums level_sums(const double* w, const double* d, std::size_t n);
}  // namespace avx2
#endif

}  // namespace cmass::kernels
