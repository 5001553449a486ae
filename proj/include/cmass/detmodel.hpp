#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cmass/rng.hpp"

// Statistical detection oracle for feature-level collaborative perception:
// an object of difficulty D is detected by a view set when the p-norm of the
// per-view log point counts reaches D. Difficulties follow a shifted
// exponential, so the conditional miss probability has a closed form.
namespace cmass::detmodel {

struct DetectionModel {
    double p = 2.3;                // norm order; >= 1, may be +inf
    double difficulty_scale = 2.1; // lambda of the shifted exponential
    double difficulty_bias = 3.9;  // mu (minimum difficulty)

    void validate() const {
        if (!(p >= 1.0)) throw std::invalid_argument("detmodel: p must be >= 1");
        if (!(difficulty_scale > 0.0))
            throw std::invalid_argument("detmodel: difficulty_scale must be > 0");
        if (!(difficulty_bias >= 0.0))
            throw std::invalid_argument("detmodel: difficulty_bias must be >= 0");
    }
};

// One difficulty draw: D = mu + Exp(lambda). Sampled once per object at spawn
// and held fixed over its lifetime.
double sample_difficulty(const DetectionModel& model, Rng& rng);

// p-norm of the log information amounts. Views with zero points carry zero
// information and are skipped (log of 0 is excluded, not -inf).
double information_norm(std::span<const int> point_counts, double p);
double log_norm(std::span<const double> log_counts, double p);

// Detection predicate for one object given per-view point counts. The >= at
// the boundary is deliberate: an object whose information exactly meets its
// difficulty is detected. The simulator evaluates this for singletons and
// pairs only; larger sets compose through the second-order topology, never
// through the raw norm of all views.
bool is_detected(std::span<const int> point_counts, const DetectionModel& model,
                 double difficulty);

// Closed-form conditional missed-detection probability at log counts nu.
double miss_probability(std::span<const double> log_counts, const DetectionModel& model);

// One empirical grid cell of miss statistics at two views.
struct GridCell {
    double log_n1 = 0.0;
    double log_n2 = 0.0;
    double miss_prob = 1.0;
};

struct FitLattice {
    double p_lo = 1.0, p_hi = 3.0, p_step = 0.1;
    double scale_lo = 0.1, scale_hi = 5.0, scale_step = 0.1;
    double bias_lo = 0.0, bias_hi = 6.0, bias_step = 0.1;
};

// Brute-force L1-on-log fit over the lattice. Cells at probability 0 are
// floored to 1e-6. Ties resolve to the lexicographically smallest
// (p, scale, bias) lattice point, so a flat grid yields the smallest feasible
// bias. Throws on an empty grid.
DetectionModel fit_model(std::span<const GridCell> grid, const FitLattice& lattice = {});

}  // namespace cmass::detmodel
