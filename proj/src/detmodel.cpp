#include "cmass/detmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmass::detmodel {

double sample_difficulty(const DetectionModel& model, Rng& rng) {
    model.validate();
    return model.difficulty_bias + rng.exponential(model.difficulty_scale);
}

double log_norm(std::span<const double> log_counts, double p) {
    if (log_counts.empty()) return 0.0;
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : log_counts) m = std::max(m, v);
        return m;
    }
    if (log_counts.size() == 1) return std::max(log_counts[0], 0.0);
    double acc = 0.0;
    for (double v : log_counts) {
        if (v > 0.0) acc += std::pow(v, p);
    }
    return std::pow(acc, 1.0 / p);
}

double information_norm(std::span<const int> point_counts, double p) {
    std::vector<double> logs;
    logs.reserve(point_counts.size());
    for (int n : point_counts) {
        if (n >= 1) logs.push_back(std::log(static_cast<double>(n)));
    }
    return log_norm(logs, p);
}

bool is_detected(std::span<const int> point_counts, const DetectionModel& model,
                 double difficulty) {
    return information_norm(point_counts, model.p) >= difficulty;
}

double miss_probability(std::span<const double> log_counts, const DetectionModel& model) {
    model.validate();
    const double nu = log_norm(log_counts, model.p);
    if (nu < model.difficulty_bias) return 1.0;
    return std::exp(-model.difficulty_scale * (nu - model.difficulty_bias));
}

DetectionModel fit_model(std::span<const GridCell> grid, const FitLattice& lattice) {
    if (grid.empty()) throw std::invalid_argument("fit_model: empty grid");

    constexpr double kFloor = 1e-6;
    std::vector<double> log_phat(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ph = std::max(grid[i].miss_prob, kFloor);
        if (ph > 1.0) throw std::invalid_argument("fit_model: probability > 1");
        log_phat[i] = std::log(ph);
    }

    const auto steps = [](double lo, double hi, double step) {
        return static_cast<int>(std::floor((hi - lo) / step + 0.5)) + 1;
    };

    DetectionModel best;
    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<double> nu(grid.size());

    const int np = steps(lattice.p_lo, lattice.p_hi, lattice.p_step);
    const int ns = steps(lattice.scale_lo, lattice.scale_hi, lattice.scale_step);
    const int nb = steps(lattice.bias_lo, lattice.bias_hi, lattice.bias_step);
    for (int ip = 0; ip < np; ++ip) {
        const double p = lattice.p_lo + ip * lattice.p_step;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double logs[2] = {grid[i].log_n1, grid[i].log_n2};
            nu[i] = log_norm(logs, p);
        }
        for (int is = 0; is < ns; ++is) {
            const double scale = lattice.scale_lo + is * lattice.scale_step;
            for (int ib = 0; ib < nb; ++ib) {
                const double bias = lattice.bias_lo + ib * lattice.bias_step;
                double loss = 0.0;
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    // log p_model = -scale * max(nu - bias, 0)
                    const double lm = -scale * std::max(nu[i] - bias, 0.0);
                    loss += std::abs(log_phat[i] - lm);
                    if (loss >= best_loss) break;
                }
                if (loss < best_loss) {
                    best_loss = loss;
                    best = DetectionModel{p, scale, bias};
                }
            }
        }
    }
    return best;
}

}  // namespace cmass::detmodel
