#include "cmass/channel.hpp"

#include <cmath>
#include <numbers>

namespace cmass::channel {

LinkState classify_link(Vec2 a, Vec2 b, std::span<const Rect> buildings,
                        std::span<const OrientedBox> vehicle_bodies) {
    for (const Rect& r : buildings) {
        if (segment_intersects_rect_open(a, b, r)) return {LinkClass::NLOS, 0};
    }
    int blockers = 0;
    for (const OrientedBox& v : vehicle_bodies) {
        if (segment_intersects_obb_open(a, b, v)) ++blockers;
    }
    if (blockers > 0) return {LinkClass::NLOSv, blockers};
    return {LinkClass::LOS, 0};
}

double pathloss_db(LinkClass cls, double distance_m, const ChannelParams& params) {
    // Pathloss formulas reference 1 m; clamp below to keep the near field sane.
    const double d = std::max(distance_m, 1.0);
    const PathlossCoefficients& co =
        cls == LinkClass::NLOS ? params.pathloss_nlos : params.pathloss_los;
    return co.a + co.b * std::log10(d) + co.c * std::log10(params.carrier_ghz);
}

double channel_gain(const LinkState& link, double distance_m,
                    const ChannelParams& params, Rng& rng,
                    const double* shadow_db_override) {
    if (!(distance_m > 0.0)) throw std::invalid_argument("channel_gain: distance <= 0");

    double loss_db = pathloss_db(link.cls, distance_m, params);

    const double sigma = link.cls == LinkClass::NLOS ? params.shadowing_std_nlos_db
                         : link.cls == LinkClass::NLOSv
                             ? params.shadowing_std_nlosv_db
                             : params.shadowing_std_los_db;
    if (shadow_db_override) {
        loss_db += *shadow_db_override;
    } else if (sigma > 0.0) {
        loss_db += rng.normal(0.0, sigma);
    }

    const double blk_std = std::sqrt(params.blocker_loss_var_db2);
    for (int i = 0; i < link.n_blockers; ++i) {
        loss_db += std::max(0.0, rng.normal(params.blocker_loss_mean_db, blk_std));
    }

    double gain = std::pow(10.0, -loss_db / 10.0);

    if (params.fading) {
        if (link.cls == LinkClass::NLOS) {
            // Rayleigh power, unit mean.
            const double x = rng.normal(), y = rng.normal();
            gain *= 0.5 * (x * x + y * y);
        } else {
            // Rician power, unit mean, K from config.
            const double k = std::pow(10.0, params.rician_k_db / 10.0);
            const double los_amp = std::sqrt(k / (k + 1.0));
            const double diff = std::sqrt(1.0 / (2.0 * (k + 1.0)));
            const double re = los_amp + diff * rng.normal();
            const double im = diff * rng.normal();
            gain *= re * re + im * im;
        }
    }
    return gain;
}

double achievable_rate(double bandwidth_hz, double gain_linear,
                       const ChannelParams& params) {
    if (bandwidth_hz <= 0.0) return 0.0;
    const double snr =
        params.tx_power_linear() * gain_linear / (params.noise_psd_linear() * bandwidth_hz);
    return bandwidth_hz * std::log2(1.0 + snr);
}

std::optional<double> min_bandwidth(double size_bits, double gain_linear,
                                    const ChannelParams& params, double dt_s) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("min_bandwidth: dt <= 0");
    if (size_bits <= 0.0) return 0.0;

    const double required = size_bits / dt_s;  // bits/s
    const double s = params.tx_power_linear() * gain_linear / params.noise_psd_linear();
    const double ceiling = s / std::numbers::ln2;
    if (required >= ceiling) return std::nullopt;

    // rate(B) is strictly increasing in B, so bracket then bisect.
    double hi = std::max(required, 1.0);
    while (achievable_rate(hi, gain_linear, params) < required) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (achievable_rate(mid, gain_linear, params) >= required) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-9 * hi) break;
    }
    return hi;
}

double feature_size_bits(Vec2 cov_pos, double sensing_range_m,
                         const RegionGeometry& region, const ChannelParams& params) {
    double overlap;
    if (region.circular) {
        overlap = circle_circle_intersection_area(cov_pos, sensing_range_m,
                                                  region.center, region.radius);
    } else {
        // Work in the region frame: the rectangle becomes axis-aligned and the
        // disc is rotation invariant.
        const Vec2 d = cov_pos - region.center;
        const double c = std::cos(region.heading), s = std::sin(region.heading);
        const Vec2 local{d.x * c + d.y * s, -d.x * s + d.y * c};
        const Rect rect{{-region.half_long, -region.half_lat},
                        {region.half_long, region.half_lat}};
        overlap = circle_rect_intersection_area(local, sensing_range_m, rect);
    }
    if (overlap <= 0.0) return 0.0;
    constexpr double kReferenceArea = 200.0 * 80.0;
    double mb = params.feature_mb_full_region * overlap / kReferenceArea;
    mb = std::max(mb, params.feature_floor_mb);
    return mb * params.mb_bytes * 8.0;
}

}  // namespace cmass::channel
