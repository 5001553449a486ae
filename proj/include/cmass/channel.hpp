#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include "cmass/geometry.hpp"
#include "cmass/rng.hpp"

// V2X sidelink model: link classification (LOS / NLOSv / NLOS), log-distance
// pathloss with shadowing, per-blocker attenuation and fast fading, Shannon
// rate, and the minimum-bandwidth cost of moving a feature of a given size
// within one frame.
namespace cmass::channel {

enum class LinkClass { LOS, NLOSv, NLOS };

struct PathlossCoefficients {
    double a = 0.0;  // dB
    double b = 0.0;  // dB per decade of distance (m)
    double c = 0.0;  // dB per decade of carrier frequency (GHz)
};

struct ChannelParams {
    double carrier_ghz = 5.9;
    double tx_power_dbm = 23.0;
    double noise_psd_dbm_hz = -174.0;
    double noise_figure_db = 9.0;
    double shadowing_std_los_db = 3.0;
    double shadowing_std_nlosv_db = 3.0;
    double shadowing_std_nlos_db = 4.0;
    double shadowing_ar1_rho = 0.0;       // 0 disables temporal correlation
    double blocker_loss_mean_db = 5.0;
    double blocker_loss_var_db2 = 4.0;    // variance of the pre-truncation normal
    double rician_k_db = 9.0;
    bool fading = true;
    double max_comm_distance_m = 150.0;
    // TR 37.885 urban coefficients; NLOSv uses the LOS pathloss plus
    // per-blocker losses.
    PathlossCoefficients pathloss_los{38.77, 16.7, 18.2};
    PathlossCoefficients pathloss_nlos{36.85, 30.0, 18.9};
    double feature_mb_full_region = 0.20;  // for a 200 m x 80 m request
    double feature_floor_mb = 0.01;
    double mb_bytes = 1048576.0;           // MB = 2^20 bytes

    // Effective noise PSD in linear W/Hz; the receiver noise figure is
    // accounted here (once).
    double noise_psd_linear() const {
        return std::pow(10.0, (noise_psd_dbm_hz + noise_figure_db - 30.0) / 10.0);
    }
    double tx_power_linear() const {
        return std::pow(10.0, (tx_power_dbm - 30.0) / 10.0);
    }
};

struct LinkState {
    LinkClass cls = LinkClass::LOS;
    int n_blockers = 0;
};

// Occluder view of one frame: building footprints block to NLOS, vehicle
// bodies count as NLOSv blockers. A building always dominates vehicles.
LinkState classify_link(Vec2 a, Vec2 b, std::span<const Rect> buildings,
                        std::span<const OrientedBox> vehicle_bodies);

// Linear power gain c of one link realization. Consumes shadowing and
// blockage draws from rng; fast fading on top when params.fading is set.
// With all stochastic terms disabled (std 0, no blockers, fading off) the
// gain is the deterministic pathloss. `shadow_db_override` replaces the
// internal i.i.d. shadowing draw (AR(1)-correlated shadowing is maintained by
// the caller).
double channel_gain(const LinkState& link, double distance_m,
                    const ChannelParams& params, Rng& rng,
                    const double* shadow_db_override = nullptr);

double pathloss_db(LinkClass cls, double distance_m, const ChannelParams& params);

// Shannon rate in bits/s at allocated bandwidth W (Hz).
double achievable_rate(double bandwidth_hz, double gain_linear,
                       const ChannelParams& params);

// Minimum bandwidth solving rate(B) * dt = size_bits, to 1e-9 relative
// tolerance. nullopt when the demand sits at or above the wideband capacity
// ceiling P*c/(n0*ln2).
std::optional<double> min_bandwidth(double size_bits, double gain_linear,
                                    const ChannelParams& params, double dt_s);

// Requested-feature size in bits: proportional to the overlap of the CoV's
// sensing disc with the requested region, floored when the overlap is
// non-empty.
struct RegionGeometry {
    bool circular = true;
    Vec2 center;          // circle center (circular) / rectangle center
    double radius = 0.0;  // circular
    double half_long = 0.0, half_lat = 0.0, heading = 0.0;  // rectangle
};

double feature_size_bits(Vec2 cov_pos, double sensing_range_m,
                         const RegionGeometry& region, const ChannelParams& params);

}  // namespace cmass::channel
