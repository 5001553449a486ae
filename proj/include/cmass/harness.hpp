#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmass/baselines.hpp"
#include "cmass/channel.hpp"
#include "cmass/scheduler.hpp"
#include "cmass/sensing.hpp"
#include "cmass/world.hpp"

// Per-frame experiment loop: mobility -> candidate CoVs and weighted objects
// -> link costs -> scheduling -> detection evaluation -> empirical-topology
// maintenance -> records and summary metrics.
namespace cmass::harness {

enum class Mode { Edge, Distributed };

enum class Algorithm { Cmass, CmassFirstOrder, Closest, Area, Cpm, Optimal };

std::string to_string(Algorithm a);
std::optional<Algorithm> algorithm_from_string(const std::string& s);

struct ExperimentConfig {
    Mode mode = Mode::Edge;
    long frames = 1000;
    std::uint64_t seed = 1;
    Algorithm algorithm = Algorithm::Cmass;
    double bandwidth_hz = 8e6;
    std::string out_dir;
    std::string trace_path;  // empty: built-in mobility
    world::TraceFormat trace_format = world::TraceFormat::Jsonl;

    world::WorldConfig world;
    sensing::LidarConfig lidar;
    detmodel::DetectionModel detection;
    channel::ChannelParams channel;
    scheduler::SchedulerParams scheduler;
    bool refinement = true;
    bool dump_empirical = false;  // per-frame empirical topology to empirical.jsonl
    double edge_radius_m = 70.0;
    double rect_half_long_m = 100.0;
    double rect_half_lat_m = 40.0;
    double area_cell_m = 5.0;
    int optimal_cap = 18;

    void validate() const;
};

struct FrameRecord {
    long t = 0;
    std::string algorithm;
    std::vector<std::pair<scheduler::CovId, double>> scheduled;  // id, cost Hz
    double bandwidth_used = 0.0;
    std::vector<scheduler::ObjId> detected;
    double utility = 0.0;       // weighted utility g_t
    double total_weight = 0.0;  // sum of object weights this frame
    double cum_recall = 0.0;
};

struct RunSummary {
    Mode mode;
    Algorithm algorithm;
    std::uint64_t seed = 0;
    long frames = 0;
    double weighted_recall = 0.0;
    double mean_candidates = 0.0;
    double mean_scheduled = 0.0;
};

struct RunResult {
    std::vector<FrameRecord> records;
    RunSummary summary;
    std::vector<std::string> empirical_dump;  // JSON lines, when enabled
};

RunResult run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { Mpr, Bandwidth, Alpha, Beta };
std::optional<SweepAxis> axis_from_string(const std::string& s);

struct SweepCell {
    double value = 0.0;
    double mean_recall = 0.0;
    double std_recall = 0.0;
    int seeds = 0;
};

// One run_experiment per (value, seed), parallel across cells; summarizes
// mean and std of the weighted recall per value.
std::vector<SweepCell> sweep(const ExperimentConfig& base, SweepAxis axis,
                             const std::vector<double>& values, int seeds,
                             int threads = 0);

// frames.jsonl + summary.csv + config.resolved.json under `dir`.
void emit_outputs(const ExperimentConfig& cfg, const RunResult& result,
                  const std::filesystem::path& dir);

// Config (de)serialization. The file format is JSON with // comments allowed.
ExperimentConfig config_from_json_file(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace cmass::harness
