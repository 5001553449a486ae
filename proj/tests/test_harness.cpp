#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "cmass/harness.hpp"

using namespace cmass;
using namespace cmass::harness;

namespace {

// Tiny but non-degenerate desk configuration for fast integration checks.
ExperimentConfig tiny_config(Algorithm algo, long frames = 30) {
    ExperimentConfig cfg;
    cfg.mode = Mode::Edge;
    cfg.frames = frames;
    cfg.seed = 3;
    cfg.algorithm = algo;
    cfg.bandwidth_hz = 8e6;
    cfg.world.blocks = 2;
    cfg.world.vehicles = 24;
    cfg.world.mpr = 0.5;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("cmass_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("budget holds frame by frame for bandwidth-charged algorithms") {
    for (Algorithm algo : {Algorithm::Cmass, Algorithm::Closest, Algorithm::Area,
                           Algorithm::Optimal}) {
        const ExperimentConfig cfg = tiny_config(algo, 20);
        const RunResult r = run_experiment(cfg);
        for (const FrameRecord& rec : r.records) {
            CHECK(rec.bandwidth_used <= cfg.bandwidth_hz + 1e-6);
            double sum = 0.0;
            for (const auto& [id, cost] : rec.scheduled) sum += cost;
            CHECK(sum == doctest::Approx(rec.bandwidth_used));
        }
        CHECK(r.summary.weighted_recall >= 0.0);
        CHECK(r.summary.weighted_recall <= 1.0);
    }
}

TEST_CASE("cpm charges nothing and detects only first-order objects") {
    const ExperimentConfig cfg = tiny_config(Algorithm::Cpm, 20);
    const RunResult r = run_experiment(cfg);
    for (const FrameRecord& rec : r.records) {
        CHECK(rec.scheduled.empty());
        CHECK(rec.bandwidth_used == 0.0);
    }
}

TEST_CASE("identical config and seed reproduce identical records") {
    const ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 25);
    const RunResult a = run_experiment(cfg);
    const RunResult b = run_experiment(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].scheduled == b.records[i].scheduled);
        CHECK(a.records[i].detected == b.records[i].detected);
        CHECK(a.records[i].utility == b.records[i].utility);
        CHECK(a.records[i].cum_recall == b.records[i].cum_recall);
    }
}

TEST_CASE("per-frame optimal dominates the other algorithms frame-wise") {
    const ExperimentConfig base = tiny_config(Algorithm::Optimal, 15);
    const RunResult opt = run_experiment(base);
    for (Algorithm algo : {Algorithm::Cmass, Algorithm::Closest, Algorithm::Area}) {
        ExperimentConfig cfg = base;
        cfg.algorithm = algo;
        const RunResult r = run_experiment(cfg);
        REQUIRE(r.records.size() == opt.records.size());
        for (std::size_t i = 0; i < r.records.size(); ++i) {
            CHECK(opt.records[i].utility >= r.records[i].utility - 1e-9);
        }
    }
}

TEST_CASE("distributed mode runs with a free user contribution") {
    ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 20);
    cfg.mode = Mode::Distributed;
    cfg.bandwidth_hz = 4e6;
    const RunResult r = run_experiment(cfg);
    CHECK(r.summary.weighted_recall >= 0.0);
    // The user never pays for itself.
    for (const FrameRecord& rec : r.records) {
        for (const auto& [id, cost] : rec.scheduled) CHECK(cost >= 0.0);
        CHECK(rec.bandwidth_used <= cfg.bandwidth_hz + 1e-6);
    }
}

TEST_CASE("frame records reconcile with the summary recall") {
    const ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 40);
    const RunResult r = run_experiment(cfg);
    double num = 0.0, denom = 0.0;
    for (const FrameRecord& rec : r.records) {
        num += rec.utility;
        denom += rec.total_weight;
        CHECK(rec.cum_recall ==
              doctest::Approx(denom > 0 ? num / denom : 0.0).epsilon(1e-12));
    }
    CHECK(r.summary.weighted_recall ==
          doctest::Approx(denom > 0 ? num / denom : 0.0).epsilon(1e-12));
}

TEST_CASE("outputs: jsonl round trip reproduces the cumulative recall") {
    TempDir dir;
    const ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 25);
    const RunResult r = run_experiment(cfg);
    emit_outputs(cfg, r, dir.path);

    std::ifstream in(dir.path / "frames.jsonl");
    REQUIRE(in.good());
    std::string line;
    double num = 0.0, denom = 0.0;
    long count = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        num += j.at("utility").get<double>();
        denom += j.at("total_weight").get<double>();
        const double expect = denom > 0 ? num / denom : 0.0;
        CHECK(j.at("cum_recall").get<double>() == doctest::Approx(expect).epsilon(1e-12));
        ++count;
    }
    CHECK(count == 25);

    CHECK(slurp(dir.path / "summary.csv").find("weighted_recall") != std::string::npos);
    const auto resolved = nlohmann::json::parse(slurp(dir.path / "config.resolved.json"));
    CHECK(resolved.at("seed").get<std::uint64_t>() == cfg.seed);
}

TEST_CASE("outputs: zero-frame run still writes valid files") {
    TempDir dir;
    ExperimentConfig cfg = tiny_config(Algorithm::Cpm, 1);
    RunResult empty;
    empty.summary.mode = cfg.mode;
    empty.summary.algorithm = cfg.algorithm;
    emit_outputs(cfg, empty, dir.path);
    CHECK(slurp(dir.path / "frames.jsonl").empty());
    CHECK(slurp(dir.path / "summary.csv").find("mode,") == 0);
}

TEST_CASE("resolved config replays to identical outputs") {
    TempDir dir1, dir2;
    const ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 20);
    const RunResult r1 = run_experiment(cfg);
    emit_outputs(cfg, r1, dir1.path);

    const ExperimentConfig replay =
        config_from_json_text(slurp(dir1.path / "config.resolved.json"));
    const RunResult r2 = run_experiment(replay);
    emit_outputs(replay, r2, dir2.path);
    CHECK(slurp(dir1.path / "frames.jsonl") == slurp(dir2.path / "frames.jsonl"));
}

TEST_CASE("config parsing: comments, defaults, and errors") {
    const std::string text = R"({
        // desk-scale example
        "mode": "distributed",
        "frames": 7,
        "seed": 42,
        "algorithm": "closest",
        "bandwidth_hz": 4e6,  // Hz
        "world": {"vehicles": 12, "mpr": 0.25},
        "scheduler": {"mix_weight": "auto", "alpha": 0.02}
    })";
    const ExperimentConfig cfg = config_from_json_text(text);
    CHECK(cfg.mode == Mode::Distributed);
    CHECK(cfg.frames == 7);
    CHECK(cfg.seed == 42);
    CHECK(cfg.algorithm == Algorithm::Closest);
    CHECK(cfg.world.vehicles == 12);
    CHECK(cfg.world.mpr == 0.25);
    CHECK_FALSE(cfg.scheduler.mix_weight.has_value());
    CHECK(cfg.scheduler.alpha == 0.02);
    CHECK(cfg.world.block_side_m == 200.0);  // untouched default

    CHECK_THROWS(config_from_json_text(R"({"mode": "nonsense"})"));
    CHECK_THROWS(config_from_json_text(R"({"algorithm": "nonsense"})"));

    ExperimentConfig bad;
    bad.world.mpr = 1.5;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("sweep: single cell equals a direct run, rows aggregate seeds") {
    ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 10);
    const auto cells = sweep(cfg, SweepAxis::Bandwidth, {8e6}, 1, 2);
    REQUIRE(cells.size() == 1);
    const RunResult direct = run_experiment(cfg);
    CHECK(cells[0].mean_recall == doctest::Approx(direct.summary.weighted_recall));
    CHECK(cells[0].std_recall == 0.0);

    const auto multi = sweep(cfg, SweepAxis::Mpr, {0.25, 0.75}, 2, 2);
    REQUIRE(multi.size() == 2);
    CHECK(multi[0].seeds == 2);
}

TEST_CASE("one frame with no covs yields recall zero") {
    ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 1);
    cfg.world.mpr = 0.0;
    const RunResult r = run_experiment(cfg);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].scheduled.empty());
    CHECK(r.summary.weighted_recall == 0.0);
}

TEST_CASE("empirical dump is flag-gated and well-formed") {
    TempDir dir;
    ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 10);
    const RunResult off = run_experiment(cfg);
    CHECK(off.empirical_dump.empty());

    cfg.dump_empirical = true;
    const RunResult on = run_experiment(cfg);
    REQUIRE(on.empirical_dump.size() == 10);
    emit_outputs(cfg, on, dir.path);
    std::ifstream in(dir.path / "empirical.jsonl");
    std::string line;
    long lines = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("first"));
        CHECK(j.contains("tau"));
        ++lines;
    }
    CHECK(lines == 10);
}

TEST_CASE("ar1 shadowing stays deterministic per seed") {
    ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 10);
    cfg.channel.shadowing_ar1_rho = 0.9;
    const RunResult a = run_experiment(cfg);
    const RunResult b = run_experiment(cfg);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].scheduled == b.records[i].scheduled);
    }
}

TEST_CASE("trace-driven run consumes the provided frames") {
    TempDir dir;
    std::filesystem::create_directories(dir.path);
    const auto trace = dir.path / "trace.jsonl";
    {
        std::ofstream out(trace);
        // One CoV circling the edge anchor; one object inside the region.
        // Anchor for 2x2 blocks sits at (212, 212).
        for (int t = 0; t < 5; ++t) {
            out << R"({"t":)" << t
                << R"(,"id":1,"kind":"cov","x":)" << (212.0 + t)
                << R"(,"y":190.0,"heading":0.0,"speed":10.0})" << "\n";
            out << R"({"t":)" << t
                << R"(,"id":2,"kind":"vehicle","x":212.0,"y":220.0,"heading":0.0,"speed":0.0})"
                << "\n";
        }
    }
    ExperimentConfig cfg = tiny_config(Algorithm::Cmass, 100);
    cfg.trace_path = trace.string();
    const RunResult r = run_experiment(cfg);
    CHECK(r.records.size() == 5);  // bounded by the trace length
    CHECK(r.summary.weighted_recall > 0.0);  // the CoV sees the nearby object

    // With near-zero difficulties the lone object is detected every frame.
    cfg.detection.difficulty_scale = 1e12;
    cfg.detection.difficulty_bias = 0.0;
    const RunResult easy = run_experiment(cfg);
    CHECK(easy.summary.weighted_recall == doctest::Approx(1.0));
}
