// Command-line front end: run one experiment, sweep a parameter axis, fit the
// detection model to an empirical grid, or run the verification suites.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cmass/detmodel.hpp"
#include "cmass/harness.hpp"
#include "cmass/verify.hpp"

namespace {

using cmass::harness::ExperimentConfig;

int cmd_simulate(const std::string& config_path, const std::string& algo,
                 long seed, long frames, const std::string& out_dir) {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig{}
                               : cmass::harness::config_from_json_file(config_path);
    if (!algo.empty()) {
        const auto a = cmass::harness::algorithm_from_string(algo);
        if (!a) {
            std::cerr << "unknown algorithm: " << algo << "\n";
            return 2;
        }
        cfg.algorithm = *a;
    }
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (frames > 0) cfg.frames = frames;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cfg.out_dir.empty()) cfg.out_dir = "out";

    const auto result = cmass::harness::run_experiment(cfg);
    cmass::harness::emit_outputs(cfg, result, cfg.out_dir);
    std::cout << "algorithm=" << cmass::harness::to_string(cfg.algorithm)
              << " seed=" << cfg.seed << " frames=" << result.summary.frames
              << " weighted_recall=" << result.summary.weighted_recall << "\n"
              << "outputs in " << cfg.out_dir << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis_name,
              const std::vector<double>& values, int seeds, const std::string& out_dir) {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig{}
                               : cmass::harness::config_from_json_file(config_path);
    const auto axis = cmass::harness::axis_from_string(axis_name);
    if (!axis) {
        std::cerr << "unknown axis: " << axis_name << " (mpr|bandwidth|alpha|beta)\n";
        return 2;
    }
    const auto cells = cmass::harness::sweep(cfg, *axis, values, seeds);

    std::ostringstream csv;
    csv << "axis,value,seeds,mean_recall,std_recall\n";
    for (const auto& c : cells) {
        csv << axis_name << ',' << c.value << ',' << c.seeds << ',' << c.mean_recall << ','
            << c.std_recall << "\n";
    }
    std::cout << csv.str();
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(std::filesystem::path(out_dir) / "sweep.csv");
        f << csv.str();
    }
    return 0;
}

int cmd_fit(const std::string& grid_path, const std::string& out_path) {
    std::ifstream in(grid_path);
    if (!in) {
        std::cerr << "cannot open grid: " << grid_path << "\n";
        return 2;
    }
    std::vector<cmass::detmodel::GridCell> grid;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find("log_n1") == 0) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        if (vals.size() != 3) {
            std::cerr << "grid line " << line_no << ": expected log_n1,log_n2,miss_prob\n";
            return 2;
        }
        grid.push_back({vals[0], vals[1], vals[2]});
    }
    const auto model = cmass::detmodel::fit_model(grid);
    nlohmann::ordered_json j;
    j["detection"] = {{"p_norm", model.p},
                      {"difficulty_scale", model.difficulty_scale},
                      {"difficulty_bias", model.difficulty_bias}};
    const std::string text = j.dump(2);
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        out << text << "\n";
        std::cout << "fitted p=" << model.p << " scale=" << model.difficulty_scale
                  << " bias=" << model.difficulty_bias << " -> " << out_path << "\n";
    }
    return 0;
}

int cmd_verify(const std::string& suite, int instances, long seed) {
    using cmass::verify::SuiteResult;
    SuiteResult r;
    const std::uint64_t s = seed >= 0 ? static_cast<std::uint64_t>(seed) : 0;
    if (suite == "submodularity") {
        r = cmass::verify::submodularity_suite(instances > 0 ? instances : 1000,
                                               seed >= 0 ? s : 2024);
    } else if (suite == "lemma2") {
        r = cmass::verify::incremental_suite(instances > 0 ? instances : 500,
                                             seed >= 0 ? s : 777);
    } else if (suite == "approx-ratio") {
        r = cmass::verify::approx_ratio_suite(instances > 0 ? instances : 500,
                                              seed >= 0 ? s : 31337);
    } else if (suite == "examples") {
        r = cmass::verify::examples_suite();
    } else if (suite == "channel") {
        r = cmass::verify::channel_suite(instances > 0 ? instances : 100,
                                         seed >= 0 ? s : 99);
    } else {
        std::cerr << "unknown suite: " << suite
                  << " (submodularity|lemma2|approx-ratio|examples|channel)\n";
        return 2;
    }
    std::cout << (r.pass ? "PASS" : "FAIL") << " " << suite << ": " << r.detail << "\n";
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"C-MASS collaborative-perception scheduling simulator"};
    app.require_subcommand(1);

    std::string config_path, algo, out_dir, axis, grid_path, fit_out, suite;
    long seed = -1, frames = -1;
    int seeds = 1, instances = -1;
    std::vector<double> values;

    auto* sim = app.add_subcommand("simulate", "run one experiment");
    sim->add_option("--config", config_path, "experiment config (JSON, // comments ok)");
    sim->add_option("--algo", algo, "cmass|first-order|closest|area|cpm|optimal");
    sim->add_option("--seed", seed, "override the config seed");
    sim->add_option("--frames", frames, "override the frame count");
    sim->add_option("--out", out_dir, "output directory");

    auto* sw = app.add_subcommand("sweep", "sweep one axis over seeds");
    sw->add_option("--config", config_path, "experiment config");
    sw->add_option("--axis", axis, "mpr|bandwidth|alpha|beta")->required();
    sw->add_option("--values", values, "axis values")->required()->expected(-1);
    sw->add_option("--seeds", seeds, "seeds per value (base seed from config)");
    sw->add_option("--out", out_dir, "write sweep.csv here");

    auto* fit = app.add_subcommand("fit", "fit the detection model to a miss-probability grid");
    fit->add_option("--grid", grid_path, "CSV: log_n1,log_n2,miss_prob")->required();
    fit->add_option("--out", fit_out, "write the model fragment here (default stdout)");

    auto* ver = app.add_subcommand("verify", "run a verification suite");
    ver->add_option("--suite", suite, "submodularity|lemma2|approx-ratio|examples|channel")
        ->required();
    ver->add_option("--instances", instances, "instance count override");
    ver->add_option("--seed", seed, "seed override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(config_path, algo, seed, frames, out_dir);
        if (sw->parsed()) return cmd_sweep(config_path, axis, values, seeds, out_dir);
        if (fit->parsed()) return cmd_fit(grid_path, fit_out);
        if (ver->parsed()) return cmd_verify(suite, instances, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
