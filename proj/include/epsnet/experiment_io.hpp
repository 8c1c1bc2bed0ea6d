#pragma once

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "epsnet/evaluation.hpp"

namespace epsnet {

// Manifests capture the full experiment config plus seed so a rerun from
// the manifest reproduces every output byte for byte.

inline void to_json(nlohmann::json& j, const SuperArmExperiment& c) {
  j = {{"experiment", "superarm"},
       {"grid_lo", c.grid_lo},
       {"grid_hi", c.grid_hi},
       {"grid_count", c.grid_count},
       {"length_scales", c.length_scales},
       {"subset_size", c.subset_size},
       {"bandit_rounds", c.bandit_rounds},
       {"sh_budget", c.sh_budget},
       {"ucb_scale", c.ucb_scale},
       {"reps", c.reps},
       {"eval_samples", c.eval_samples},
       {"scale", c.scale},
       {"seed", c.seed},
       {"timings", c.timings}};
}

inline void from_json(const nlohmann::json& j, SuperArmExperiment& c) {
  j.at("grid_lo").get_to(c.grid_lo);
  j.at("grid_hi").get_to(c.grid_hi);
  j.at("grid_count").get_to(c.grid_count);
  j.at("length_scales").get_to(c.length_scales);
  j.at("subset_size").get_to(c.subset_size);
  j.at("bandit_rounds").get_to(c.bandit_rounds);
  j.at("sh_budget").get_to(c.sh_budget);
  j.at("ucb_scale").get_to(c.ucb_scale);
  j.at("reps").get_to(c.reps);
  j.at("eval_samples").get_to(c.eval_samples);
  j.at("scale").get_to(c.scale);
  j.at("seed").get_to(c.seed);
  j.at("timings").get_to(c.timings);
}

inline void to_json(nlohmann::json& j, const CombinatorialExperiment& c) {
  j = {{"experiment", "combinatorial"},
       {"grid_lo", c.grid_lo},
       {"grid_hi", c.grid_hi},
       {"grid_count", c.grid_count},
       {"length_scales", c.length_scales},
       {"subset_size", c.subset_size},
       {"ts_rounds", c.ts_rounds},
       {"semibandit_rounds", c.semibandit_rounds},
       {"ucb_scale", c.ucb_scale},
       {"duplicates_consume_budget", c.duplicates_consume_budget},
       {"reps", c.reps},
       {"eval_samples", c.eval_samples},
       {"scale", c.scale},
       {"seed", c.seed},
       {"timings", c.timings}};
}

inline void from_json(const nlohmann::json& j, CombinatorialExperiment& c) {
  j.at("grid_lo").get_to(c.grid_lo);
  j.at("grid_hi").get_to(c.grid_hi);
  j.at("grid_count").get_to(c.grid_count);
  j.at("length_scales").get_to(c.length_scales);
  j.at("subset_size").get_to(c.subset_size);
  j.at("ts_rounds").get_to(c.ts_rounds);
  j.at("semibandit_rounds").get_to(c.semibandit_rounds);
  j.at("ucb_scale").get_to(c.ucb_scale);
  j.at("duplicates_consume_budget").get_to(c.duplicates_consume_budget);
  j.at("reps").get_to(c.reps);
  j.at("eval_samples").get_to(c.eval_samples);
  j.at("scale").get_to(c.scale);
  j.at("seed").get_to(c.seed);
  j.at("timings").get_to(c.timings);
}

inline void to_json(nlohmann::json& j, const SphereExperiment& c) {
  j = {{"experiment", "sphere"},
       {"spreads", c.spreads},
       {"num_centers", c.num_centers},
       {"points_per", c.points_per},
       {"dim", c.dim},
       {"iterations", c.iterations},
       {"reps", c.reps},
       {"eval_samples", c.eval_samples},
       {"scale", c.scale},
       {"seed", c.seed},
       {"timings", c.timings}};
}

inline void from_json(const nlohmann::json& j, SphereExperiment& c) {
  j.at("spreads").get_to(c.spreads);
  j.at("num_centers").get_to(c.num_centers);
  j.at("points_per").get_to(c.points_per);
  j.at("dim").get_to(c.dim);
  j.at("iterations").get_to(c.iterations);
  j.at("reps").get_to(c.reps);
  j.at("eval_samples").get_to(c.eval_samples);
  j.at("scale").get_to(c.scale);
  j.at("seed").get_to(c.seed);
  j.at("timings").get_to(c.timings);
}

inline void to_json(nlohmann::json& j, const GibbsExperiment& c) {
  j = {{"experiment", "gibbs"},
       {"grid_lo", c.grid_lo},
       {"grid_hi", c.grid_hi},
       {"grid_count", c.grid_count},
       {"iterations", c.iterations},
       {"runs", c.runs},
       {"smooth_window", c.smooth_window},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, GibbsExperiment& c) {
  j.at("grid_lo").get_to(c.grid_lo);
  j.at("grid_hi").get_to(c.grid_hi);
  j.at("grid_count").get_to(c.grid_count);
  j.at("iterations").get_to(c.iterations);
  j.at("runs").get_to(c.runs);
  j.at("smooth_window").get_to(c.smooth_window);
  j.at("seed").get_to(c.seed);
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

inline void write_manifest(const std::filesystem::path& dir, const nlohmann::json& config,
                           const std::vector<std::string>& outputs) {
  nlohmann::json j = config;
  j["outputs"] = outputs;
  write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

// Runs the named experiment and writes results + manifest under out_dir.
template <typename Config>
std::vector<ResultRow> run_and_write(const Config& cfg,
                                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::vector<ResultRow> rows = [&] {
    if constexpr (std::is_same_v<Config, SuperArmExperiment>)
      return run_experiment_superarm(cfg);
    else if constexpr (std::is_same_v<Config, CombinatorialExperiment>)
      return run_experiment_combinatorial(cfg);
    else
      return run_experiment_sphere(cfg);
  }();
  std::ofstream os(out_dir / "results.csv", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write results.csv");
  write_results_csv(os, rows);
  os.close();
  write_manifest(out_dir, nlohmann::json(cfg), {"results.csv"});
  return rows;
}

inline GibbsResult run_and_write_gibbs(const GibbsExperiment& cfg,
                                       const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const GibbsResult res = run_experiment_gibbs(cfg);
  std::ofstream os(out_dir / "histogram.csv", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write histogram.csv");
  write_gibbs_csv(os, res);
  os.close();
  write_manifest(out_dir, nlohmann::json(cfg), {"histogram.csv"});
  return res;
}

}  // namespace epsnet
