// Command-line front end: action-space generators, the subset-selection
// algorithm, bound verification, and the experiment runners.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "epsnet/evaluation.hpp"
#include "epsnet/experiment_io.hpp"
#include "epsnet/fixtures.hpp"
#include "epsnet/verify.hpp"

namespace {

using namespace epsnet;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(std::stod(p));
  return out;
}

int resolve_workers(int flag_value) {
  if (const char* env = std::getenv("BANDIT_SUBSET_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return flag_value >= 1 ? flag_value : worker_count();
}

Eigen::MatrixXd read_matrix_csv(const std::string& path, bool skip_first_col) {
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("cannot read " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {  // header row: idx,x0,...
      header = false;
      continue;
    }
    const auto parts = split(line, ',');
    std::vector<double> row;
    for (std::size_t i = skip_first_col ? 1 : 0; i < parts.size(); ++i)
      row.push_back(std::stod(parts[i]));
    rows.push_back(row);
  }
  if (rows.empty()) throw CLI::ValidationError("no data rows in " + path);
  Eigen::MatrixXd m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw CLI::ValidationError("ragged rows in " + path);
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
  }
  return m;
}

ActionSpace parse_space(const std::string& spec, std::uint64_t seed) {
  const auto parts = split(spec, ':');
  if (parts[0] == "grid") {
    if (parts.size() != 4) throw CLI::ValidationError("grid:<lo>:<hi>:<count>");
    return make_grid_space(std::stod(parts[1]), std::stod(parts[2]),
                           std::stoi(parts[3]));
  }
  if (parts[0] == "orthonormal") {
    if (parts.size() != 2) throw CLI::ValidationError("orthonormal:<n>");
    return make_orthonormal_space(std::stoi(parts[1]));
  }
  if (parts[0] == "sphere") {
    if (parts.size() < 2 || parts.size() > 3)
      throw CLI::ValidationError("sphere:<spread>[:<points_per>]");
    const int per = parts.size() == 3 ? std::stoi(parts[2]) : 200;
    return make_sphere_clusters(seed, std::stod(parts[1]), 5, per, 3).space;
  }
  if (parts[0] == "explicit") {
    if (parts.size() != 2) throw CLI::ValidationError("explicit:<csv-path>");
    return make_explicit_space(read_matrix_csv(parts[1], true));
  }
  if (parts[0] == "example1") return example1_model().space();
  throw CLI::ValidationError("unknown space spec: " + spec);
}

std::optional<KernelSpec> parse_kernel(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  const auto parts = split(spec, ':');
  if (parts[0] == "rbf") {
    if (parts.size() != 2) throw CLI::ValidationError("rbf:<length-scale>");
    return KernelSpec::rbf(std::stod(parts[1]));
  }
  if (parts[0] == "gibbs") return KernelSpec::gibbs();
  throw CLI::ValidationError("unknown kernel spec: " + spec);
}

InstanceDistribution parse_theta(const std::string& spec, const RewardModel& model) {
  if (spec.empty() || spec == "normal") return model.default_instance_distribution();
  if (spec == "example1") return example1_distribution();
  const auto parts = split(spec, ':');
  if (parts[0] == "discrete" && parts.size() == 2) {
    const Eigen::MatrixXd m = read_matrix_csv(parts[1], false);
    std::vector<Eigen::VectorXd> support;
    std::vector<double> weights;
    for (int i = 0; i < m.rows(); ++i) {
      weights.push_back(m(i, 0));
      support.push_back(m.row(i).tail(m.cols() - 1).transpose());
    }
    return InstanceDistribution::discrete(support, weights);
  }
  throw CLI::ValidationError("unknown theta spec: " + spec);
}

// Config files mirror flags one-to-one: flat `key=value` lines, or a JSON
// object for nested experiment presets. Values are injected before the
// command-line flags so explicit flags win.
std::vector<std::string> config_tokens(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("cannot read config " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  const std::string text = buffer.str();
  std::vector<std::string> tokens;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {  // nested experiment preset -> --set entries
        for (const auto& [k2, v2] : value.items()) {
          tokens.push_back("--set");
          tokens.push_back(k2 + "=" +
                           (v2.is_string() ? v2.get<std::string>() : v2.dump()));
        }
        continue;
      }
      tokens.push_back("--" + key);
      tokens.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    return tokens;
  }
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("config line is not key=value: " + line);
    tokens.push_back("--" + line.substr(0, eq));
    tokens.push_back(line.substr(eq + 1));
  }
  return tokens;
}

void set_take_last(CLI::App* app) {
  for (auto* opt : app->get_options())
    if (opt->get_expected_min() > 0)
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  for (auto* sub : app->get_subcommands({})) set_take_last(sub);
}

// Applies --set key=value overrides onto a serialized experiment config,
// coercing the string to the field's JSON type. Unknown keys are errors.
nlohmann::json apply_overrides(nlohmann::json config,
                               const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set expects key=value, got " + kv);
    const std::string key = kv.substr(0, eq);
    const std::string value = kv.substr(eq + 1);
    if (!config.contains(key))
      throw CLI::ValidationError("unknown config key: " + key);
    nlohmann::json& slot = config[key];
    if (slot.is_array()) {
      slot = parse_double_list(value);
    } else if (slot.is_boolean()) {
      slot = value == "true" || value == "1";
    } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
      slot = std::stoll(value);
    } else if (slot.is_number_float()) {
      slot = std::stod(value);
    } else {
      slot = value;
    }
  }
  return config;
}

struct SelectArgs {
  std::string space;
  std::string kernel;
  std::string theta;  // empty: model default (example1 space keeps its fixture)
  int k = 1;
  std::string mode = "distinct";
  long max_iterations = 0;
  std::string oracle = "exact";
  int ts_rounds = 300;
  std::uint64_t seed = 0;
  std::string out;
};

int run_select(const SelectArgs& a) {
  ActionSpace space = parse_space(a.space, a.seed);
  const auto kernel = parse_kernel(a.kernel);
  const RewardModel model =
      kernel ? build_kernel_model(space, *kernel) : RewardModel::linear(space);
  const InstanceDistribution dist = a.space == "example1" && a.theta.empty()
                                        ? example1_distribution()
                                        : parse_theta(a.theta, model);
  const OracleSpec oracle = a.oracle == "ts" ? OracleSpec::thompson(a.ts_rounds)
                                             : OracleSpec::exact();
  const StopRule stop = a.mode == "iterations"
                            ? StopRule::iterations(a.k)
                            : StopRule::distinct_count(a.k, a.max_iterations);
  const SelectionResult result =
      epsilon_net_select(model, dist, oracle, stop, a.seed);
  const std::string text = result.to_json().dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(a.out, text);
  }
  return result.complete ? 0 : 2;
}

struct GenArgs {
  std::string space;
  std::string kernel;
  std::uint64_t seed = 0;
  std::string out;
  std::string kernel_out;
};

int run_gen(const GenArgs& a) {
  const ActionSpace space = parse_space(a.space, a.seed);
  std::ofstream os(a.out, std::ios::binary);
  if (!os) throw CLI::ValidationError("cannot write " + a.out);
  write_actions_csv(os, space);
  if (!a.kernel_out.empty()) {
    const auto kernel = parse_kernel(a.kernel);
    if (!kernel) throw CLI::ValidationError("--kernel-out needs --kernel");
    const Eigen::MatrixXd k = kernel_matrix(*kernel, space.actions);
    std::ofstream ks(a.kernel_out, std::ios::binary);
    if (!ks) throw CLI::ValidationError("cannot write " + a.kernel_out);
    ks << "idx";
    for (int j = 0; j < k.cols(); ++j) ks << ",x" << j;
    ks << "\n";
    char buf[40];
    for (int i = 0; i < k.rows(); ++i) {
      ks << i;
      for (int j = 0; j < k.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.12g", k(i, j));
        ks << ',' << buf;
      }
      ks << "\n";
    }
  }
  return 0;
}

struct VerifyArgs {
  std::string check;
  double eps = 0.2;
  std::string eps_list = "0.4,0.2,0.1,0.05";
  int k = 30;
  int runs = 2000;
  int m = 4;
  std::string n_list = "2,8,64";
  long samples = 100000;
  std::string preset = "sphere:0.05";
  double C = 3.0;
  double c_lower = 0.1;
  int reps = 5;
  int scale = 1;
  std::uint64_t seed = 0;
  int threads = 0;
};

int run_verify(const VerifyArgs& a) {
  const int workers = resolve_workers(a.threads);
  CheckResult result;
  if (a.check == "lemma1") {
    result = verify_lemma1(a.eps, a.k, a.runs, a.seed);
  } else if (a.check == "lemma_maxq") {
    result = verify_lemma_maxq(a.m, a.k);
  } else if (a.check == "iid_band") {
    std::vector<int> ns;
    for (const auto& p : split(a.n_list, ',')) ns.push_back(std::stoi(p));
    result = verify_iid_band(ns, a.samples, a.seed, workers);
  } else if (a.check == "widths") {
    result = verify_widths(100, std::max<long>(2000, a.samples / 10), a.seed, workers);
  } else if (a.check == "thm1" || a.check == "thm2") {
    const auto parts = split(a.preset, ':');
    if (parts.size() != 2 || parts[0] != "sphere")
      throw CLI::ValidationError("thm1/thm2 need --preset sphere:<spread>");
    result = verify_thm12(std::stod(parts[1]), 50, a.C, a.reps, a.scale, a.seed,
                          a.check == "thm2", workers);
  } else if (a.check == "thm3") {
    result = verify_thm3(parse_double_list(a.eps_list), a.C, a.scale, a.seed, workers);
  } else if (a.check == "thm5") {
    result = verify_thm5(a.C, a.c_lower, a.seed, a.samples, workers);
  } else {
    throw CLI::ValidationError("unknown check: " + a.check);
  }
  nlohmann::json out;
  out["check"] = result.name;
  out["passed"] = result.passed;
  out["details"] = result.details;
  std::cout << out.dump(2) << "\n";
  return result.passed ? 0 : 1;
}

struct ExperimentArgs {
  std::string id;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int scale = 0;
  int reps = 0;
  std::string out = "out";
  std::string replay;
  bool timings = false;
  int threads = 0;
  std::vector<std::string> sets;
};

template <typename Config>
Config build_config(const ExperimentArgs& a, const nlohmann::json& base) {
  nlohmann::json j = base;
  if (a.seed_given) j["seed"] = a.seed;
  if (a.scale > 0) j["scale"] = a.scale;
  if (a.reps > 0) j["reps"] = a.reps;
  if (a.timings) j["timings"] = true;
  j = apply_overrides(j, a.sets);
  return j.get<Config>();
}

int run_experiment(const ExperimentArgs& args) {
  ExperimentArgs a = args;
  nlohmann::json base;
  if (!a.replay.empty()) {
    std::ifstream is(a.replay);
    if (!is) throw CLI::ValidationError("cannot read manifest " + a.replay);
    base = nlohmann::json::parse(is);
    a.id = base.at("experiment").get<std::string>();
  } else {
    if (!a.seed_given)
      throw CLI::ValidationError("experiment subcommands require --seed");
    if (a.id == "superarm") base = nlohmann::json(SuperArmExperiment{});
    else if (a.id == "combinatorial") base = nlohmann::json(CombinatorialExperiment{});
    else if (a.id == "sphere") base = nlohmann::json(SphereExperiment{});
    else if (a.id == "gibbs") base = nlohmann::json(GibbsExperiment{});
    else throw CLI::ValidationError("unknown experiment: " + a.id);
  }
  const int workers = resolve_workers(a.threads);
  const std::filesystem::path out_dir(a.out);
  if (a.id == "superarm") {
    auto cfg = build_config<SuperArmExperiment>(a, base);
    cfg.workers = workers;
    run_and_write(cfg, out_dir);
  } else if (a.id == "combinatorial") {
    auto cfg = build_config<CombinatorialExperiment>(a, base);
    cfg.workers = workers;
    run_and_write(cfg, out_dir);
  } else if (a.id == "sphere") {
    auto cfg = build_config<SphereExperiment>(a, base);
    cfg.workers = workers;
    run_and_write(cfg, out_dir);
  } else if (a.id == "gibbs") {
    nlohmann::json j = base;
    if (a.seed_given) j["seed"] = a.seed;
    j = apply_overrides(j, a.sets);
    auto cfg = j.get<GibbsExperiment>();
    cfg.workers = workers;
    run_and_write_gibbs(cfg, out_dir);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Representative action-subset selection for bandit families"};
  app.require_subcommand(1);

  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Run the subset-selection algorithm");
  select->add_option("--space", sel.space,
                     "grid:<lo>:<hi>:<n> | orthonormal:<n> | sphere:<spread> | "
                     "explicit:<csv> | example1")
      ->required();
  select->add_option("--kernel", sel.kernel, "rbf:<l> | gibbs (kernel-sampled rewards)");
  select->add_option("--theta", sel.theta, "normal | example1 | discrete:<csv>");
  select->add_option("--k", sel.k, "Subset size / iteration count")->required();
  select->add_option("--mode", sel.mode, "iterations | distinct");
  select->add_option("--max-iterations", sel.max_iterations,
                     "DistinctCount cap (default 1000*K)");
  select->add_option("--oracle", sel.oracle, "exact | ts");
  select->add_option("--ts-rounds", sel.ts_rounds, "TS oracle rounds");
  select->add_option("--seed", sel.seed, "RNG seed")->required();
  select->add_option("--out", sel.out, "Write JSON here instead of stdout");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Emit an action-space CSV");
  gen_cmd->add_option("--space", gen.space, "Space spec")->required();
  gen_cmd->add_option("--kernel", gen.kernel, "Kernel spec for --kernel-out");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed for sphere spaces");
  gen_cmd->add_option("--out", gen.out, "Actions CSV path")->required();
  gen_cmd->add_option("--kernel-out", gen.kernel_out, "Kernel matrix CSV path");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Numerically check a lemma or theorem");
  verify->add_option("check", ver.check,
                     "lemma1 | lemma_maxq | thm1 | thm2 | thm3 | thm5 | "
                     "iid_band | widths")
      ->required();
  verify->add_option("--eps", ver.eps, "Epsilon for lemma1");
  verify->add_option("--eps-list", ver.eps_list, "Epsilon sequence for thm3");
  verify->add_option("--k", ver.k, "Sample count K (lemma1) or exponent (lemma_maxq)");
  verify->add_option("--runs", ver.runs, "Algorithm runs for lemma1");
  verify->add_option("--m", ver.m, "Cluster count for lemma_maxq");
  verify->add_option("--n-list", ver.n_list, "Dimensions for iid_band");
  verify->add_option("--samples", ver.samples, "MC sample count");
  verify->add_option("--preset", ver.preset, "sphere:<spread> for thm1/thm2");
  verify->add_option("--c", ver.C, "Absolute constant C");
  verify->add_option("--cc", ver.c_lower, "Absolute constant c (thm5)");
  verify->add_option("--reps", ver.reps, "Repetitions for thm1/thm2");
  verify->add_option("--scale", ver.scale, "Divide MC sizes by this");
  verify->add_option("--seed", ver.seed, "RNG seed")->required();
  verify->add_option("--threads", ver.threads, "Worker threads");

  ExperimentArgs expa;
  auto* experiment = app.add_subcommand("experiment", "Run an experiment end to end");
  experiment->add_option("id", expa.id, "superarm | combinatorial | sphere | gibbs");
  auto* seed_opt = experiment->add_option("--seed", expa.seed, "Base seed");
  experiment->add_option("--scale", expa.scale, "Eval-instance divisor");
  experiment->add_option("--reps", expa.reps, "Repetitions");
  experiment->add_option("--out", expa.out, "Output directory");
  experiment->add_option("--replay", expa.replay, "Re-run from a manifest.json");
  experiment->add_flag("--timings", expa.timings,
                       "Record wallclock_ms in results (breaks byte determinism)");
  experiment->add_option("--threads", expa.threads, "Worker threads");
  experiment->add_option("--set", expa.sets, "Config override key=value")
      ->take_all();

  // --config <file>: inject file-provided flags ahead of explicit ones
  std::vector<std::string> tokens;
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string t = argv[i];
    if (t == "--config") {
      if (i + 1 >= argc) {
        std::cerr << "--config needs a path\n";
        return 1;
      }
      config_path = argv[++i];
      continue;
    }
    tokens.push_back(t);
  }
  if (!config_path.empty()) {
    try {
      const auto extra = config_tokens(config_path);
      // insert after the subcommand token
      const std::size_t at = tokens.empty() ? 0 : 1;
      tokens.insert(tokens.begin() + static_cast<long>(at), extra.begin(), extra.end());
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    }
  }
  set_take_last(&app);

  try {
    std::vector<const char*> cargv{argv[0]};
    for (const auto& t : tokens) cargv.push_back(t.c_str());
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    // exit-code contract: 0 success, 1 usage/config error
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  expa.seed_given = seed_opt->count() > 0;
  try {
    if (select->parsed()) return run_select(sel);
    if (gen_cmd->parsed()) return run_gen(gen);
    if (verify->parsed()) return run_verify(ver);
    if (experiment->parsed()) return run_experiment(expa);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
