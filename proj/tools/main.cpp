#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "semiadapt/datagen.hpp"
#include "semiadapt/errors.hpp"
#include "semiadapt/eval.hpp"
#include "semiadapt/mlp.hpp"
#include "semiadapt/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semiadapt;

namespace {

// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

json load_json_file(const std::string& path) {
  std::ifstream ifs(path);
  if (!ifs) throw DataError("cannot open: " + path);
  json j;
  try {
    ifs >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": invalid JSON: " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream ofs(path);
  if (!ofs) throw DataError("cannot open for writing: " + path);
  ofs << text;
  if (!ofs) throw DataError("write failed: " + path);
}

std::vector<double> parse_param_list(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
  if (out.size() != 6)
    throw ConfigError("--params expects 6 comma-separated values ax,bx,ay,by,az,bz");
  return out;
}

// Precedence: flags override JSON config values, which override built-ins.
// A JSON value is applied only when its flag was not given on the command
// line; the JSON key is the long flag name without dashes.
template <typename T>
void merge_json_default(const CLI::App* cmd, const json& cfg, const char* flag, const char* key,
                        T& value) {
  if (!cfg.contains(key)) return;
  const CLI::Option* opt = cmd->get_option(flag);
  if (opt->count() > 0) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<std::string> collect_csv_inputs(const std::vector<std::string>& entries) {
  std::vector<std::string> files;
  for (const auto& entry : entries) {
    if (fs::is_directory(entry)) {
      std::vector<std::string> found;
      for (const auto& de : fs::directory_iterator(entry))
        if (de.path().extension() == ".csv") found.push_back(de.path().string());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(entry);
    }
  }
  if (files.empty()) throw DataError("no input CSV files found");
  return files;
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  std::string system;
  std::string config_path;
  std::string out_dir = ".";
  std::string params_csv;
  int trials = 50;
  std::uint64_t seed = 0;
  double noise = -1.0;  // sentinel: keep generator default
  double dt = 0.05;
  double duration = 5.0;
  int steps = 100;
  int action = 0;
  bool shared_noise = false;
  bool per_trial_noise = false;
  bool noise_set = false;
};

void merge_gen_config(GenArgs& a, const CLI::App* cmd) {
  if (a.config_path.empty()) return;
  const json cfg = load_json_file(a.config_path);
  merge_json_default(cmd, cfg, "--out", "out", a.out_dir);
  merge_json_default(cmd, cfg, "--trials", "trials", a.trials);
  merge_json_default(cmd, cfg, "--seed", "seed", a.seed);
  merge_json_default(cmd, cfg, "--dt", "dt", a.dt);
  merge_json_default(cmd, cfg, "--duration", "duration", a.duration);
  merge_json_default(cmd, cfg, "--steps", "steps", a.steps);
  merge_json_default(cmd, cfg, "--action", "action", a.action);
  merge_json_default(cmd, cfg, "--shared-noise", "shared_noise", a.shared_noise);
  merge_json_default(cmd, cfg, "--per-trial-noise", "per_trial_noise", a.per_trial_noise);
  if (cfg.contains("noise_halfwidth") && cmd->get_option("--noise")->count() == 0) {
    a.noise = cfg.at("noise_halfwidth").get<double>();
    a.noise_set = true;
  }
  if (cfg.contains("params") && cmd->get_option("--params")->count() == 0) {
    const auto v = cfg.at("params").get<std::vector<double>>();
    if (v.size() != 6) throw ConfigError("config key 'params' must have 6 entries");
    std::string joined;
    for (double x : v) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      if (!joined.empty()) joined += ",";
      joined += buf;
    }
    a.params_csv = joined;
  }
}

int cmd_gen(const GenArgs& a) {
  fs::create_directories(a.out_dir);
  std::vector<Trajectory> trajs;
  json params_echo;

  if (a.system == "tv") {
    TvParams p;
    if (!a.params_csv.empty()) {
      auto v = parse_param_list(a.params_csv);
      p.ax = v[0]; p.bx = v[1]; p.ay = v[2]; p.by = v[3]; p.az = v[4]; p.bz = v[5];
    }
    if (a.noise_set) p.noise_halfwidth = a.noise;
    p.dt = a.dt;
    p.duration = a.duration;
    p.trials = a.trials;
    p.seed = a.seed;
    p.action_label = a.action;
    p.per_trial_noise = a.per_trial_noise;
    trajs = gen_tv(p);
    params_echo = {{"system", "tv"},
                   {"params", {p.ax, p.bx, p.ay, p.by, p.az, p.bz}},
                   {"noise_halfwidth", p.noise_halfwidth},
                   {"dt", p.dt},
                   {"duration", p.duration},
                   {"trials", p.trials},
                   {"seed", p.seed},
                   {"action", p.action_label},
                   {"per_trial_noise", p.per_trial_noise},
                   {"unit", "m"}};
  } else if (a.system == "ti") {
    TiParams p;
    if (!a.params_csv.empty()) {
      auto v = parse_param_list(a.params_csv);
      p.ax = v[0]; p.bx = v[1]; p.ay = v[2]; p.by = v[3]; p.az = v[4]; p.bz = v[5];
    }
    if (a.noise_set) p.noise_halfwidth = a.noise;
    p.dt = a.dt;
    p.steps = a.steps;
    p.trials = a.trials;
    p.seed = a.seed;
    p.action_label = a.action;
    p.shared_noise = a.shared_noise;
    trajs = gen_ti(p);
    params_echo = {{"system", "ti"},
                   {"params", {p.ax, p.bx, p.ay, p.by, p.az, p.bz}},
                   {"noise_halfwidth", p.noise_halfwidth},
                   {"dt", p.dt},
                   {"steps", p.steps},
                   {"trials", p.trials},
                   {"seed", p.seed},
                   {"action", p.action_label},
                   {"shared_noise", p.shared_noise},
                   {"unit", "dm"}};
  } else {
    throw ConfigError("gen system must be tv or ti");
  }

  json files = json::array();
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "trial_%03zu.csv", i);
    const std::string path = (fs::path(a.out_dir) / name).string();
    write_trajectory_csv(trajs[i], path);
    files.push_back(json{{"file", name},
                         {"samples", trajs[i].size()},
                         {"truncated", trajs[i].truncated}});
  }

  json manifest;
  manifest["command"] = "gen";
  manifest["config"] = params_echo;
  manifest["files"] = std::move(files);
  write_text_file((fs::path(a.out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  std::cerr << "wrote " << trajs.size() << " trials to " << a.out_dir << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string config_path;
  std::vector<std::string> data;
  std::string out = "model.json";
  std::string loss_csv;
  std::vector<int> hidden = {40};
  int n_past = 3;
  int m_future = 3;
  int epochs = 100;
  double lr = 0.001;
  int batch = 0;
  std::uint64_t seed = 0;
  bool apply_smooth = false;
  bool include_action = false;
};

void merge_train_config(TrainArgs& a, const CLI::App* cmd) {
  if (a.config_path.empty()) return;
  const json cfg = load_json_file(a.config_path);
  merge_json_default(cmd, cfg, "--data", "data", a.data);
  merge_json_default(cmd, cfg, "--out", "out", a.out);
  merge_json_default(cmd, cfg, "--loss-csv", "loss_csv", a.loss_csv);
  merge_json_default(cmd, cfg, "--hidden", "hidden", a.hidden);
  merge_json_default(cmd, cfg, "--N", "N", a.n_past);
  merge_json_default(cmd, cfg, "--M", "M", a.m_future);
  merge_json_default(cmd, cfg, "--epochs", "epochs", a.epochs);
  merge_json_default(cmd, cfg, "--lr", "learning_rate", a.lr);
  merge_json_default(cmd, cfg, "--batch", "batch_size", a.batch);
  merge_json_default(cmd, cfg, "--seed", "seed", a.seed);
  merge_json_default(cmd, cfg, "--smooth", "smooth", a.apply_smooth);
  merge_json_default(cmd, cfg, "--include-action", "include_action", a.include_action);
}

int cmd_train(const TrainArgs& a) {
  if (a.data.empty()) throw ConfigError("train requires --data (flag or config)");
  if (a.epochs < 1) throw ConfigError("--epochs must be >= 1");
  const auto files = collect_csv_inputs(a.data);

  std::vector<Sample> samples;
  long skipped = 0;
  for (const auto& path : files) {
    Trajectory traj = read_trajectory_csv(path);
    if (a.apply_smooth) traj = smooth(traj);
    auto s = make_samples(traj, a.n_past, a.m_future, a.include_action, &skipped);
    samples.insert(samples.end(), s.begin(), s.end());
  }
  if (samples.empty())
    throw DataError("dataset empty after windowing (" + std::to_string(skipped) +
                    " trajectories too short)");

  MlpConfig mc;
  mc.input_dim = 3 * a.n_past + (a.include_action ? 1 : 0);
  mc.output_dim = 3 * a.m_future;
  mc.hidden_dims = a.hidden;
  mc.seed = a.seed;

  TrainHyperparams hp;
  hp.learning_rate = a.lr;
  hp.epochs = a.epochs;
  hp.batch_size = a.batch;
  hp.seed = a.seed;

  auto [model, history] = train(init_mlp(mc), samples, hp);
  save_model(model, a.out);

  const std::string loss_path = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  std::ostringstream loss_text;
  char buf[64];
  for (std::size_t e = 0; e < history.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e, history[e]);
    loss_text << buf;
  }
  write_text_file(loss_path, loss_text.str());

  json manifest;
  manifest["command"] = "train";
  manifest["config"] = {{"data", files},        {"hidden_dims", a.hidden},
                        {"N", a.n_past},        {"M", a.m_future},
                        {"epochs", a.epochs},   {"learning_rate", a.lr},
                        {"batch_size", a.batch},{"seed", a.seed},
                        {"smooth", a.apply_smooth},
                        {"include_action", a.include_action}};
  manifest["samples"] = samples.size();
  manifest["skipped_trajectories"] = skipped;
  manifest["final_loss"] = history.back();
  write_text_file(a.out + ".manifest.json", manifest.dump(2) + "\n");
  std::cerr << "trained on " << samples.size() << " samples; final loss " << history.back()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string config_path;
  std::string model_path;
  std::string input = "-";
  std::string output = "-";
  std::string method = "rls-paa";
  int n_past = 3;
  int m_future = 3;
  double lambda1 = 0.998;
  double lambda2 = 1.0;
  double f_init = 1000.0;
  int window = 10;
  int noise_window = 50;
  double noise_prior = 1e-4;
  double confidence = 0.95;
  double identifier_step = 1e-3;
  int identifier_iters = 1;
  bool include_action = false;
};

void merge_run_config(RunArgs& a, const CLI::App* cmd) {
  if (a.config_path.empty()) return;
  const json cfg = load_json_file(a.config_path);
  merge_json_default(cmd, cfg, "--model", "model", a.model_path);
  merge_json_default(cmd, cfg, "--input", "input", a.input);
  merge_json_default(cmd, cfg, "--output", "output", a.output);
  merge_json_default(cmd, cfg, "--method", "method", a.method);
  merge_json_default(cmd, cfg, "--N", "N", a.n_past);
  merge_json_default(cmd, cfg, "--M", "M", a.m_future);
  merge_json_default(cmd, cfg, "--lambda1", "lambda1", a.lambda1);
  merge_json_default(cmd, cfg, "--lambda2", "lambda2", a.lambda2);
  merge_json_default(cmd, cfg, "--f-init", "f_init_scale", a.f_init);
  merge_json_default(cmd, cfg, "--window", "window_size", a.window);
  merge_json_default(cmd, cfg, "--noise-window", "noise_window", a.noise_window);
  merge_json_default(cmd, cfg, "--noise-prior", "noise_prior", a.noise_prior);
  merge_json_default(cmd, cfg, "--confidence", "confidence", a.confidence);
  merge_json_default(cmd, cfg, "--identifier-step", "identifier_step_size", a.identifier_step);
  merge_json_default(cmd, cfg, "--identifier-iters", "identifier_steps_per_sample",
                     a.identifier_iters);
  merge_json_default(cmd, cfg, "--include-action", "include_action", a.include_action);
}

int cmd_run(const RunArgs& a) {
  if (a.model_path.empty()) throw ConfigError("run requires --model (flag or config)");
  const MlpModel model = load_model(a.model_path);

  PipelineConfig cfg;
  cfg.n_past = a.n_past;
  cfg.m_future = a.m_future;
  cfg.include_action = a.include_action;
  cfg.method = adapt_method_from_string(a.method);
  cfg.rls.lambda1 = a.lambda1;
  cfg.rls.lambda2 = a.lambda2;
  cfg.rls.f_init_scale = a.f_init;
  cfg.uncertainty.window_size = a.window;
  cfg.uncertainty.noise_window = a.noise_window;
  cfg.uncertainty.noise_prior = a.noise_prior;
  cfg.identifier.step_size = a.identifier_step;
  cfg.identifier.steps_per_sample = a.identifier_iters;
  cfg.confidence = a.confidence;

  json effective = {{"command", "run"},
                    {"model", a.model_path},
                    {"method", to_string(cfg.method)},
                    {"N", cfg.n_past},
                    {"M", cfg.m_future},
                    {"lambda1", cfg.rls.lambda1},
                    {"lambda2", cfg.rls.lambda2},
                    {"f_init_scale", cfg.rls.f_init_scale},
                    {"window_size", cfg.uncertainty.window_size},
                    {"noise_window", cfg.uncertainty.noise_window},
                    {"noise_prior", cfg.uncertainty.noise_prior},
                    {"identifier_step_size", cfg.identifier.step_size},
                    {"identifier_steps_per_sample", cfg.identifier.steps_per_sample},
                    {"confidence", cfg.confidence},
                    {"include_action", cfg.include_action}};
  std::cerr << effective.dump() << "\n";

  std::ifstream file_in;
  std::istream* in = &std::cin;
  if (a.input != "-") {
    file_in.open(a.input);
    if (!file_in) throw DataError("cannot open: " + a.input);
    in = &file_in;
  }
  std::ofstream file_out;
  std::ostream* out = &std::cout;
  if (a.output != "-") {
    file_out.open(a.output);
    if (!file_out) throw DataError("cannot open for writing: " + a.output);
    out = &file_out;
  }

  Pipeline pipeline(model, cfg);
  std::string line;
  long lineno = 0;
  long emitted = 0;
  while (std::getline(*in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double t = 0.0;
    Eigen::Vector3d pos;
    int action = 0;
    if (line[0] == '{') {
      json rec;
      try {
        rec = json::parse(line);
        t = rec.at("t").get<double>();
        const auto p = rec.at("p").get<std::vector<double>>();
        if (p.size() != 3) throw ParseError("p must have 3 entries");
        pos = Eigen::Vector3d(p[0], p[1], p[2]);
        action = rec.value("action", 0);
      } catch (const json::exception& e) {
        throw ParseError("input line " + std::to_string(lineno) + ": " + e.what());
      }
    } else {
      if (lineno == 1 && line.rfind("t,", 0) == 0) continue;  // CSV header
      std::istringstream ss(line);
      std::string field;
      std::vector<double> vals;
      while (std::getline(ss, field, ',')) {
        try {
          vals.push_back(std::stod(field));
        } catch (const std::exception&) {
          throw ParseError("input line " + std::to_string(lineno) + ": bad number '" + field +
                           "'");
        }
      }
      if (vals.size() != 4 && vals.size() != 5)
        throw ParseError("input line " + std::to_string(lineno) + ": expected 4 or 5 columns");
      t = vals[0];
      pos = Eigen::Vector3d(vals[1], vals[2], vals[3]);
      if (vals.size() == 5) action = static_cast<int>(std::llround(vals[4]));
    }
    auto resolved = pipeline.push(t, pos, action);
    if (resolved) {
      *out << step_result_to_json(*resolved).dump() << "\n";
      ++emitted;
    }
  }

  const auto& diag = pipeline.diagnostics();
  json summary = {{"results", emitted},
                  {"adaptations", diag.adaptation_count},
                  {"rejected_samples", diag.rejected_samples},
                  {"psd_clips", diag.psd_clips},
                  {"degeneracy_count", diag.degeneracy_count},
                  {"adapt_seconds_total", diag.adapt_seconds_total},
                  {"uncertainty_seconds_total", diag.uncertainty_seconds_total}};
  std::cerr << summary.dump() << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string methods_csv;
  bool traces = false;
};

int cmd_compare(const CompareArgs& a) {
  json j = load_json_file(a.config_path);
  ExperimentConfig cfg = experiment_config_from_json(j);
  if (!a.methods_csv.empty()) {
    cfg.methods.clear();
    std::istringstream ss(a.methods_csv);
    std::string m;
    while (std::getline(ss, m, ',')) cfg.methods.push_back(canonical_method(m));
    if (cfg.methods.empty()) throw ConfigError("--methods given but empty");
  }

  EvalReport report = run_experiment(cfg);
  fs::create_directories(a.out_dir);
  // report.json stays byte-deterministic; wall-clock latency goes to timing.json.
  write_text_file((fs::path(a.out_dir) / "report.json").string(),
                  report_to_json(report, false).dump(2) + "\n");
  json timing = json::array();
  for (const MethodReport& m : report.methods)
    timing.push_back({{"method", m.method},
                      {"adapt_mean_seconds", m.adapt_latency.mean_seconds},
                      {"adapt_total_seconds", m.adapt_latency.total_seconds},
                      {"adapt_count", m.adapt_latency.count},
                      {"uncertainty_total_seconds", m.uncertainty_seconds_total}});
  write_text_file((fs::path(a.out_dir) / "timing.json").string(),
                  json{{"methods", timing}}.dump(2) + "\n");
  write_text_file((fs::path(a.out_dir) / "summary.csv").string(), report_to_csv(report));
  if (a.traces)
    write_text_file((fs::path(a.out_dir) / "traces.csv").string(), traces_to_csv(report));

  for (const MethodReport& m : report.methods)
    std::cerr << m.method << " (" << m.arch << "): pooled MSEE " << m.errors.pooled << " "
              << report.unit << "^2 = " << m.pooled_cm2 << " cm^2, coverage " << m.coverage
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-adaptable neural-network trajectory prediction"};
  app.require_subcommand(1);

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "Generate artificial trajectory CSV files");
  gen->add_option("system", gen_args.system, "Generator: tv or ti")->required();
  gen->add_option("--config", gen_args.config_path, "JSON config (flags take precedence)");
  gen->add_option("--out", gen_args.out_dir, "Output directory");
  gen->add_option("--trials", gen_args.trials, "Number of independent trials");
  gen->add_option("--seed", gen_args.seed, "Base seed (trial i uses seed+i)");
  auto* noise_opt = gen->add_option("--noise", gen_args.noise, "Uniform noise half-width");
  gen->add_option("--params", gen_args.params_csv, "ax,bx,ay,by,az,bz");
  gen->add_option("--dt", gen_args.dt, "Sample period in seconds");
  gen->add_option("--duration", gen_args.duration, "tv: curve duration in seconds");
  gen->add_option("--steps", gen_args.steps, "ti: number of transition steps");
  gen->add_option("--action", gen_args.action, "Motion-class label");
  gen->add_flag("--shared-noise", gen_args.shared_noise, "ti: one noise draw shared by axes");
  gen->add_flag("--per-trial-noise", gen_args.per_trial_noise,
                "tv: one time-offset draw per trial instead of per sample");

  TrainArgs train_args;
  auto* tr = app.add_subcommand("train", "Train the offline transition network");
  tr->add_option("--config", train_args.config_path, "JSON config (flags take precedence)");
  tr->add_option("--data", train_args.data, "CSV files or directories");
  tr->add_option("--out", train_args.out, "Model JSON output path");
  tr->add_option("--loss-csv", train_args.loss_csv, "Loss history CSV (default <out>.loss.csv)");
  tr->add_option("--hidden", train_args.hidden, "Hidden layer widths");
  tr->add_option("--N", train_args.n_past, "Past positions per input");
  tr->add_option("--M", train_args.m_future, "Future positions per prediction");
  tr->add_option("--epochs", train_args.epochs, "Training epochs");
  tr->add_option("--lr", train_args.lr, "Learning rate");
  tr->add_option("--batch", train_args.batch, "Batch size (0 = auto)");
  tr->add_option("--seed", train_args.seed, "Seed for init and shuffling");
  tr->add_flag("--smooth", train_args.apply_smooth, "Low-pass filter trajectories first");
  tr->add_flag("--include-action", train_args.include_action, "Append action label to inputs");

  RunArgs run_args;
  auto* rn = app.add_subcommand("run", "Stream measurements through the online loop");
  rn->add_option("--config", run_args.config_path, "JSON config (flags take precedence)");
  rn->add_option("--model", run_args.model_path, "Trained model JSON");
  rn->add_option("--input", run_args.input, "Trajectory CSV/NDJSON path, or - for stdin");
  rn->add_option("--output", run_args.output, "Result NDJSON path, or - for stdout");
  rn->add_option("--method", run_args.method, "rls-paa, identifier, or none");
  rn->add_option("--N", run_args.n_past, "Past positions per input");
  rn->add_option("--M", run_args.m_future, "Future positions per prediction");
  rn->add_option("--lambda1", run_args.lambda1, "Forgetting factor (0,1]");
  rn->add_option("--lambda2", run_args.lambda2, "Gain weighting [0,2]");
  rn->add_option("--f-init", run_args.f_init, "Initial gain scale");
  rn->add_option("--window", run_args.window, "Parameter-increment window size");
  rn->add_option("--noise-window", run_args.noise_window, "Residual window for noise estimate");
  rn->add_option("--noise-prior", run_args.noise_prior, "Prior noise variance");
  rn->add_option("--confidence", run_args.confidence, "Ellipsoid confidence in (0,1)");
  rn->add_option("--identifier-step", run_args.identifier_step, "Identifier step size");
  rn->add_option("--identifier-iters", run_args.identifier_iters, "Identifier steps per sample");
  rn->add_flag("--include-action", run_args.include_action, "Append action label to inputs");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand("compare", "Run the multi-method evaluation harness");
  cmp->add_option("--config", cmp_args.config_path, "Experiment config JSON")->required();
  cmp->add_option("--out", cmp_args.out_dir, "Output directory");
  cmp->add_option("--methods", cmp_args.methods_csv, "Comma-separated method override");
  cmp->add_flag("--traces", cmp_args.traces, "Also write per-step error traces CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  gen_args.noise_set = noise_opt->count() > 0;

  try {
    if (gen->parsed()) {
      merge_gen_config(gen_args, gen);
      return cmd_gen(gen_args);
    }
    if (tr->parsed()) {
      merge_train_config(train_args, tr);
      return cmd_train(train_args);
    }
    if (rn->parsed()) {
      merge_run_config(run_args, rn);
      return cmd_run(run_args);
    }
    if (cmp->parsed()) return cmd_compare(cmp_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
