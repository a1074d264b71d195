#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "sadl/classifier.hpp"
#include "sadl/core.hpp"
#include "sadl/data.hpp"
#include "sadl/model_io.hpp"
#include "sadl/solver.hpp"
#include "sadl/structure.hpp"

namespace sadl::cli {

namespace {

struct Common {
  std::string config_path;
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::string mode = "";
};

struct Trained {
  Model model;
  TrainState state;
};

TrainConfig resolve_config(const Common& opt) {
  TrainConfig cfg = opt.config_path.empty() ? TrainConfig{} : load_config(opt.config_path);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.mode.empty() && opt.mode != "ridge") cfg.mode = parse_mode(opt.mode);
  validate_config(cfg);
  return cfg;
}

Trained fit(const Dataset& train_set, const TrainConfig& cfg, bool ridge) {
  if (ridge) {
    const auto t0 = std::chrono::steady_clock::now();
    Trained t{train_ridge(train_set, cfg.ridge_gamma), {}};
    t.model.config.seed = cfg.seed;
    t.state.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return t;
  }
  const auto targets = build_targets(train_set, cfg.block_rows);
  auto result = train(train_set, targets, cfg);
  return {std::move(result.model), std::move(result.state)};
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << text;
}

int cmd_train(const Common& opt, std::ostream& out) {
  const TrainConfig cfg = resolve_config(opt);
  const Dataset data = read_dataset(opt.data_path);
  const bool ridge = opt.mode == "ridge";
  const Trained t = fit(data, cfg, ridge);
  save_model(t.model, opt.model_path);

  out << std::setprecision(6);
  if (ridge) {
    out << "ridge baseline trained on " << data.size() << " samples\n";
  } else {
    const std::string trace_path = opt.out_path.empty() ? opt.model_path + ".trace.csv" : opt.out_path;
    write_trace_csv(t.state, trace_path);
    out << "iterations        " << t.state.iter << '\n'
        << "final objective   " << t.state.objective_trace.back() << '\n'
        << "residual |H-QU|   " << t.state.residual_H_trace.back() << '\n'
        << "residual |L-WQU|  " << t.state.residual_L_trace.back() << '\n'
        << "final mu          " << t.state.mu << '\n'
        << "trace             " << trace_path << '\n';
  }
  out << "wall time (s)     " << t.state.train_seconds << '\n'
      << "model             " << opt.model_path << '\n';
  return kOk;
}

int cmd_predict(const Common& opt, std::ostream& out) {
  const Model model = load_model(opt.model_path);
  const Dataset data = read_dataset(opt.data_path);
  if (data.dim() != model.input_dim())
    throw DataError("dimension mismatch: model expects " + std::to_string(model.input_dim()) +
                    " features, dataset has " + std::to_string(data.dim()));
  const Labels predicted = predict_all(precompute_scorer(model), data.X);
  std::ostringstream text;
  for (int l : predicted) text << l << '\n';
  if (opt.out_path.empty()) out << text.str();
  else write_text(opt.out_path, text.str());
  return kOk;
}

int cmd_eval(const Common& opt, int reps, std::ostream& out) {
  const Model model = load_model(opt.model_path);
  const Dataset data = read_dataset(opt.data_path);
  const EvalReport report = evaluate(model, data, reps);
  const std::string method = model.Omega.isIdentity(0.0) && model.Q.isIdentity(0.0)
                                 ? "ridge"
                                 : to_string(model.config.mode);
  out << format_report(report, method);
  const std::string csv_path = opt.out_path.empty() ? opt.model_path + ".eval.csv" : opt.out_path;
  write_text(csv_path, report_csv(report, method));
  out << "csv " << csv_path << '\n';
  return kOk;
}

struct SynthOptions {
  SynthSpec spec;
  bool binary = false;
};

int cmd_synth(const SynthOptions& opt, const std::string& prefix, std::ostream& out) {
  if (prefix.empty()) throw ConfigError("--out prefix is required");
  const Split split = generate_synthetic(opt.spec);
  const std::string ext = opt.binary ? ".bin" : ".ds";
  const std::string train_path = prefix + ".train" + ext;
  const std::string test_path = prefix + ".test" + ext;
  if (opt.binary) {
    save_dataset_binary(split.train, train_path);
    save_dataset_binary(split.test, test_path);
  } else {
    save_dataset(split.train, train_path);
    save_dataset(split.test, test_path);
  }
  out << "wrote " << train_path << " (" << split.train.size() << " samples) and " << test_path
      << " (" << split.test.size() << " samples)\n";
  return kOk;
}

struct BenchOptions {
  std::vector<int> sizes;
  int realizations = 10;
  int reps = 10;
  int jobs = 1;
  double train_fraction = 0.5;
  SynthOptions synth;
};

struct BenchRow {
  int size = 0;
  int realization = 0;
  double accuracy = 0.0;
  double train_s = 0.0;
  double test_s = 0.0;
};

int cmd_bench(const Common& opt, const BenchOptions& bench, std::ostream& out,
              std::ostream& err) {
  const TrainConfig base = resolve_config(opt);
  const bool ridge = opt.mode == "ridge";
  std::optional<Dataset> data;
  if (!opt.data_path.empty()) data = read_dataset(opt.data_path);
  const int classes = data ? data->classes : bench.synth.spec.classes;
  if (bench.realizations < 1) throw ConfigError("--realizations must be >= 1");

  std::vector<int> sizes;
  for (int size : bench.sizes) {
    if (size < classes) {
      err << "warning: dictionary size " << size << " is smaller than the class count "
          << classes << "; skipped\n";
      continue;
    }
    sizes.push_back(size);
  }
  if (sizes.empty()) throw ConfigError("no usable dictionary sizes");

  std::vector<BenchRow> rows(sizes.size() * static_cast<std::size_t>(bench.realizations));
  std::vector<std::string> failures(rows.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < rows.size(); task = next++) {
      const int size = sizes[task / static_cast<std::size_t>(bench.realizations)];
      const int real = static_cast<int>(task % static_cast<std::size_t>(bench.realizations));
      try {
        TrainConfig cfg = base;
        cfg.dict_size = size;
        cfg.seed = base.seed + static_cast<std::uint64_t>(real);
        Split split;
        if (data) {
          split = split_fraction(*data, bench.train_fraction, cfg.seed);
        } else {
          SynthSpec spec = bench.synth.spec;
          spec.seed = cfg.seed;
          split = generate_synthetic(spec);
        }
        const Trained t = fit(split.train, cfg, ridge);
        const EvalReport report = evaluate(t.model, split.test, bench.reps);
        rows[task] = {size, real, report.accuracy, t.state.train_seconds,
                      report.test_seconds_per_sample};
      } catch (const std::exception& e) {
        failures[task] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::max(bench.jobs, 1); ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (std::size_t i = 0; i < failures.size(); ++i)
    if (!failures[i].empty()) throw NumericalError("bench run failed: " + failures[i]);

  std::ostringstream csv;
  csv << std::setprecision(17) << "size,realization,accuracy,train_s,test_s_per_sample\n";
  for (const auto& r : rows)
    csv << r.size << ',' << r.realization << ',' << r.accuracy << ',' << r.train_s << ','
        << r.test_s << '\n';
  const std::string csv_path = opt.out_path.empty() ? "bench.csv" : opt.out_path;
  write_text(csv_path, csv.str());

  std::ostringstream summary;
  summary << std::setprecision(17) << "size,mean_accuracy,std_accuracy,mean_train_s,mean_test_s\n";
  out << "size  accuracy(%)   +/-    train(s)    test(s)\n";
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    double acc = 0, acc2 = 0, tr = 0, te = 0;
    const auto n = static_cast<double>(bench.realizations);
    for (int real = 0; real < bench.realizations; ++real) {
      const auto& r = rows[k * static_cast<std::size_t>(bench.realizations) + real];
      acc += r.accuracy;
      acc2 += r.accuracy * r.accuracy;
      tr += r.train_s;
      te += r.test_s;
    }
    const double mean = acc / n;
    const double sd = std::sqrt(std::max(acc2 / n - mean * mean, 0.0));
    summary << sizes[k] << ',' << mean << ',' << sd << ',' << tr / n << ',' << te / n << '\n';
    char line[128];
    std::snprintf(line, sizeof(line), "%4d  %10.2f  %6.2f  %10.4f  %10.3e\n", sizes[k],
                  100 * mean, 100 * sd, tr / n, te / n);
    out << line;
  }
  const std::string summary_path = csv_path + ".summary.csv";
  write_text(summary_path, summary.str());
  out << "csv " << csv_path << "\nsummary " << summary_path << '\n';
  return kOk;
}

void add_synth_flags(CLI::App* app, SynthOptions& opt) {
  app->add_option("--classes", opt.spec.classes, "Number of classes");
  app->add_option("--subspace-dim", opt.spec.subspace_dim, "Dimension of each class subspace");
  app->add_option("--ambient-dim", opt.spec.ambient_dim, "Feature dimension");
  app->add_option("--train-per-class", opt.spec.per_class_train, "Training samples per class");
  app->add_option("--test-per-class", opt.spec.per_class_test, "Test samples per class");
  app->add_option("--noise", opt.spec.noise_sigma, "Noise standard deviation");
  app->add_option("--code-mean", opt.spec.code_mean, "Mean of the in-subspace coordinates");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured analysis dictionary learning"};
  app.require_subcommand(1);

  Common common;
  int reps = 10;
  SynthOptions synth;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  BenchOptions bench;

  auto* train_cmd = app.add_subcommand("train", "Train a model");
  train_cmd->add_option("--config", common.config_path, "Key-value config file");
  train_cmd->add_option("--data", common.data_path, "Training dataset")->required();
  train_cmd->add_option("--model", common.model_path, "Output model file")->required();
  train_cmd->add_option("--out", common.out_path, "Objective trace CSV (default <model>.trace.csv)");
  train_cmd->add_option("--seed", common.seed, "Override the config seed");
  train_cmd->add_option("--mode", common.mode, "sadl | plain_adl | ridge")
      ->check(CLI::IsMember({"sadl", "plain_adl", "ridge"}));

  auto* predict_cmd = app.add_subcommand("predict", "Predict labels for a dataset");
  predict_cmd->add_option("--model", common.model_path, "Model file")->required();
  predict_cmd->add_option("--data", common.data_path, "Dataset to label")->required();
  predict_cmd->add_option("--out", common.out_path, "Write labels here instead of stdout");

  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and timing report");
  eval_cmd->add_option("--model", common.model_path, "Model file")->required();
  eval_cmd->add_option("--data", common.data_path, "Labelled test dataset")->required();
  eval_cmd->add_option("--reps", reps, "Timing repetitions")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--out", common.out_path, "Report CSV (default <model>.eval.csv)");

  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic subspace dataset");
  add_synth_flags(synth_cmd, synth);
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--out", synth_out, "Output prefix")->required();
  synth_cmd->add_flag("--binary", synth.binary, "Write the binary format");

  auto* bench_cmd = app.add_subcommand("bench", "Dictionary-size sweep");
  bench_cmd->add_option("--config", common.config_path, "Key-value config file");
  bench_cmd->add_option("--data", common.data_path, "Dataset to split (default: synthetic)");
  bench_cmd->add_option("--sizes", bench.sizes, "Dictionary sizes")->delimiter(',')->required();
  bench_cmd->add_option("--realizations", bench.realizations, "Runs per size");
  bench_cmd->add_option("--reps", bench.reps, "Timing repetitions")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--jobs", bench.jobs, "Worker threads");
  bench_cmd->add_option("--train-fraction", bench.train_fraction, "Training share of --data");
  bench_cmd->add_option("--seed", common.seed, "Override the config seed");
  bench_cmd->add_option("--mode", common.mode, "sadl | plain_adl | ridge")
      ->check(CLI::IsMember({"sadl", "plain_adl", "ridge"}));
  bench_cmd->add_option("--out", common.out_path, "Per-run CSV (default bench.csv)");
  add_synth_flags(bench_cmd, bench.synth);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(common, out);
    if (*predict_cmd) return cmd_predict(common, out);
    if (*eval_cmd) return cmd_eval(common, reps, out);
    if (*synth_cmd) {
      synth.spec.seed = synth_seed;
      return cmd_synth(synth, synth_out, out);
    }
    if (*bench_cmd) return cmd_bench(common, bench, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}

}  // namespace sadl::cli
