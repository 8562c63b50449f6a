#include "fcpde/config.hpp"
#include "fcpde/dataset_io.hpp"
#include "fcpde/experiment.hpp"
#include "fcpde/model.hpp"
#include "fcpde/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace fcpde;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kNotConverged = 3, kIo = 4 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

CaseConfig load_case(const std::string& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  CaseConfig c = parse_config(in);
  if (seed) c.seed = *seed;
  return c;
}

// Writes through a temporary so a failure never leaves a partial file.
void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out.flush()) throw IoError("write failed for '" + path + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move output into '" + path + "'");
  }
}

int cmd_generate(const std::string& config_path, const std::string& out, std::optional<std::uint64_t> seed) {
  const CaseConfig c = load_case(config_path, seed);
  const Dataset ds = make_dataset(c);
  std::ostringstream buf;
  write_dataset(ds, buf);
  write_atomically(out, buf.str());
  std::cout << "wrote " << ds.samples.size() << " samples of " << ds.tag << " on " << ds.grid.nu();
  if (ds.grid.rank() == 2) std::cout << 'x' << ds.grid.nv();
  std::cout << " grid to " << out << '\n';
  return kOk;
}

int cmd_train(const std::string& config_path, const std::string& dataset_path, const std::string& model_out,
              const std::string& history_out, std::optional<std::uint64_t> seed) {
  const CaseConfig c = load_case(config_path, seed);
  std::ifstream din(dataset_path);
  if (!din) throw IoError("cannot open dataset '" + dataset_path + "'");
  const Dataset ds = read_dataset(din, c);

  const auto start = std::chrono::steady_clock::now();
  const TrainResult r = train(c, ds);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::ostringstream model_text;
  save_model(r.model, model_text);
  write_atomically(model_out, model_text.str());
  std::ostringstream hist;
  write_history_csv(r.history, hist);
  write_atomically(history_out.empty() ? model_out + ".history.csv" : history_out, hist.str());

  std::printf("final loss %.6e after %ld evaluations, %d rounds, %.1f s%s\n", r.loss, r.evaluations, r.rounds,
              seconds, r.converged ? "" : " (tolerance not reached)");
  return r.converged ? kOk : kNotConverged;
}

int cmd_eval(const std::string& model_path, const std::string& config_path, int n_tests, const std::string& out,
             std::optional<std::uint64_t> seed) {
  const CaseConfig c = load_case(config_path, seed);
  std::ifstream min(model_path);
  if (!min) throw IoError("cannot open model '" + model_path + "'");
  StencilModel model;
  try {
    model = load_model(min);
  } catch (const std::runtime_error& e) {
    throw IoError(e.what());
  }
  const Evaluation ev = evaluate(model, c, n_tests);

  const fs::path dump_dir = fs::path(out).replace_extension("").string() + "_dumps";
  fs::create_directories(dump_dir);
  nlohmann::ordered_json report;
  report["case"] = ev.tag;
  report["seed"] = c.seed;
  report["n_tests"] = ev.tests.size();
  report["mean_mse"] = ev.mean_mse;
  report["max_mse"] = ev.max_mse;
  report["all_converged"] = ev.all_converged;
  if (c.equation == Equation::NavierStokes) report["classical_divergence"] = ev.classical_divergence;
  report["tests"] = nlohmann::json::array();
  for (const auto& t : ev.tests) {
    const fs::path dump = dump_dir / (t.label + ".dump");
    std::ostringstream buf;
    write_dump(t, buf);
    write_atomically(dump.string(), buf.str());
    report["tests"].push_back({{"label", t.label},
                               {"mse", t.mse},
                               {"steps", t.steps},
                               {"converged", t.converged},
                               {"final_residual", t.final_residual},
                               {"dump", dump.filename().string()}});
  }
  write_atomically(out, report.dump(2) + "\n");
  std::printf("%s: %zu tests, mean MSE %.6e, max MSE %.6e\n", ev.tag.c_str(), ev.tests.size(), ev.mean_mse,
              ev.max_mse);
  return kOk;
}

int cmd_export_plot(const std::string& dump_path, const std::string& out) {
  std::ifstream in(dump_path);
  if (!in) throw IoError("cannot open dump '" + dump_path + "'");
  TestCase t = [&] {
    try {
      return read_dump(in);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
  }();
  std::ostringstream buf;
  export_plot(t, buf);
  write_atomically(out, buf.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned finite-difference operators trained through differentiable Picard iterations"};
  app.require_subcommand(1);

  std::string config, dataset, model, out, dump, history;
  int tests = 0;
  std::optional<std::uint64_t> seed;

  auto* gen = app.add_subcommand("generate", "Generate a training dataset");
  gen->add_option("--config", config, "Case config file")->required();
  gen->add_option("--out", out, "Dataset output path")->required();
  gen->add_option("--seed", seed, "Override the config seed");

  auto* tr = app.add_subcommand("train", "Train a stencil network on a dataset");
  tr->add_option("--config", config, "Case config file")->required();
  tr->add_option("--dataset", dataset, "Dataset from generate")->required();
  tr->add_option("--model", model, "Model output path")->required();
  tr->add_option("--out", history, "Loss history CSV (default <model>.history.csv)");
  tr->add_option("--seed", seed, "Override the config seed");

  auto* ev = app.add_subcommand("eval", "Evaluate a trained model on fresh test cases");
  ev->add_option("--model", model, "Trained model")->required();
  ev->add_option("--config", config, "Case config file")->required();
  ev->add_option("--tests", tests, "Number of tests or rollout frames");
  ev->add_option("--out", out, "Metrics JSON path")->required();
  ev->add_option("--seed", seed, "Override the config seed");

  auto* ex = app.add_subcommand("export-plot", "Turn a field dump into plot-ready columns");
  ex->add_option("dump", dump, "Field dump written by eval")->required();
  ex->add_option("--out", out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*gen) return cmd_generate(config, out, seed);
    if (*tr) return cmd_train(config, dataset, model, history, seed);
    if (*ev) return cmd_eval(model, config, tests, out, seed);
    if (*ex) return cmd_export_plot(dump, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
