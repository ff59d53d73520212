// Command-line entry point for the full pipeline:
//   collect  - fly the data-collection flights and persist the dataset
//   train    - run the meta-learning loop and save the basis checkpoint
//   eval     - score a checkpoint on a dataset
//   bench    - run the controller x wind benchmark matrix (--check gates
//              the trend criteria and sets the exit code)
//   traj     - dump a trajectory sample at 50 Hz for plotting

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nf/bench.hpp"
#include "nf/collect.hpp"
#include "nf/config.hpp"
#include "nf/daiml.hpp"
#include "nf/dataset.hpp"
#include "nf/runner.hpp"
#include "nf/trajectory.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_collect(const std::string& config_path, const std::string& out_dir) {
  const nf::cfg::ExperimentConfig config = nf::cfg::load_config(config_path);
  const std::string dir = out_dir.empty() ? config.dataset_dir() : out_dir;
  const nf::sim::Vehicle vehicle(config.vehicle);
  const auto gains = config.make_gains(3);
  std::cout << "collecting " << config.collect.conditions.size()
            << " conditions x " << config.collect.duration_per_condition
            << " s...\n";
  const nf::data::FlightDataset ds =
      nf::data::collect(config.collect, vehicle, config.residual, gains);
  nf::data::save_dataset(ds, dir);
  std::cout << "dataset: " << ds.total_train_samples() << " training samples, "
            << ds.conditions() << " conditions -> " << dir << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& out_path) {
  const nf::cfg::ExperimentConfig config = nf::cfg::load_config(config_path);
  const std::string dir = data_dir.empty() ? config.dataset_dir() : data_dir;
  const std::string ckpt =
      out_path.empty() ? config.checkpoint_path() : out_path;
  const nf::data::FlightDataset ds = nf::data::load_dataset(dir);
  std::cout << "training on " << ds.total_train_samples() << " samples, "
            << config.daiml.epochs << " epochs...\n";
  const nf::daiml::TrainResult result = nf::daiml::train(ds, config.daiml);
  fs::create_directories(fs::path(ckpt).parent_path().string().empty()
                             ? "."
                             : fs::path(ckpt).parent_path().string());
  result.phi.save(ckpt);
  result.log.save_csv(config.training_log_path());
  const auto& last = result.log.rows.back();
  std::cout << "done after " << result.epochs_run
            << " epochs: val_f_loss " << last.val_f_loss << ", cluster "
            << last.cluster_metric << " -> " << ckpt << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& data_dir,
             const std::string& ckpt_path) {
  const nf::cfg::ExperimentConfig config = nf::cfg::load_config(config_path);
  const std::string dir = data_dir.empty() ? config.dataset_dir() : data_dir;
  const std::string ckpt =
      ckpt_path.empty() ? config.checkpoint_path() : ckpt_path;
  const nf::data::FlightDataset ds = nf::data::load_dataset(dir);
  const nf::net::Mlp phi = nf::net::Mlp::load(ckpt);
  const double train_loss =
      nf::daiml::evaluation_f_loss(phi, ds.train, config.daiml);
  std::cout << "train f-loss:      " << train_loss << "\n";
  if (!ds.validation.empty()) {
    std::cout << "validation f-loss: "
              << nf::daiml::evaluation_f_loss(phi, ds.validation, config.daiml)
              << "\n";
  }
  std::cout << "cluster metric:    "
            << nf::daiml::cluster_metric(phi, ds.train, config.daiml) << "\n";
  return 0;
}

int cmd_bench(const std::string& config_path, bool check, int jobs) {
  const nf::cfg::ExperimentConfig config = nf::cfg::load_config(config_path);
  fs::create_directories(config.out_dir);

  // Unattended end-to-end: produce missing artifacts first.
  if (!fs::exists(config.dataset_dir() + "/meta.json")) {
    std::cout << "dataset missing; collecting first\n";
    cmd_collect(config_path, "");
  }
  bool needs_phi = false;
  for (const auto& c : config.controllers) needs_phi |= (c == "nf");
  if (needs_phi && !fs::exists(config.checkpoint_path())) {
    std::cout << "checkpoint missing; training first\n";
    cmd_train(config_path, "", "");
  }

  nf::net::Mlp phi;
  const nf::net::Mlp* phi_ptr = nullptr;
  if (needs_phi && fs::exists(config.checkpoint_path())) {
    phi = nf::net::Mlp::load(config.checkpoint_path());
    phi_ptr = &phi;
  }

  const nf::bench::TrackingReport report =
      nf::bench::run_benchmark(config, phi_ptr, jobs);
  report.save_csv(config.out_dir + "/report.csv");
  const std::string table = nf::bench::summarize(report);
  {
    std::ofstream txt(config.out_dir + "/report.txt");
    txt << table;
  }
  std::cout << table << "\n";
  std::cout << "report -> " << config.out_dir << "/report.csv\n";

  if (check) {
    const nf::bench::TrendResult trends = nf::bench::check_trends(report);
    std::cout << trends.render();
    return trends.all_passed() ? 0 : 1;
  }
  return 0;
}

int cmd_traj_dump(const std::string& config_path, const std::string& out,
                  double duration) {
  const nf::cfg::ExperimentConfig config = nf::cfg::load_config(config_path);
  const nf::traj::Figure8 fig8(config.fig8_width, config.fig8_height,
                               config.fig8_period, config.fig8_center);
  std::ofstream os(out);
  if (!os) throw nf::IoFailure("cannot write " + out);
  os << "t,pos_x,pos_y,pos_z,vel_x,vel_y,vel_z,acc_x,acc_y,acc_z\n";
  const double dt = 0.02;
  const int n = static_cast<int>(duration / dt);
  for (int i = 0; i <= n; ++i) {
    const double t = i * dt;
    const nf::traj::DesiredState d = fig8.at(t);
    os << t;
    for (int a = 0; a < 3; ++a) os << "," << d.pos_d[a];
    for (int a = 0; a < 3; ++a) os << "," << d.vel_d[a];
    for (int a = 0; a < 3; ++a) os << "," << d.acc_d[a];
    os << "\n";
  }
  std::cout << "trajectory sample -> " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadrotor wind-adaptive flight benchmark"};
  app.require_subcommand(1);

  std::string config_path = "default";
  std::string out;
  std::string data_dir;
  std::string ckpt;
  bool check = false;
  int jobs = 0;
  double duration = 12.56;

  auto* collect = app.add_subcommand("collect", "run data-collection flights");
  collect->add_option("--config", config_path, "config file or 'default'");
  collect->add_option("--out", out, "dataset output directory");

  auto* train = app.add_subcommand("train", "train the basis network");
  train->add_option("--config", config_path, "config file or 'default'");
  train->add_option("--data", data_dir, "dataset directory");
  train->add_option("--out", ckpt, "checkpoint output path");

  auto* eval = app.add_subcommand("eval", "score a checkpoint on a dataset");
  eval->add_option("--config", config_path, "config file or 'default'");
  eval->add_option("--data", data_dir, "dataset directory");
  eval->add_option("--ckpt", ckpt, "checkpoint path");

  auto* bench = app.add_subcommand("bench", "run the benchmark matrix");
  bench->add_option("--config", config_path, "config file or 'default'");
  bench->add_flag("--check", check, "gate the trend criteria (exit code)");
  bench->add_option("--jobs", jobs, "worker threads (0 = hardware)");

  auto* traj = app.add_subcommand("traj", "trajectory utilities");
  auto* dump = traj->add_subcommand("dump", "sample the benchmark trajectory");
  dump->add_option("--config", config_path, "config file or 'default'");
  dump->add_option("--out", out, "output csv")->required();
  dump->add_option("--duration", duration, "seconds to sample");

  CLI11_PARSE(app, argc, argv);

  try {
    if (collect->parsed()) return cmd_collect(config_path, out);
    if (train->parsed()) return cmd_train(config_path, data_dir, ckpt);
    if (eval->parsed()) return cmd_eval(config_path, data_dir, ckpt);
    if (bench->parsed()) return cmd_bench(config_path, check, jobs);
    if (traj->parsed() && dump->parsed()) {
      return cmd_traj_dump(config_path, out, duration);
    }
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const nf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
