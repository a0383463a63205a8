#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "fpg/config.hpp"
#include "fpg/estimators.hpp"
#include "fpg/trainer.hpp"
#include "fpg/verify.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("FPG_OUT_DIR");
  if (env != nullptr && env[0] != '\0') return env;
  return ".";
}

fpg::RunManifest start_manifest(const std::string& command,
                                const std::string& config_snapshot,
                                std::uint64_t seed,
                                std::vector<std::string> outputs) {
  fpg::RunManifest manifest;
  manifest.command = command;
  manifest.config_snapshot = config_snapshot;
  manifest.git_describe = fpg::git_describe_string();
  manifest.seed = seed;
  manifest.started_at = fpg::iso_timestamp_utc();
  manifest.outputs = std::move(outputs);
  manifest.status = "running";
  return manifest;
}

int cmd_verify(const std::string& only, const std::string& out_flag, bool mutate_aux) {
  const std::string out_dir = resolve_out_dir(out_flag);
  std::filesystem::create_directories(out_dir);
  const std::string csv_path = out_dir + "/verify.csv";
  const std::string manifest_path = out_dir + "/verify.manifest.json";

  fpg::RunManifest manifest = start_manifest("verify", "", 0, {csv_path});
  fpg::write_text_file(manifest_path, fpg::manifest_json(manifest));

  fpg::VerifyOptions options;
  options.only_prefix = only;
  options.mutate_aux = mutate_aux;
  const std::vector<fpg::CheckResult> results = fpg::run_verification(options);
  fpg::write_text_file(csv_path, fpg::verification_csv(results));

  bool all_passed = true;
  for (const fpg::CheckResult& result : results) {
    if (!result.passed) {
      all_passed = false;
      std::fprintf(stderr, "FAIL %s,%.17g,%.17g\n", result.check.c_str(),
                   result.max_error, result.tolerance);
    }
  }
  std::printf("verify: %zu checks, %s (report: %s)\n", results.size(),
              all_passed ? "all passed" : "FAILURES", csv_path.c_str());

  manifest.finished_at = fpg::iso_timestamp_utc();
  manifest.status = all_passed ? "complete" : "failed";
  fpg::write_text_file(manifest_path, fpg::manifest_json(manifest));
  return all_passed ? 0 : 1;
}

int run_one_training(fpg::AppConfig config, const std::string& out_dir,
                     bool emit_trajectory) {
  const fpg::TrainConfig train = fpg::to_train_config(config);
  const fpg::EnvConfig env = fpg::to_env_config(config);
  const std::string stem = out_dir + "/train_" + config.trainer.method + "_seed" +
                           std::to_string(train.seed);
  const std::string csv_path = stem + ".csv";
  const std::string manifest_path = stem + ".manifest.json";

  std::vector<std::string> outputs = {csv_path};
  if (emit_trajectory) outputs.push_back(stem + "_trajectory.csv");
  fpg::RunManifest manifest = start_manifest("train", fpg::serialize_config(config),
                                             train.seed, outputs);
  fpg::write_text_file(manifest_path, fpg::manifest_json(manifest));

  const fpg::TrainResult result = fpg::run_full(env, train);
  fpg::write_text_file(csv_path, fpg::curve_csv(result.curve));
  if (emit_trajectory) {
    fpg::write_text_file(stem + "_trajectory.csv",
                         fpg::trajectory_csv(result.trajectory));
  }

  manifest.finished_at = fpg::iso_timestamp_utc();
  manifest.status = result.curve.diverged ? "diverged" : "complete";
  fpg::write_text_file(manifest_path, fpg::manifest_json(manifest));

  if (result.curve.diverged) {
    std::fprintf(stderr, "train seed %llu diverged: %s\n",
                 static_cast<unsigned long long>(train.seed),
                 result.curve.diagnostics.c_str());
    return 3;
  }
  std::printf("train seed %llu complete: %s\n",
              static_cast<unsigned long long>(train.seed), csv_path.c_str());
  return 0;
}

int cmd_train(const fpg::AppConfig& config, const std::string& out_flag,
              int parallel_seeds, bool emit_trajectory) {
  const std::string out_dir = resolve_out_dir(out_flag);
  std::filesystem::create_directories(out_dir);

  if (parallel_seeds <= 1) return run_one_training(config, out_dir, emit_trajectory);

  std::vector<int> codes(parallel_seeds, 0);
  std::vector<std::thread> workers;
  workers.reserve(parallel_seeds);
  for (int i = 0; i < parallel_seeds; ++i) {
    fpg::AppConfig per_seed = config;
    per_seed.trainer.seed = config.trainer.seed + static_cast<std::uint64_t>(i);
    workers.emplace_back([per_seed, out_dir, emit_trajectory, &codes, i]() {
      try {
        codes[i] = run_one_training(per_seed, out_dir, emit_trajectory);
      } catch (const std::exception& e) {
        std::fprintf(stderr, "train worker %d failed: %s\n", i, e.what());
        codes[i] = 1;
      }
    });
  }
  for (std::thread& worker : workers) worker.join();

  int exit_code = 0;
  for (int code : codes) exit_code = std::max(exit_code, code);
  return exit_code;
}

int cmd_variance(const std::vector<int>& orders, long long samples, std::uint64_t seed,
                 const std::string& out_flag) {
  const std::string out_dir = resolve_out_dir(out_flag);
  std::filesystem::create_directories(out_dir);
  const std::string csv_path =
      out_dir + "/variance_seed" + std::to_string(seed) + ".csv";
  const std::string manifest_path =
      out_dir + "/variance_seed" + std::to_string(seed) + ".manifest.json";

  fpg::RunManifest manifest = start_manifest("variance", "", seed, {csv_path});
  fpg::write_text_file(manifest_path, fpg::manifest_json(manifest));

  // fixed one-dimensional fixture supporting every estimator order
  fpg::Vector freq(1);
  freq[0] = 1.0;
  fpg::Matrix curvature(1, 1);
  curvature << -0.2;
  fpg::Vector center(1);
  center[0] = 0.4;
  const fpg::HybridCritic critic(
      {fpg::TrigAtom(freq, M_PI / 2.0), fpg::QuadricAtom(curvature, center, 0.2)},
      {0.5, 0.8});
  fpg::Vector mean(1);
  mean[0] = 0.2;
  const fpg::GaussianPolicy policy(mean, fpg::SpdFactor::scaled_identity(1, 0.1));

  std::vector<std::pair<int, fpg::VarianceReport>> reports;
  for (int order : orders) {
    fpg::RngStream rng = fpg::RngStream(seed).split(static_cast<std::uint64_t>(order) + 1);
    reports.emplace_back(order, fpg::estimator_variance(fpg::EstimatorOrder(order),
                                                        critic, policy, samples, rng));
  }
  fpg::write_text_file(csv_path, fpg::variance_csv(reports));

  manifest.finished_at = fpg::iso_timestamp_utc();
  manifest.status = "complete";
  fpg::write_text_file(manifest_path, fpg::manifest_json(manifest));
  std::printf("variance seed %llu complete: %s\n",
              static_cast<unsigned long long>(seed), csv_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy-gradient verification and training runner"};
  app.require_subcommand(1);

  CLI::App* verify = app.add_subcommand("verify", "run the numerical check battery");
  std::string verify_only;
  std::string verify_out;
  bool mutate_aux = false;
  verify->add_option("--only", verify_only, "prefix filter over check names");
  verify->add_option("--out", verify_out, "output directory");
  verify->add_flag("--mutate-aux", mutate_aux,
                   "self-test fixture: flip the density gradient sign");

  CLI::App* train = app.add_subcommand("train", "run a turntable training experiment");
  std::string train_method;
  int train_steps = 0;
  std::uint64_t train_seed = 0;
  std::string train_config_path;
  std::string train_out;
  int parallel_seeds = 1;
  bool emit_trajectory = false;
  train->add_option("--method", train_method,
                    "epg-analytic | spg-m0 | spg-m1 | spg-m2");
  train->add_option("--steps", train_steps, "environment steps");
  train->add_option("--seed", train_seed, "base RNG seed");
  train->add_option("--config", train_config_path, "JSON config file");
  train->add_option("--out", train_out, "output directory");
  train->add_option("--parallel-seeds", parallel_seeds,
                    "fan out k runs with seeds seed..seed+k-1")
      ->check(CLI::PositiveNumber);
  train->add_flag("--trajectory", emit_trajectory, "also write the trajectory CSV");

  CLI::App* variance = app.add_subcommand("variance", "estimator variance sweep");
  std::vector<int> variance_orders = {0, 1, 2};
  long long variance_samples = 100000;
  std::uint64_t variance_seed = 0;
  std::string variance_out;
  variance->add_option("--orders", variance_orders, "estimator orders to sweep")
      ->delimiter(',');
  variance->add_option("--samples", variance_samples, "samples per order");
  variance->add_option("--seed", variance_seed, "RNG seed");
  variance->add_option("--out", variance_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (verify->parsed()) {
      return cmd_verify(verify_only, verify_out, mutate_aux);
    }
    if (train->parsed()) {
      fpg::AppConfig config;
      if (!train_config_path.empty()) {
        config = fpg::parse_config(fpg::read_text_file(train_config_path));
      }
      if (train->count("--method") > 0) config.trainer.method = train_method;
      if (train->count("--steps") > 0) config.trainer.steps = train_steps;
      if (train->count("--seed") > 0) config.trainer.seed = train_seed;
      if (config.env.episode_length < 1) {
        throw fpg::ConfigError("env.episode_length", "must be at least 1");
      }
      fpg::validate(fpg::to_train_config(config));  // range errors -> exit 2
      return cmd_train(config, train_out, parallel_seeds, emit_trajectory);
    }
    if (variance_samples < 2) {
      throw fpg::ConfigError("samples", "need at least 2 samples");
    }
    for (int order : variance_orders) {
      if (order < 0 || order > 2) {
        throw fpg::ConfigError("orders", "estimator orders are 0, 1, 2");
      }
    }
    return cmd_variance(variance_orders, variance_samples, variance_seed,
                        variance_out);
  } catch (const fpg::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
