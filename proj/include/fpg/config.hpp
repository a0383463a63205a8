#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpg/estimators.hpp"
#include "fpg/trainer.hpp"
#include "fpg/turntable.hpp"

namespace fpg {

// Rejected configuration input; carries the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key_path, const std::string& message);
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

// Full run configuration, grouped into the four schema sections. Every field
// has a default so a run can start without a config file.
struct AppConfig {
  struct Policy {
    double sigma = 0.05;
    bool learn_sigma = false;
  } policy;

  struct Critic {
    bool zero_init = false;
    bool actor_uses_abs_term = true;
  } critic;

  struct Env {
    int episode_length = 50;
  } env;

  struct Trainer {
    std::string method = "epg-analytic";
    int steps = 20000;
    double gamma = 0.9;
    double actor_lr = 0.05;
    double critic_lr = 0.02;
    std::uint64_t seed = 0;
    std::string optimizer = "sgd";
    double momentum = 0.9;
  } trainer;
};

// Strict schema: all four sections and all keys within them must be present,
// correctly typed, and nothing else may appear. Violations raise ConfigError
// with the dotted key path.
AppConfig parse_config(const std::string& json_text);
std::string serialize_config(const AppConfig& config);

TrainConfig to_train_config(const AppConfig& config);
EnvConfig to_env_config(const AppConfig& config);

// Number formatting used by every CSV writer: 17 significant digits, enough
// to round-trip a double, so identical values give identical bytes.
std::string format_double(double value);

std::string curve_csv(const LearningCurve& curve);
std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);
std::string variance_csv(const std::vector<std::pair<int, VarianceReport>>& reports);

struct RunManifest {
  std::string command;
  std::string config_snapshot;  // serialized AppConfig (empty for verify)
  std::string git_describe;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<std::string> outputs;
  std::string status;  // running | complete | diverged | failed
};

std::string manifest_json(const RunManifest& manifest);

// `git describe --always --dirty` of the working tree, or "unknown".
std::string git_describe_string();
std::string iso_timestamp_utc();

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace fpg
