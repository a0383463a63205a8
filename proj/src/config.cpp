#include "fpg/config.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

namespace fpg {

using nlohmann::json;

ConfigError::ConfigError(std::string key_path, const std::string& message)
    : std::runtime_error("config error at '" + key_path + "': " + message),
      key_path_(std::move(key_path)) {}

namespace {

const json& require_section(const json& root, const char* name) {
  if (!root.contains(name)) throw ConfigError(name, "missing section");
  const json& section = root.at(name);
  if (!section.is_object()) throw ConfigError(name, "expected an object");
  return section;
}

void check_keys(const json& section, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (const auto& item : section.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError(prefix + "." + item.key(), "unknown key");
  }
  for (const char* key : allowed) {
    if (!section.contains(key)) throw ConfigError(prefix + "." + key, "missing key");
  }
}

double get_number(const json& section, const std::string& prefix, const char* key) {
  const json& value = section.at(key);
  if (!value.is_number()) throw ConfigError(prefix + "." + key, "expected a number");
  return value.get<double>();
}

int get_int(const json& section, const std::string& prefix, const char* key) {
  const json& value = section.at(key);
  if (!value.is_number_integer()) {
    throw ConfigError(prefix + "." + key, "expected an integer");
  }
  return value.get<int>();
}

std::uint64_t get_u64(const json& section, const std::string& prefix, const char* key) {
  const json& value = section.at(key);
  if (!value.is_number_integer() ||
      (!value.is_number_unsigned() && value.get<long long>() < 0)) {
    throw ConfigError(prefix + "." + key, "expected a nonnegative integer");
  }
  return value.get<std::uint64_t>();
}

bool get_bool(const json& section, const std::string& prefix, const char* key) {
  const json& value = section.at(key);
  if (!value.is_boolean()) throw ConfigError(prefix + "." + key, "expected a boolean");
  return value.get<bool>();
}

std::string get_string(const json& section, const std::string& prefix,
                       const char* key) {
  const json& value = section.at(key);
  if (!value.is_string()) throw ConfigError(prefix + "." + key, "expected a string");
  return value.get<std::string>();
}

}  // namespace

AppConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "top level must be an object");
  for (const auto& item : root.items()) {
    if (item.key() != "policy" && item.key() != "critic" && item.key() != "env" &&
        item.key() != "trainer") {
      throw ConfigError(item.key(), "unknown section");
    }
  }

  AppConfig config;

  const json& policy = require_section(root, "policy");
  check_keys(policy, "policy", {"sigma", "learn_sigma"});
  config.policy.sigma = get_number(policy, "policy", "sigma");
  config.policy.learn_sigma = get_bool(policy, "policy", "learn_sigma");

  const json& critic = require_section(root, "critic");
  check_keys(critic, "critic", {"zero_init", "actor_uses_abs_term"});
  config.critic.zero_init = get_bool(critic, "critic", "zero_init");
  config.critic.actor_uses_abs_term = get_bool(critic, "critic", "actor_uses_abs_term");

  const json& env = require_section(root, "env");
  check_keys(env, "env", {"episode_length"});
  config.env.episode_length = get_int(env, "env", "episode_length");

  const json& trainer = require_section(root, "trainer");
  check_keys(trainer, "trainer",
             {"method", "steps", "gamma", "actor_lr", "critic_lr", "seed", "optimizer",
              "momentum"});
  config.trainer.method = get_string(trainer, "trainer", "method");
  config.trainer.steps = get_int(trainer, "trainer", "steps");
  config.trainer.gamma = get_number(trainer, "trainer", "gamma");
  config.trainer.actor_lr = get_number(trainer, "trainer", "actor_lr");
  config.trainer.critic_lr = get_number(trainer, "trainer", "critic_lr");
  config.trainer.seed = get_u64(trainer, "trainer", "seed");
  config.trainer.optimizer = get_string(trainer, "trainer", "optimizer");
  config.trainer.momentum = get_number(trainer, "trainer", "momentum");

  try {
    (void)parse_method(config.trainer.method);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("trainer.method", e.what());
  }
  return config;
}

std::string serialize_config(const AppConfig& config) {
  json root;
  root["policy"]["sigma"] = config.policy.sigma;
  root["policy"]["learn_sigma"] = config.policy.learn_sigma;
  root["critic"]["zero_init"] = config.critic.zero_init;
  root["critic"]["actor_uses_abs_term"] = config.critic.actor_uses_abs_term;
  root["env"]["episode_length"] = config.env.episode_length;
  root["trainer"]["method"] = config.trainer.method;
  root["trainer"]["steps"] = config.trainer.steps;
  root["trainer"]["gamma"] = config.trainer.gamma;
  root["trainer"]["actor_lr"] = config.trainer.actor_lr;
  root["trainer"]["critic_lr"] = config.trainer.critic_lr;
  root["trainer"]["seed"] = config.trainer.seed;
  root["trainer"]["optimizer"] = config.trainer.optimizer;
  root["trainer"]["momentum"] = config.trainer.momentum;
  return root.dump(2) + "\n";
}

TrainConfig to_train_config(const AppConfig& config) {
  TrainConfig train;
  train.method = parse_method(config.trainer.method);
  train.steps = config.trainer.steps;
  train.gamma = config.trainer.gamma;
  train.actor_lr = config.trainer.actor_lr;
  train.critic_lr = config.trainer.critic_lr;
  train.seed = config.trainer.seed;
  train.optimizer = config.trainer.optimizer;
  train.momentum = config.trainer.momentum;
  train.sigma = config.policy.sigma;
  train.learn_sigma = config.policy.learn_sigma;
  train.actor_uses_abs_term = config.critic.actor_uses_abs_term;
  train.zero_critic_init = config.critic.zero_init;
  return train;
}

EnvConfig to_env_config(const AppConfig& config) {
  EnvConfig env;
  env.episode_length = config.env.episode_length;
  env.seed = config.trainer.seed;
  return env;
}

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string curve_csv(const LearningCurve& curve) {
  std::ostringstream out;
  out << "step,episode,return,mean_action_error,grad_norm\n";
  for (const CurveRow& row : curve.rows) {
    out << row.step << ',' << row.episode << ',' << format_double(row.episode_return)
        << ',' << format_double(row.mean_action_error) << ','
        << format_double(row.grad_norm) << '\n';
  }
  return out.str();
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::ostringstream out;
  out << "episode,step,angle,target,action,reward\n";
  for (const TrajectoryRow& row : rows) {
    out << row.episode << ',' << row.step << ',' << format_double(row.angle) << ','
        << format_double(row.target) << ',' << format_double(row.action) << ','
        << format_double(row.reward) << '\n';
  }
  return out.str();
}

namespace {

void variance_rows(std::ostringstream& out, int order, const std::string& name,
                   double mean, double variance, long long n) {
  out << order << ',' << name << ',' << format_double(mean) << ','
      << format_double(variance) << ',' << n << '\n';
}

}  // namespace

std::string variance_csv(const std::vector<std::pair<int, VarianceReport>>& reports) {
  std::ostringstream out;
  out << "order,coordinate,mean,variance,n\n";
  for (const auto& [order, report] : reports) {
    variance_rows(out, order, "expectation", report.mean.expectation,
                  report.variance.expectation, report.n);
    if (report.mean.grad_mean.has_value()) {
      const Vector& mean = *report.mean.grad_mean;
      const Vector& var = *report.variance.grad_mean;
      for (int i = 0; i < mean.size(); ++i) {
        variance_rows(out, order, "grad_mean[" + std::to_string(i) + "]", mean[i],
                      var[i], report.n);
      }
    }
    for (int i = 0; i < report.mean.grad_cov.rows(); ++i) {
      for (int j = 0; j < report.mean.grad_cov.cols(); ++j) {
        const std::string suffix =
            "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        variance_rows(out, order, "grad_cov" + suffix, report.mean.grad_cov(i, j),
                      report.variance.grad_cov(i, j), report.n);
      }
    }
    for (int i = 0; i < report.mean.grad_scale.rows(); ++i) {
      for (int j = 0; j < report.mean.grad_scale.cols(); ++j) {
        const std::string suffix =
            "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        variance_rows(out, order, "grad_scale" + suffix, report.mean.grad_scale(i, j),
                      report.variance.grad_scale(i, j), report.n);
      }
    }
  }
  return out.str();
}

std::string manifest_json(const RunManifest& manifest) {
  json root;
  root["command"] = manifest.command;
  root["config"] = manifest.config_snapshot.empty()
                       ? json(nullptr)
                       : json::parse(manifest.config_snapshot);
  root["git_describe"] = manifest.git_describe;
  root["seed"] = manifest.seed;
  root["started_at"] = manifest.started_at;
  root["finished_at"] = manifest.finished_at;
  root["outputs"] = manifest.outputs;
  root["status"] = manifest.status;
  return root.dump(2) + "\n";
}

std::string git_describe_string() {
  FILE* pipe = ::popen("git describe --always --dirty 2>/dev/null", "r");
  if (pipe == nullptr) return "unknown";
  char buffer[256];
  std::string result;
  if (std::fgets(buffer, sizeof buffer, pipe) != nullptr) result = buffer;
  ::pclose(pipe);
  while (!result.empty() && (result.back() == '\n' || result.back() == '\r')) {
    result.pop_back();
  }
  return result.empty() ? "unknown" : result;
}

std::string iso_timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

}  // namespace fpg
