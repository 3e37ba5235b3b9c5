#pragma once

#include <map>
#include <string>

#include "dqrb/simulator.hpp"
#include "dqrb/train.hpp"

namespace dqrb {

// Key-value config file: one `key = value` per line, `#` starts a comment,
// blank lines ignored. Every key must appear in the documented schema
// (config_schema_text()); unknown or duplicate keys are ConfigError so typos
// fail loudly instead of silently keeping a default.
struct Config {
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const;

  // Typed getters: the fallback is returned when the key is absent; a present
  // but unparsable or trailing-garbage value throws ConfigError.
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
};

Config parse_config(const std::string& text);  // ConfigError on malformed input
Config load_config(const std::string& path);   // FileError if unreadable

// Builders start from the struct defaults and apply whatever keys are set.
// simulate() validates SimConfig ranges; train ranges are validated here.
SimConfig sim_config_from(const Config& config);
TrainConfig train_config_from(const Config& config);

// Enum names used in config files and CLI flags.
const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);  // ConfigError on unknown
const char* schedule_name(ad::Schedule s);
ad::Schedule schedule_from_name(const std::string& name);  // ConfigError on unknown

// Human-readable schema: one line per key with type, default and meaning.
std::string config_schema_text();

}  // namespace dqrb
