#include "dqrb/config.hpp"

#include <charconv>
#include <sstream>

#include "dqrb/errors.hpp"
#include "dqrb/util.hpp"

namespace dqrb {

namespace {

struct KeyDoc {
  const char* key;
  const char* type;
  const char* fallback;
  const char* doc;
};

// Single source of truth for the schema: drives unknown-key rejection and
// config_schema_text(). Defaults mirror SimConfig{} / TrainConfig{}.
constexpr KeyDoc kSchema[] = {
    {"sim.box_half", "double", "0.2", "half extent of the cubic box"},
    {"sim.body_half_x", "double", "0.1", "cuboid half extent along body x"},
    {"sim.body_half_y", "double", "0.1", "cuboid half extent along body y"},
    {"sim.body_half_z", "double", "0.1", "cuboid half extent along body z"},
    {"sim.mass", "double", "1", "body mass"},
    {"sim.restitution", "double", "1", "wall restitution in [0, 1], 1 = elastic"},
    {"sim.friction", "double", "0", "Coulomb friction coefficient"},
    {"sim.gravity_x", "double", "0", "gravity acceleration, x component"},
    {"sim.gravity_y", "double", "0", "gravity acceleration, y component"},
    {"sim.gravity_z", "double", "-9.81", "gravity acceleration, z component"},
    {"sim.dt_internal", "double", "1e-05", "internal integrator step"},
    {"sim.output_every", "int", "10000", "internal steps per emitted record"},
    {"sim.n_records", "int", "20000", "number of records to emit"},
    {"sim.speed_scale", "double", "0.5", "initial speed upper bound"},
    {"sim.spin_scale", "double", "3", "initial angular speed upper bound"},
    {"train.hidden1", "int", "32", "dual quaternions in the first hidden layer"},
    {"train.hidden2", "int", "32", "dual quaternions in the second hidden layer"},
    {"train.activation", "enum", "tanh", "tanh | tanhshrink | relu | identity"},
    {"train.dropout", "double", "0.2", "dropout rate before each hidden layer"},
    {"train.lr", "double", "0.01", "initial learning rate"},
    {"train.schedule", "enum", "none", "none | exponential | step"},
    {"train.gamma", "double", "0.9995", "exponential decay per epoch"},
    {"train.step_every", "int", "1000", "epochs between step-schedule cuts"},
    {"train.step_factor", "double", "0.5", "multiplier at each step-schedule cut"},
    {"train.epochs", "int", "200", "maximum training epochs"},
    {"train.batch", "int", "512", "minibatch size in samples"},
    {"train.patience", "int", "25", "epochs without a new best before stopping"},
    {"train.target_accuracy", "double", "0", "stop at this validation accuracy, 0 = off"},
    {"train.weighted_loss", "bool", "false", "binary head: oversample positive columns"},
    {"train.augment", "bool", "true", "x9 rotation copies of training collision records"},
};

bool known_key(const std::string& key) {
  for (const KeyDoc& k : kSchema)
    if (key == k.key) return true;
  return false;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::string* find(const std::map<std::string, std::string>& values,
                        const std::string& key) {
  auto it = values.find(key);
  return it == values.end() ? nullptr : &it->second;
}

}  // namespace

bool Config::has(const std::string& key) const { return values.count(key) > 0; }

double Config::get_double(const std::string& key, double fallback) const {
  const std::string* raw = find(values, key);
  if (!raw) return fallback;
  double out = 0.0;
  const char* begin = raw->data();
  const char* end = begin + raw->size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': '" + *raw + "' is not a number");
  return out;
}

long Config::get_int(const std::string& key, long fallback) const {
  const std::string* raw = find(values, key);
  if (!raw) return fallback;
  long out = 0;
  const char* begin = raw->data();
  const char* end = begin + raw->size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end)
    throw ConfigError("config key '" + key + "': '" + *raw + "' is not an integer");
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const std::string* raw = find(values, key);
  if (!raw) return fallback;
  if (*raw == "true" || *raw == "1") return true;
  if (*raw == "false" || *raw == "0") return false;
  throw ConfigError("config key '" + key + "': '" + *raw + "' is not a bool");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* raw = find(values, key);
  return raw ? *raw : fallback;
}

Config parse_config(const std::string& text) {
  Config out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
    if (!known_key(key))
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                        "'");
    if (!out.values.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
  }
  return out;
}

Config load_config(const std::string& path) { return parse_config(read_file(path)); }

SimConfig sim_config_from(const Config& config) {
  SimConfig out;
  out.box_half_extent = config.get_double("sim.box_half", out.box_half_extent);
  out.body_half_dims.x() = config.get_double("sim.body_half_x", out.body_half_dims.x());
  out.body_half_dims.y() = config.get_double("sim.body_half_y", out.body_half_dims.y());
  out.body_half_dims.z() = config.get_double("sim.body_half_z", out.body_half_dims.z());
  out.mass = config.get_double("sim.mass", out.mass);
  out.restitution = config.get_double("sim.restitution", out.restitution);
  out.friction = config.get_double("sim.friction", out.friction);
  out.gravity.x() = config.get_double("sim.gravity_x", out.gravity.x());
  out.gravity.y() = config.get_double("sim.gravity_y", out.gravity.y());
  out.gravity.z() = config.get_double("sim.gravity_z", out.gravity.z());
  out.dt_internal = config.get_double("sim.dt_internal", out.dt_internal);
  out.output_every = static_cast<int>(config.get_int("sim.output_every", out.output_every));
  out.n_records = static_cast<int>(config.get_int("sim.n_records", out.n_records));
  out.speed_scale = config.get_double("sim.speed_scale", out.speed_scale);
  out.spin_scale = config.get_double("sim.spin_scale", out.spin_scale);
  return out;
}

TrainConfig train_config_from(const Config& config) {
  TrainConfig out;
  out.hyper.hidden1 = static_cast<int>(config.get_int("train.hidden1", out.hyper.hidden1));
  out.hyper.hidden2 = static_cast<int>(config.get_int("train.hidden2", out.hyper.hidden2));
  out.hyper.activation =
      activation_from_name(config.get_string("train.activation", activation_name(out.hyper.activation)));
  out.hyper.dropout = config.get_double("train.dropout", out.hyper.dropout);
  out.sgd.lr = config.get_double("train.lr", out.sgd.lr);
  out.sgd.schedule =
      schedule_from_name(config.get_string("train.schedule", schedule_name(out.sgd.schedule)));
  out.sgd.gamma = config.get_double("train.gamma", out.sgd.gamma);
  out.sgd.step_every = static_cast<int>(config.get_int("train.step_every", out.sgd.step_every));
  out.sgd.step_factor = config.get_double("train.step_factor", out.sgd.step_factor);
  out.epochs = static_cast<int>(config.get_int("train.epochs", out.epochs));
  out.batch = static_cast<int>(config.get_int("train.batch", out.batch));
  out.patience = static_cast<int>(config.get_int("train.patience", out.patience));
  out.target_accuracy = config.get_double("train.target_accuracy", out.target_accuracy);
  out.weighted_loss = config.get_bool("train.weighted_loss", out.weighted_loss);
  out.augment = config.get_bool("train.augment", out.augment);

  if (out.hyper.hidden1 <= 0 || out.hyper.hidden2 <= 0)
    throw ConfigError("train.hidden1 and train.hidden2 must be positive");
  if (out.hyper.dropout < 0.0 || out.hyper.dropout >= 1.0)
    throw ConfigError("train.dropout must lie in [0, 1)");
  if (out.sgd.lr <= 0.0) throw ConfigError("train.lr must be positive");
  if (out.sgd.gamma <= 0.0 || out.sgd.gamma > 1.0)
    throw ConfigError("train.gamma must lie in (0, 1]");
  if (out.sgd.step_every <= 0) throw ConfigError("train.step_every must be positive");
  if (out.sgd.step_factor <= 0.0 || out.sgd.step_factor >= 1.0)
    throw ConfigError("train.step_factor must lie in (0, 1)");
  if (out.epochs <= 0) throw ConfigError("train.epochs must be positive");
  if (out.batch <= 0) throw ConfigError("train.batch must be positive");
  if (out.patience <= 0) throw ConfigError("train.patience must be positive");
  if (out.target_accuracy < 0.0 || out.target_accuracy > 1.0)
    throw ConfigError("train.target_accuracy must lie in [0, 1]");
  return out;
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kTanhshrink: return "tanhshrink";
    case Activation::kRelu: return "relu";
  }
  throw ConfigError("unknown activation enum value");
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "tanh") return Activation::kTanh;
  if (name == "tanhshrink") return Activation::kTanhshrink;
  if (name == "relu") return Activation::kRelu;
  throw ConfigError("unknown activation '" + name + "'");
}

const char* schedule_name(ad::Schedule s) {
  switch (s) {
    case ad::Schedule::kNone: return "none";
    case ad::Schedule::kExponential: return "exponential";
    case ad::Schedule::kStep: return "step";
  }
  throw ConfigError("unknown schedule enum value");
}

ad::Schedule schedule_from_name(const std::string& name) {
  if (name == "none") return ad::Schedule::kNone;
  if (name == "exponential") return ad::Schedule::kExponential;
  if (name == "step") return ad::Schedule::kStep;
  throw ConfigError("unknown schedule '" + name + "'");
}

std::string config_schema_text() {
  std::string out = "key = default  (type)  meaning\n";
  for (const KeyDoc& k : kSchema) {
    out += k.key;
    out += " = ";
    out += k.fallback;
    out += "  (";
    out += k.type;
    out += ")  ";
    out += k.doc;
    out += "\n";
  }
  return out;
}

}  // namespace dqrb
