#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqrb/config.hpp"
#include "dqrb/dataset.hpp"
#include "dqrb/errors.hpp"
#include "dqrb/pipeline.hpp"
#include "dqrb/svg.hpp"
#include "dqrb/train.hpp"
#include "dqrb/util.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dqrb;

namespace {

// A predicted state within this of the recorded one still counts as matching
// free flight; the first step beyond it is the divergence the eval reports.
constexpr double kDivergenceTol = 1e-6;

struct Args {
  std::string config_path;
  std::string in_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int steps = 100;
  std::string variant = "multi";
  std::string stage = "attention";
};

Config config_or_empty(const std::string& path) {
  return path.empty() ? Config{} : load_config(path);
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

RecordSet read_dataset(const std::string& path) {
  return ends_with(path, ".csv") ? read_records_csv(path) : read_records_jsonl(path);
}

void write_dataset(const std::string& path, const RecordSet& set) {
  if (ends_with(path, ".csv"))
    write_records_csv(path, set);
  else
    write_records_jsonl(path, set);
}

std::string find_dataset(const std::string& dir) {
  for (const char* name : {"dataset.jsonl", "dataset.csv"}) {
    std::string path = dir + "/" + name;
    if (file_exists(path)) return path;
  }
  throw FileError("no dataset.jsonl or dataset.csv in " + dir);
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError("cannot create directory " + dir);
}

// No timestamps: reruns with the same inputs produce byte-identical manifests.
void write_manifest(const std::string& path, const std::string& command, const Args& args,
                    const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
  json m;
  m["format"] = "dqrb-manifest";
  m["version"] = 1;
  m["command"] = command;
  m["config"] = args.config_path;
  m["seed"] = args.seed;
  m["inputs"] = json::array();
  for (const std::string& p : inputs) {
    json e;
    e["path"] = p;
    e["sha256"] = sha256_hex(read_file(p));
    m["inputs"].push_back(e);
  }
  m["outputs"] = outputs;
  write_file(path, m.dump(2) + "\n");
}

std::vector<std::string> with_config(const Args& args, std::vector<std::string> inputs) {
  if (!args.config_path.empty()) inputs.insert(inputs.begin(), args.config_path);
  return inputs;
}

// ---- model files: a wrapper that records the architecture next to the
// trained weights, so loading needs no config ----

const json& jfield(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw SchemaError(std::string("model file is missing field ") + name);
  return *it;
}

double jnumber(const json& j, const char* name) {
  const json& v = jfield(j, name);
  if (!v.is_number()) throw SchemaError(std::string("model field ") + name + " must be a number");
  return v.get<double>();
}

std::string jstring(const json& j, const char* name) {
  const json& v = jfield(j, name);
  if (!v.is_string()) throw SchemaError(std::string("model field ") + name + " must be a string");
  return v.get<std::string>();
}

json parse_json_file(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw SchemaError("malformed JSON in " + path);
  if (!j.is_object()) throw SchemaError(path + " must hold a JSON object");
  return j;
}

json model_header(const std::string& stage, const StageHyper& hyper, double box_half) {
  json j;
  j["format"] = "dqrb-model";
  j["version"] = 1;
  j["stage"] = stage;
  j["hidden1"] = hyper.hidden1;
  j["hidden2"] = hyper.hidden2;
  j["activation"] = activation_name(hyper.activation);
  j["dropout"] = hyper.dropout;
  j["box_half"] = box_half;
  return j;
}

StageHyper hyper_from_model(const json& j) {
  StageHyper h;
  h.hidden1 = static_cast<int>(jnumber(j, "hidden1"));
  h.hidden2 = static_cast<int>(jnumber(j, "hidden2"));
  h.activation = activation_from_name(jstring(j, "activation"));
  h.dropout = jnumber(j, "dropout");
  return h;
}

void check_model_header(const json& j, const std::string& path, const std::string& stage) {
  if (jstring(j, "format") != "dqrb-model")
    throw SchemaError(path + " is not a dqrb-model file");
  if (static_cast<int>(jnumber(j, "version")) != 1)
    throw SchemaError(path + ": unsupported model version");
  if (jstring(j, "stage") != stage)
    throw SchemaError(path + ": expected a " + stage + " model");
}

std::string attention_kind_string(AttentionKind kind) {
  return kind == AttentionKind::kMulti ? "attention-multi" : "attention-binary";
}

void save_attention_model(const std::string& path, const AttentionClassifier& model,
                          double box_half) {
  json j = model_header("attention", model.hyper, box_half);
  j["variant"] = model.kind == AttentionKind::kMulti ? "multi" : "binary";
  j["checkpoint"] =
      json::parse(ad::checkpoint_to_json(attention_params(model), attention_kind_string(model.kind)));
  write_file(path, j.dump() + "\n");
}

struct LoadedAttention {
  AttentionClassifier model;
  double box_half = 0.0;
};

LoadedAttention load_attention_model(const std::string& path, const std::string& variant) {
  json j = parse_json_file(path);
  check_model_header(j, path, "attention");
  if (jstring(j, "variant") != variant)
    throw SchemaError(path + ": expected the " + variant + " variant");
  AttentionKind kind = variant == "multi" ? AttentionKind::kMulti : AttentionKind::kBinary;
  Rng rng(0);
  LoadedAttention out{make_attention(kind, hyper_from_model(j), rng), jnumber(j, "box_half")};
  std::vector<ad::Tensor> params = attention_params(out.model);
  ad::checkpoint_from_json(jfield(j, "checkpoint").dump(), attention_kind_string(kind), params);
  return out;
}

void save_collision_model(const std::string& path, const CollisionStage& stage,
                          double box_half, double dt) {
  json j = model_header("collision", stage.twist.hyper, box_half);
  j["dt"] = dt;
  j["checkpoint"] = json::parse(ad::checkpoint_to_json(collision_params(stage), "collision"));
  write_file(path, j.dump() + "\n");
}

struct LoadedCollision {
  CollisionStage stage;
  double box_half = 0.0;
  double dt = 0.0;
};

LoadedCollision load_collision_model(const std::string& path) {
  json j = parse_json_file(path);
  check_model_header(j, path, "collision");
  StageHyper hyper = hyper_from_model(j);
  Rng rng(0);
  LoadedCollision out;
  out.stage.twist = make_collision_net(hyper, rng, "twist");
  out.stage.impulse = make_collision_net(hyper, rng, "impulse");
  out.stage.angmom = make_collision_net(hyper, rng, "angmom");
  out.box_half = jnumber(j, "box_half");
  out.dt = jnumber(j, "dt");
  std::vector<ad::Tensor> params = collision_params(out.stage);
  ad::checkpoint_from_json(jfield(j, "checkpoint").dump(), "collision", params);
  return out;
}

// Both stages plus the dataset geometry must agree before sequence prediction.
void check_compatible(const LoadedAttention& a, const LoadedCollision& c, double dt) {
  if (a.box_half != c.box_half)
    throw ConfigError("attention and collision models use different box sizes");
  if (c.dt != dt)
    throw ConfigError("collision model was trained for a different record interval");
}

// ---- trace files ----

std::string trace_path(const std::string& dir, const std::string& variant) {
  return dir + "/trace-" + variant + ".jsonl";
}

void write_trace(const std::string& path, const RigidBodyRecord& start,
                 const std::vector<TraceStep>& trace, double dt, const std::string& variant,
                 double box_half) {
  json header;
  header["format"] = "dqrb-trace";
  header["version"] = 1;
  header["record_interval"] = dt;
  header["variant"] = variant;
  header["box_half"] = box_half;
  std::string out = header.dump() + "\n";
  auto line = [](const RigidBodyRecord& state, const std::string& decision,
                 const std::string& path_taken, bool out_of_domain) {
    json j = json::parse(record_json_line(state));
    j["attention_decision"] = decision;
    j["path_taken"] = path_taken;
    j["out_of_domain"] = out_of_domain;
    return j.dump() + "\n";
  };
  out += line(start, "none", "init", wall_penetration(start, box_half) > 1e-9);
  for (const TraceStep& step : trace)
    out += line(step.state, wall_label_name(step.attention_decision),
                step.used_collision_net ? "collision" : "hard", step.out_of_domain);
  write_file(path, out);
}

// States only; the reader tolerates the extra fields. Row i is step i with
// row 0 the initial state, aligned with the truth records.
std::vector<RigidBodyRecord> read_trace_states(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path + " is empty");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() ||
      jstring(header, "format") != std::string("dqrb-trace"))
    throw SchemaError(path + " is not a dqrb-trace file");
  if (static_cast<int>(jnumber(header, "version")) != 1)
    throw SchemaError(path + ": unsupported trace version");
  std::vector<RigidBodyRecord> states;
  while (std::getline(in, line))
    if (!line.empty()) states.push_back(record_from_json_line(line));
  if (states.empty()) throw SchemaError(path + " holds no states");
  return states;
}

// ---- commands ----

void cmd_simulate(const Args& args) {
  SimConfig sim = sim_config_from(config_or_empty(args.config_path));
  std::vector<RigidBodyRecord> records = simulate(sim, args.seed);
  RecordSet set{records, sim.dt_internal * sim.output_every};
  write_dataset(args.out_path, set);
  write_manifest(args.out_path + ".manifest.json", "simulate", args, with_config(args, {}),
                 {args.out_path});
  auto counts = label_counts(records);
  log_info("simulate: " + std::to_string(records.size()) + " records, " +
           std::to_string(records.size() - static_cast<std::size_t>(counts[0])) +
           " collision-labeled");
}

void cmd_augment(const Args& args) {
  RecordSet set = read_dataset(args.in_path);
  // collision records gain their eight rotated copies, free-flight records
  // pass through untouched; training sees the same mix
  RecordSet out{{}, set.record_interval};
  out.records.reserve(set.records.size());
  for (const RigidBodyRecord& rec : set.records) {
    out.records.push_back(rec);
    if (rec.collision_label == WallLabel::kNone) continue;
    for (const Quat& rot : augmentation_rotations(rec.collision_label))
      out.records.push_back(rotate_record(rec, rot));
  }
  write_dataset(args.out_path, out);
  write_manifest(args.out_path + ".manifest.json", "augment", args,
                 with_config(args, {args.in_path}), {args.out_path});
  log_info("augment: " + std::to_string(set.records.size()) + " -> " +
           std::to_string(out.records.size()) + " records");
}

void cmd_train(const Args& args) {
  RecordSet set = read_dataset(args.in_path);
  RecordSplit split = split_records(set.records);
  Config config = config_or_empty(args.config_path);
  TrainConfig tc = train_config_from(config);
  tc.seed = args.seed;
  double box_half = sim_config_from(config).box_half_extent;
  ensure_dir(args.out_path);

  std::vector<std::string> outputs;
  std::string manifest_name;
  if (args.stage == "attention") {
    AttentionKind kind =
        args.variant == "multi" ? AttentionKind::kMulti : AttentionKind::kBinary;
    AttentionTraining t = train_attention(kind, split, box_half, tc);
    std::string model_path = args.out_path + "/attention-" + args.variant + ".json";
    std::string log_path = args.out_path + "/attention-" + args.variant + ".log.csv";
    save_attention_model(model_path, t.model, box_half);
    write_file(log_path, training_log_csv(t.result.log));
    outputs = {model_path, log_path};
    manifest_name = "train-attention-" + args.variant;
    log_info("train " + manifest_name + ": best epoch " + std::to_string(t.result.best_epoch) +
             ", validation accuracy " + format_double(t.result.best_val_accuracy));
  } else {
    CollisionTraining t = train_collision(split, set.record_interval, box_half, tc);
    std::string model_path = args.out_path + "/collision.json";
    save_collision_model(model_path, t.stage, box_half, set.record_interval);
    outputs = {model_path};
    const char* names[3] = {"twist", "impulse", "angmom"};
    for (int k = 0; k < 3; ++k) {
      std::string log_path =
          args.out_path + "/collision-" + names[k] + ".log.csv";
      write_file(log_path, training_log_csv(t.results[k].log));
      outputs.push_back(log_path);
      log_info(std::string("train collision ") + names[k] + ": best validation mse " +
               format_double(t.results[k].best_val_loss));
    }
    manifest_name = "train-collision";
  }
  write_manifest(args.out_path + "/" + manifest_name + ".manifest.json", "train", args,
                 with_config(args, {args.in_path}), outputs);
}

void cmd_predict(const Args& args) {
  std::string dataset_path = find_dataset(args.in_path);
  RecordSet set = read_dataset(dataset_path);
  RecordSplit split = split_records(set.records);
  if (split.test.empty()) throw DegenerateInput("test split is empty");
  std::string attention_path = args.in_path + "/attention-" + args.variant + ".json";
  std::string collision_path = args.in_path + "/collision.json";
  LoadedAttention attention = load_attention_model(attention_path, args.variant);
  LoadedCollision collision = load_collision_model(collision_path);
  check_compatible(attention, collision, set.record_interval);

  RigidBodyRecord start = split.test.front();
  std::vector<TraceStep> trace = predict_sequence(attention.model, collision.stage, start,
                                                  args.steps, set.record_interval,
                                                  attention.box_half);
  std::string out_path =
      args.out_path.empty() ? trace_path(args.in_path, args.variant) : args.out_path;
  write_trace(out_path, start, trace, set.record_interval, args.variant, attention.box_half);
  write_manifest(out_path + ".manifest.json", "predict", args,
                 with_config(args, {dataset_path, attention_path, collision_path}), {out_path});
  log_info("predict: " + std::to_string(trace.size()) + " steps -> " + out_path);
}

// orientation difference up to the double cover
double quat_diff(const Quat& a, const Quat& b) {
  double direct = std::max(std::max(std::abs(a.w - b.w), std::abs(a.x - b.x)),
                           std::max(std::abs(a.y - b.y), std::abs(a.z - b.z)));
  double flipped = std::max(std::max(std::abs(a.w + b.w), std::abs(a.x + b.x)),
                            std::max(std::abs(a.y + b.y), std::abs(a.z + b.z)));
  return std::min(direct, flipped);
}

double state_error(const RigidBodyRecord& a, const RigidBodyRecord& b) {
  double err = quat_diff(a.orientation, b.orientation);
  err = std::max(err, (a.position - b.position).cwiseAbs().maxCoeff());
  err = std::max(err, (a.velocity - b.velocity).cwiseAbs().maxCoeff());
  err = std::max(err, (a.angular_velocity - b.angular_velocity).cwiseAbs().maxCoeff());
  return err;
}

void cmd_eval(const Args& args) {
  std::string dataset_path = find_dataset(args.in_path);
  RecordSet set = read_dataset(dataset_path);
  RecordSplit split = split_records(set.records);
  if (split.test.size() < 2) throw DegenerateInput("test split needs at least two records");
  std::string attention_path = args.in_path + "/attention-" + args.variant + ".json";
  std::string collision_path = args.in_path + "/collision.json";
  LoadedAttention attention = load_attention_model(attention_path, args.variant);
  LoadedCollision collision = load_collision_model(collision_path);
  check_compatible(attention, collision, set.record_interval);
  std::string out_dir = args.out_path.empty() ? args.in_path : args.out_path;
  ensure_dir(out_dir);

  // attention quality on the held-out test split
  std::vector<WallLabel> labels = predict_labels(attention.model, split.test, attention.box_half);
  double accuracy = decision_accuracy(labels, split.test);
  std::string confusion_path = out_dir + "/confusion-" + args.variant + ".csv";
  write_file(confusion_path, confusion_csv(confusion_counts(labels, split.test)));

  // per-path regression quality on the validation split
  CollisionData val =
      collision_dataset(split.validation, set.record_interval, attention.box_half, false);
  Rng scratch(0);
  auto path_mse = [&](const CollisionNet& net, const ad::Mat& target) {
    return ad::mse(collision_forward(net, ad::constant(val.x), false, scratch), target)
        .value()(0, 0);
  };
  double mse_twist = path_mse(collision.stage.twist, val.twist);
  double mse_impulse = path_mse(collision.stage.impulse, val.impulse);
  double mse_angmom = path_mse(collision.stage.angmom, val.angmom);

  // closed-loop trajectory against the recorded test prefix
  int steps = std::min<int>(args.steps, static_cast<int>(split.test.size()) - 1);
  std::vector<TraceStep> trace =
      predict_sequence(attention.model, collision.stage, split.test.front(), steps,
                       set.record_interval, attention.box_half);
  int first_attention_error = -1;
  int first_collision_use = -1;
  int first_divergence = -1;
  double prefix_max_error = 0.0;
  double max_error = 0.0;
  for (int s = 0; s < steps; ++s) {
    if (first_attention_error < 0 &&
        trace[s].attention_decision != split.test[s].collision_label)
      first_attention_error = s;
    if (first_collision_use < 0 && trace[s].used_collision_net) first_collision_use = s;
    double err = state_error(trace[s].state, split.test[s + 1]);
    max_error = std::max(max_error, err);
    if (first_divergence < 0 && err > kDivergenceTol) first_divergence = s;
    if (first_attention_error < 0) prefix_max_error = std::max(prefix_max_error, err);
  }

  json report;
  report["format"] = "dqrb-eval";
  report["version"] = 1;
  report["variant"] = args.variant;
  report["test_records"] = split.test.size();
  report["test_accuracy"] = accuracy;
  report["confusion_csv"] = confusion_path;
  report["validation_mse"] = {
      {"twist", mse_twist}, {"impulse", mse_impulse}, {"angmom", mse_angmom}};
  report["trajectory"] = {{"steps", steps},
                          {"first_attention_error_step", first_attention_error},
                          {"first_collision_use_step", first_collision_use},
                          {"first_divergence_step", first_divergence},
                          {"prefix_max_abs_error", prefix_max_error},
                          {"max_abs_error", max_error}};
  std::string report_path = out_dir + "/eval-" + args.variant + ".json";
  write_file(report_path, report.dump(2) + "\n");
  write_manifest(out_dir + "/eval-" + args.variant + ".manifest.json", "eval", args,
                 with_config(args, {dataset_path, attention_path, collision_path}),
                 {report_path, confusion_path});
  printf("%s\n", report.dump(2).c_str());
}

void cmd_plot(const Args& args) {
  std::string trace_file = trace_path(args.in_path, args.variant);
  std::vector<RigidBodyRecord> predicted = read_trace_states(trace_file);
  std::string dataset_path = find_dataset(args.in_path);
  RecordSet set = read_dataset(dataset_path);
  RecordSplit split = split_records(set.records);
  if (split.test.empty()) throw DegenerateInput("test split is empty");
  std::size_t n = std::min(predicted.size(), split.test.size());
  std::vector<RigidBodyRecord> truth(split.test.begin(),
                                     split.test.begin() + static_cast<long>(n));
  predicted.resize(n);
  std::string out_path = args.out_path.empty()
                             ? args.in_path + "/trajectory-" + args.variant + ".svg"
                             : args.out_path;
  write_file(out_path, trajectory_svg(truth, predicted));
  write_manifest(out_path + ".manifest.json", "plot", args,
                 with_config(args, {trace_file, dataset_path}), {out_path});
  log_info("plot: " + std::to_string(n) + " steps -> " + out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual quaternion rigid body sequence pipeline"};
  app.require_subcommand(1);
  Args args;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "key = value config file");
  };
  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", args.seed, "random seed (default 0)");
  };
  auto add_in = [&](CLI::App* sub, const char* doc) {
    sub->add_option("--in", args.in_path, doc)->required();
  };
  auto add_out = [&](CLI::App* sub, const char* doc, bool required) {
    CLI::Option* o = sub->add_option("--out", args.out_path, doc);
    if (required) o->required();
  };
  auto add_variant = [&](CLI::App* sub) {
    sub->add_option("--variant", args.variant, "attention head: multi or binary")
        ->check(CLI::IsMember({"multi", "binary"}));
  };
  auto add_steps = [&](CLI::App* sub) {
    sub->add_option("--steps", args.steps, "prediction steps (default 100)")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* sim = app.add_subcommand("simulate", "generate a dataset");
  add_config(sim);
  add_seed(sim);
  add_out(sim, "dataset file (.jsonl or .csv)", true);

  CLI::App* aug = app.add_subcommand("augment", "x9 rotation copies of collision records");
  add_config(aug);
  add_in(aug, "dataset file");
  add_out(aug, "augmented dataset file", true);

  CLI::App* train = app.add_subcommand("train", "train one stage on a dataset");
  add_config(train);
  add_seed(train);
  add_in(train, "dataset file");
  add_out(train, "run directory for model and log files", true);
  add_variant(train);
  train->add_option("--stage", args.stage, "attention or collision")
      ->check(CLI::IsMember({"attention", "collision"}));

  CLI::App* predict = app.add_subcommand("predict", "roll a trained model forward");
  add_config(predict);
  add_in(predict, "run directory with dataset and models");
  add_out(predict, "trace file (default <in>/trace-<variant>.jsonl)", false);
  add_variant(predict);
  add_steps(predict);

  CLI::App* eval = app.add_subcommand("eval", "confusion matrix, losses, trajectory report");
  add_config(eval);
  add_in(eval, "run directory with dataset and models");
  add_out(eval, "report directory (default <in>)", false);
  add_variant(eval);
  add_steps(eval);

  CLI::App* plot = app.add_subcommand("plot", "four-panel SVG of prediction vs truth");
  add_config(plot);
  add_in(plot, "run directory with dataset and trace");
  add_out(plot, "SVG file (default <in>/trajectory-<variant>.svg)", false);
  add_variant(plot);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) cmd_simulate(args);
    if (aug->parsed()) cmd_augment(args);
    if (train->parsed()) cmd_train(args);
    if (predict->parsed()) cmd_predict(args);
    if (eval->parsed()) cmd_eval(args);
    if (plot->parsed()) cmd_plot(args);
  } catch (const FileError& e) {
    fprintf(stderr, "file error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    fprintf(stderr, "config error: %s\n", e.what());
    return 3;
  } catch (const SchemaError& e) {
    fprintf(stderr, "schema error: %s\n", e.what());
    return 4;
  } catch (const ShapeError& e) {
    fprintf(stderr, "shape error: %s\n", e.what());
    return 5;
  } catch (const DegenerateInput& e) {
    fprintf(stderr, "degenerate input: %s\n", e.what());
    return 6;
  } catch (const BranchCut& e) {
    fprintf(stderr, "branch cut: %s\n", e.what());
    return 7;
  } catch (const std::exception& e) {
    fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
