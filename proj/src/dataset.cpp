#include "dqrb/dataset.hpp"

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqrb/errors.hpp"
#include "dqrb/util.hpp"

namespace dqrb {
namespace {

using json = nlohmann::ordered_json;

const char* kCsvHeader =
    "qw,qx,qy,qz,px,py,pz,vx,vy,vz,wx,wy,wz,hx,hy,hz,mass,Lx,Ly,Lz,mx,my,mz,label";
constexpr int kCsvColumns = 24;

json vec_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw SchemaError(std::string("record field ") + field + " must be a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw SchemaError(std::string("record is missing field ") + field);
  return *it;
}

double require_number(const json& j, const char* field) {
  const json& v = require(j, field);
  if (!v.is_number()) throw SchemaError(std::string("record field ") + field + " must be a number");
  return v.get<double>();
}

json record_json(const RigidBodyRecord& r) {
  json j;
  j["t"] = r.t;
  j["orientation"] =
      json::array({r.orientation.w, r.orientation.x, r.orientation.y, r.orientation.z});
  j["position"] = vec_json(r.position);
  j["velocity"] = vec_json(r.velocity);
  j["angular_velocity"] = vec_json(r.angular_velocity);
  j["half_dims"] = vec_json(r.half_dims);
  j["mass"] = r.mass;
  j["angular_momentum"] = vec_json(r.angular_momentum);
  j["momentum"] = vec_json(r.momentum);
  j["collision_label"] = wall_label_name(r.collision_label);
  return j;
}

RigidBodyRecord record_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("record lines must be JSON objects");
  RigidBodyRecord r;
  r.t = require_number(j, "t");
  const json& q = require(j, "orientation");
  if (!q.is_array() || q.size() != 4) throw SchemaError("orientation must be [w,x,y,z]");
  r.orientation = Quat{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                       q[3].get<double>()};
  r.position = vec_from_json(require(j, "position"), "position");
  r.velocity = vec_from_json(require(j, "velocity"), "velocity");
  r.angular_velocity = vec_from_json(require(j, "angular_velocity"), "angular_velocity");
  r.half_dims = vec_from_json(require(j, "half_dims"), "half_dims");
  r.mass = require_number(j, "mass");
  r.angular_momentum = vec_from_json(require(j, "angular_momentum"), "angular_momentum");
  r.momentum = vec_from_json(require(j, "momentum"), "momentum");
  const json& label = require(j, "collision_label");
  if (!label.is_string()) throw SchemaError("collision_label must be a string");
  r.collision_label = wall_label_from_name(label.get<std::string>());
  return r;
}

json parse_line(const std::string& line, size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw SchemaError("malformed JSON on line " + std::to_string(lineno));
  return j;
}

std::vector<std::string> nonempty_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

void check_header(const json& h) {
  if (!h.is_object() || !h.contains("format") || !h["format"].is_string() ||
      h["format"].get<std::string>() != "dqrb-records")
    throw SchemaError("not a dqrb-records file");
  if (!h.contains("version") || !h["version"].is_number_integer() ||
      h["version"].get<int>() != kRecordsVersion)
    throw SchemaError("unsupported dqrb-records version");
  if (!h.contains("record_interval") || !h["record_interval"].is_number() ||
      h["record_interval"].get<double>() <= 0.0)
    throw SchemaError("record_interval must be a positive number");
}

double parse_strict_double(const std::string& s, size_t lineno) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw SchemaError("bad number '" + s + "' on line " + std::to_string(lineno));
  }
  if (used != s.size())
    throw SchemaError("bad number '" + s + "' on line " + std::to_string(lineno));
  return v;
}

}  // namespace

std::string record_json_line(const RigidBodyRecord& r) { return record_json(r).dump(); }

RigidBodyRecord record_from_json_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded()) throw SchemaError("malformed JSON record line");
  return record_from_json(j);
}

void write_records_jsonl(const std::string& path, const RecordSet& set) {
  json header;
  header["format"] = "dqrb-records";
  header["version"] = kRecordsVersion;
  header["record_interval"] = set.record_interval;
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& r : set.records) {
    out += record_json(r).dump();
    out.push_back('\n');
  }
  write_file(path, out);
}

RecordSet read_records_jsonl(const std::string& path) {
  auto lines = nonempty_lines(read_file(path));
  if (lines.empty()) throw SchemaError("empty records file: " + path);
  json header = parse_line(lines[0], 1);
  check_header(header);
  RecordSet set;
  set.record_interval = header["record_interval"].get<double>();
  set.records.reserve(lines.size() - 1);
  for (size_t i = 1; i < lines.size(); ++i)
    set.records.push_back(record_from_json(parse_line(lines[i], i + 1)));
  return set;
}

void write_records_csv(const std::string& path, const RecordSet& set) {
  std::string out = "# dqrb-records v" + std::to_string(kRecordsVersion) +
                    " interval=" + format_double(set.record_interval) + "\n";
  out += kCsvHeader;
  out.push_back('\n');
  for (const auto& r : set.records) {
    const double cols[kCsvColumns - 1] = {
        r.orientation.w,       r.orientation.x,       r.orientation.y,
        r.orientation.z,       r.position.x(),        r.position.y(),
        r.position.z(),        r.velocity.x(),        r.velocity.y(),
        r.velocity.z(),        r.angular_velocity.x(), r.angular_velocity.y(),
        r.angular_velocity.z(), r.half_dims.x(),       r.half_dims.y(),
        r.half_dims.z(),       r.mass,                r.angular_momentum.x(),
        r.angular_momentum.y(), r.angular_momentum.z(), r.momentum.x(),
        r.momentum.y(),        r.momentum.z()};
    for (double c : cols) {
      out += format_double(c);
      out.push_back(',');
    }
    out += wall_label_name(r.collision_label);
    out.push_back('\n');
  }
  write_file(path, out);
}

RecordSet read_records_csv(const std::string& path) {
  auto lines = nonempty_lines(read_file(path));
  if (lines.size() < 2) throw SchemaError("csv records file needs a comment and a header line");
  const std::string prefix = "# dqrb-records v";
  if (lines[0].rfind(prefix, 0) != 0) throw SchemaError("not a dqrb-records csv file");
  std::istringstream meta(lines[0].substr(prefix.size()));
  int version = -1;
  std::string interval_kv;
  meta >> version >> interval_kv;
  if (version != kRecordsVersion) throw SchemaError("unsupported dqrb-records version");
  if (interval_kv.rfind("interval=", 0) != 0)
    throw SchemaError("csv comment line is missing interval=");
  RecordSet set;
  set.record_interval = parse_strict_double(interval_kv.substr(9), 1);
  if (set.record_interval <= 0.0) throw SchemaError("record_interval must be positive");
  if (lines[1] != kCsvHeader) throw SchemaError("unexpected csv column header");
  for (size_t i = 2; i < lines.size(); ++i) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream row(lines[i]);
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != kCsvColumns)
      throw SchemaError("expected 24 columns on line " + std::to_string(i + 1));
    double v[kCsvColumns - 1];
    for (int c = 0; c < kCsvColumns - 1; ++c) v[c] = parse_strict_double(fields[c], i + 1);
    RigidBodyRecord r;
    r.t = double(i - 2) * set.record_interval;
    r.orientation = Quat{v[0], v[1], v[2], v[3]};
    r.position = {v[4], v[5], v[6]};
    r.velocity = {v[7], v[8], v[9]};
    r.angular_velocity = {v[10], v[11], v[12]};
    r.half_dims = {v[13], v[14], v[15]};
    r.mass = v[16];
    r.angular_momentum = {v[17], v[18], v[19]};
    r.momentum = {v[20], v[21], v[22]};
    r.collision_label = wall_label_from_name(fields[23]);
    set.records.push_back(r);
  }
  return set;
}

RecordSplit split_records(const std::vector<RigidBodyRecord>& records) {
  size_t n = records.size();
  size_t n_train = n * 70 / 100;
  size_t n_val = n * 15 / 100;
  RecordSplit split;
  split.train.assign(records.begin(), records.begin() + n_train);
  split.validation.assign(records.begin() + n_train, records.begin() + n_train + n_val);
  split.test.assign(records.begin() + n_train + n_val, records.end());
  return split;
}

}  // namespace dqrb
