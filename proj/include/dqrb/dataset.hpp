#pragma once

#include <string>
#include <vector>

#include "dqrb/simulator.hpp"

namespace dqrb {

inline constexpr int kRecordsVersion = 1;

struct RecordSet {
  std::vector<RigidBodyRecord> records;
  double record_interval = 0.0;  // seconds between consecutive records
};

// JSONL: a header line {"format":"dqrb-records","version":1,"record_interval":x}
// followed by one JSON object per record with fields t, orientation [w,x,y,z],
// position, velocity, angular_velocity, half_dims, mass, angular_momentum,
// momentum and collision_label. Readers throw SchemaError on anything that
// does not match, FileError when the file cannot be opened.
void write_records_jsonl(const std::string& path, const RecordSet& set);
RecordSet read_records_jsonl(const std::string& path);

// CSV: a comment line carrying format, version and interval, one column
// header, then 24 columns per row; the time stamp is implicit as the row
// index times the interval:
//   qw,qx,qy,qz,px,py,pz,vx,vy,vz,wx,wy,wz,hx,hy,hz,mass,Lx,Ly,Lz,mx,my,mz,label
void write_records_csv(const std::string& path, const RecordSet& set);
RecordSet read_records_csv(const std::string& path);

// One record as a single JSON line (no newline) and back. The reader ignores
// keys beyond the record schema, so trace lines carrying extra fields parse
// with the same code. SchemaError on malformed input.
std::string record_json_line(const RigidBodyRecord& r);
RigidBodyRecord record_from_json_line(const std::string& line);

// Contiguous 70/15/15 split in dataset order, sized by integer percentage so
// the pieces are reproducible for any length.
struct RecordSplit {
  std::vector<RigidBodyRecord> train;
  std::vector<RigidBodyRecord> validation;
  std::vector<RigidBodyRecord> test;
};
RecordSplit split_records(const std::vector<RigidBodyRecord>& records);

}  // namespace dqrb
