#include "dqrb/dataset.hpp"

#include <filesystem>
#include <string>

#include "doctest.h"
#include "dqrb/errors.hpp"
#include "dqrb/util.hpp"

using namespace dqrb;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

RecordSet sample_set() {
  SimConfig cfg = desk_preset();
  cfg.n_records = 60;
  cfg.output_every = 500;
  RecordSet set;
  set.records = simulate(cfg, 11);
  set.record_interval = cfg.output_every * cfg.dt_internal;
  return set;
}

bool records_equal(const RigidBodyRecord& a, const RigidBodyRecord& b) {
  return a.t == b.t && a.orientation.w == b.orientation.w &&
         a.orientation.x == b.orientation.x && a.orientation.y == b.orientation.y &&
         a.orientation.z == b.orientation.z && a.position == b.position &&
         a.velocity == b.velocity && a.angular_velocity == b.angular_velocity &&
         a.half_dims == b.half_dims && a.mass == b.mass &&
         a.angular_momentum == b.angular_momentum && a.momentum == b.momentum &&
         a.collision_label == b.collision_label;
}

struct TmpFile {
  std::string path;
  explicit TmpFile(const std::string& name) : path(tmp_path(name)) {}
  ~TmpFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("jsonl records round-trip bit-exactly") {
  RecordSet set = sample_set();
  TmpFile f("dqrb_records_roundtrip.jsonl");
  write_records_jsonl(f.path, set);
  RecordSet back = read_records_jsonl(f.path);
  CHECK(back.record_interval == set.record_interval);
  REQUIRE(back.records.size() == set.records.size());
  for (size_t i = 0; i < set.records.size(); ++i)
    CHECK(records_equal(set.records[i], back.records[i]));
}

TEST_CASE("jsonl writing is deterministic byte for byte") {
  RecordSet set = sample_set();
  TmpFile a("dqrb_records_a.jsonl");
  TmpFile b("dqrb_records_b.jsonl");
  write_records_jsonl(a.path, set);
  write_records_jsonl(b.path, set);
  CHECK(read_file(a.path) == read_file(b.path));
}

TEST_CASE("jsonl reader rejects wrong headers and broken records") {
  RecordSet set = sample_set();
  set.records.resize(3);
  TmpFile f("dqrb_records_bad.jsonl");

  SUBCASE("missing file") { CHECK_THROWS_AS(read_records_jsonl(f.path), FileError); }
  SUBCASE("empty file") {
    write_file(f.path, "");
    CHECK_THROWS_AS(read_records_jsonl(f.path), SchemaError);
  }
  SUBCASE("wrong format tag") {
    write_file(f.path, "{\"format\":\"other\",\"version\":1,\"record_interval\":0.1}\n");
    CHECK_THROWS_AS(read_records_jsonl(f.path), SchemaError);
  }
  SUBCASE("future version") {
    write_file(f.path, "{\"format\":\"dqrb-records\",\"version\":2,\"record_interval\":0.1}\n");
    CHECK_THROWS_AS(read_records_jsonl(f.path), SchemaError);
  }
  SUBCASE("malformed record line") {
    write_records_jsonl(f.path, set);
    write_file(f.path, read_file(f.path) + "{not json\n");
    CHECK_THROWS_AS(read_records_jsonl(f.path), SchemaError);
  }
  SUBCASE("record missing a field") {
    write_file(f.path,
               "{\"format\":\"dqrb-records\",\"version\":1,\"record_interval\":0.1}\n"
               "{\"t\":0.0,\"mass\":1.0}\n");
    CHECK_THROWS_AS(read_records_jsonl(f.path), SchemaError);
  }
  SUBCASE("unknown label") {
    write_records_jsonl(f.path, set);
    std::string text = read_file(f.path);
    size_t at = text.find("\"none\"");
    REQUIRE(at != std::string::npos);
    text.replace(at, 6, "\"+w..\"");
    write_file(f.path, text);
    CHECK_THROWS_AS(read_records_jsonl(f.path), SchemaError);
  }
}

TEST_CASE("csv records round-trip bit-exactly with implicit time") {
  RecordSet set = sample_set();
  TmpFile f("dqrb_records_roundtrip.csv");
  write_records_csv(f.path, set);
  RecordSet back = read_records_csv(f.path);
  CHECK(back.record_interval == set.record_interval);
  REQUIRE(back.records.size() == set.records.size());
  for (size_t i = 0; i < set.records.size(); ++i) {
    // the writer drops t; the reader rebuilds it as row index times interval,
    // which is the same product the simulator used
    CHECK(records_equal(set.records[i], back.records[i]));
  }
  std::string text = read_file(f.path);
  CHECK(text.rfind("# dqrb-records v1 interval=", 0) == 0);
  size_t first_row = text.find('\n', text.find('\n') + 1) + 1;
  std::string row = text.substr(first_row, text.find('\n', first_row) - first_row);
  CHECK(std::count(row.begin(), row.end(), ',') == 23);  // 24 columns
}

TEST_CASE("csv reader rejects malformed files") {
  RecordSet set = sample_set();
  set.records.resize(2);
  TmpFile f("dqrb_records_bad.csv");

  SUBCASE("missing comment line") {
    write_file(f.path, "qw,qx\n1,2\n");
    CHECK_THROWS_AS(read_records_csv(f.path), SchemaError);
  }
  SUBCASE("future version") {
    write_records_csv(f.path, set);
    std::string text = read_file(f.path);
    text.replace(text.find("v1"), 2, "v2");
    write_file(f.path, text);
    CHECK_THROWS_AS(read_records_csv(f.path), SchemaError);
  }
  SUBCASE("wrong column header") {
    write_records_csv(f.path, set);
    std::string text = read_file(f.path);
    text.replace(text.find("qw,"), 3, "qq,");
    write_file(f.path, text);
    CHECK_THROWS_AS(read_records_csv(f.path), SchemaError);
  }
  SUBCASE("short row") {
    write_records_csv(f.path, set);
    write_file(f.path, read_file(f.path) + "1,2,3\n");
    CHECK_THROWS_AS(read_records_csv(f.path), SchemaError);
  }
  SUBCASE("non-numeric cell") {
    write_records_csv(f.path, set);
    std::string text = read_file(f.path);
    size_t row = text.find('\n', text.find('\n') + 1) + 1;
    text.replace(row, 1, "x");
    write_file(f.path, text);
    CHECK_THROWS_AS(read_records_csv(f.path), SchemaError);
  }
}

TEST_CASE("records split 70/15/15 and stay contiguous") {
  std::vector<RigidBodyRecord> records(100);
  for (int i = 0; i < 100; ++i) records[i].t = i;
  RecordSplit split = split_records(records);
  CHECK(split.train.size() == 70);
  CHECK(split.validation.size() == 15);
  CHECK(split.test.size() == 15);
  CHECK(split.train.front().t == 0);
  CHECK(split.train.back().t == 69);
  CHECK(split.validation.front().t == 70);
  CHECK(split.validation.back().t == 84);
  CHECK(split.test.front().t == 85);
  CHECK(split.test.back().t == 99);

  records.resize(10);
  split = split_records(records);
  CHECK(split.train.size() == 7);
  CHECK(split.validation.size() == 1);
  CHECK(split.test.size() == 2);

  records.resize(20000);
  for (int i = 0; i < 20000; ++i) records[i].t = i;
  split = split_records(records);
  CHECK(split.train.size() == 14000);
  CHECK(split.validation.size() == 3000);
  CHECK(split.test.size() == 3000);
}
