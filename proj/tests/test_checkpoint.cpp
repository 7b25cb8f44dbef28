#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "tinerf/rng.hpp"
#include "tinerf/tape.hpp"

using namespace tinerf;

namespace {

const char* kPath = "/tmp/tinerf_test_ck.bin";

Tape make_tape() {
  Tape t;
  t.add_segment("table", 8, 2, ParamClass::grid_table);
  t.add_segment("w0", 6, 0, ParamClass::mlp);
  t.add_segment("z", 3, 0, ParamClass::embedding);
  t.add_segment("occ", 5, 0, ParamClass::state);
  return t;
}

void fill(Tape& t, uint64_t seed) {
  Rng rng(seed, RngStream::misc, 99ull);
  double* v = t.values();
  for (size_t i = 0; i < t.size(); ++i)
    v[i] = rng.uniform(-10.0, 10.0) * std::pow(10.0, (double)rng.below(7) - 3.0);
}

std::vector<unsigned char> slurp(const char* path) {
  FILE* f = fopen(path, "rb");
  REQUIRE(f);
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  fseek(f, 0, SEEK_SET);
  std::vector<unsigned char> buf(static_cast<size_t>(n));
  REQUIRE(fread(buf.data(), 1, buf.size(), f) == buf.size());
  fclose(f);
  return buf;
}

void spit(const char* path, const std::vector<unsigned char>& buf) {
  FILE* f = fopen(path, "wb");
  REQUIRE(f);
  REQUIRE(fwrite(buf.data(), 1, buf.size(), f) == buf.size());
  fclose(f);
}

}  // namespace

TEST_CASE("checkpoint round-trips values bit for bit") {
  Tape t = make_tape();
  fill(t, 31);
  t.values()[2] = 0.1 + 0.2;  // not representable: catches any text detour
  save_checkpoint(kPath, t, "{\"seed\":1}", 777);

  CheckpointData ck = load_checkpoint(kPath);
  CHECK(ck.iteration == 777);
  CHECK(ck.config_json == "{\"seed\":1}");
  REQUIRE(ck.segments.size() == 4);
  CHECK(ck.segments[0].name == "table");
  CHECK(ck.segments[0].row_len == 2);
  CHECK(ck.segments[0].cls == ParamClass::grid_table);
  CHECK(ck.segments[3].cls == ParamClass::state);
  REQUIRE(ck.values.size() == t.size());
  for (size_t i = 0; i < t.size(); ++i) CHECK(ck.values[i] == t.values()[i]);

  Tape t2 = make_tape();
  restore_into(t2, ck);
  for (size_t i = 0; i < t.size(); ++i) CHECK(t2.values()[i] == t.values()[i]);
  std::remove(kPath);
}

TEST_CASE("corruption and truncation are detected") {
  Tape t = make_tape();
  fill(t, 32);
  save_checkpoint(kPath, t, "{}", 5);
  auto good = slurp(kPath);

  // flip one payload byte: checksum must catch it
  auto bad = good;
  bad[bad.size() / 2] ^= 0x40;
  spit(kPath, bad);
  CHECK_THROWS_WITH(load_checkpoint(kPath), "checkpoint checksum mismatch");

  // drop the trailing checksum: truncated read
  auto cut = good;
  cut.resize(cut.size() - 9);
  spit(kPath, cut);
  CHECK_THROWS_WITH(load_checkpoint(kPath), "checkpoint truncated");

  // wrong magic
  auto wrong = good;
  wrong[0] ^= 0xff;
  spit(kPath, wrong);
  CHECK_THROWS_WITH(load_checkpoint(kPath), "bad checkpoint magic");

  CHECK_THROWS(load_checkpoint("/tmp/tinerf_test_ck_missing.bin"));
  std::remove(kPath);
}

TEST_CASE("restore refuses a mismatched layout") {
  Tape t = make_tape();
  fill(t, 33);
  save_checkpoint(kPath, t, "{}", 1);
  CheckpointData ck = load_checkpoint(kPath);

  // different segment count
  Tape small;
  small.add_segment("table", 8, 2, ParamClass::grid_table);
  CHECK_THROWS(restore_into(small, ck));

  // same sizes, different name
  Tape renamed;
  renamed.add_segment("table", 8, 2, ParamClass::grid_table);
  renamed.add_segment("w1", 6, 0, ParamClass::mlp);
  renamed.add_segment("z", 3, 0, ParamClass::embedding);
  renamed.add_segment("occ", 5, 0, ParamClass::state);
  CHECK_THROWS(restore_into(renamed, ck));

  // same names, different row length
  Tape rows;
  rows.add_segment("table", 8, 4, ParamClass::grid_table);
  rows.add_segment("w0", 6, 0, ParamClass::mlp);
  rows.add_segment("z", 3, 0, ParamClass::embedding);
  rows.add_segment("occ", 5, 0, ParamClass::state);
  CHECK_THROWS(restore_into(rows, ck));

  // matching layout restores fine
  Tape ok = make_tape();
  restore_into(ok, ck);
  CHECK(ok.values()[0] == t.values()[0]);
  std::remove(kPath);
}
