#include "tinerf/tape.hpp"

#include <cstdio>
#include <cstring>

namespace tinerf {
namespace {

constexpr char kMagic[8] = {'T', 'N', 'R', 'F', 'C', 'K', 'P', '1'};
constexpr uint32_t kVersion = 1;

uint64_t fnv1a(const void* data, size_t n) {
  const auto* p = static_cast<const uint8_t*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

struct File {
  FILE* f = nullptr;
  explicit File(FILE* fp) : f(fp) {}
  ~File() {
    if (f) fclose(f);
  }
};

void put(FILE* f, const void* p, size_t n) {
  if (fwrite(p, 1, n, f) != n) throw std::runtime_error("checkpoint write failed");
}
template <class T>
void put_pod(FILE* f, T v) {
  put(f, &v, sizeof(T));
}
void get(FILE* f, void* p, size_t n) {
  if (fread(p, 1, n, f) != n) throw std::runtime_error("checkpoint truncated");
}
template <class T>
T get_pod(FILE* f) {
  T v{};
  get(f, &v, sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Tape& tape,
                     const std::string& config_json, uint64_t iteration) {
  File fh(fopen(path.c_str(), "wb"));
  if (!fh.f) throw std::runtime_error("cannot open checkpoint for write: " + path);
  FILE* f = fh.f;
  put(f, kMagic, 8);
  put_pod<uint32_t>(f, kVersion);
  put_pod<uint64_t>(f, iteration);
  put_pod<uint64_t>(f, config_json.size());
  put(f, config_json.data(), config_json.size());
  put_pod<uint64_t>(f, tape.num_segments());
  for (const auto& s : tape.segments()) {
    put_pod<uint32_t>(f, static_cast<uint32_t>(s.name.size()));
    put(f, s.name.data(), s.name.size());
    put_pod<uint64_t>(f, s.offset);
    put_pod<uint64_t>(f, s.size);
    put_pod<uint32_t>(f, s.row_len);
    put_pod<uint32_t>(f, static_cast<uint32_t>(s.cls));
  }
  put_pod<uint64_t>(f, tape.size());
  put(f, tape.values(), tape.size() * sizeof(double));
  put_pod<uint64_t>(f, fnv1a(tape.values(), tape.size() * sizeof(double)));
  if (fflush(f) != 0) throw std::runtime_error("checkpoint flush failed");
}

CheckpointData load_checkpoint(const std::string& path) {
  File fh(fopen(path.c_str(), "rb"));
  if (!fh.f) throw std::runtime_error("cannot open checkpoint: " + path);
  FILE* f = fh.f;
  char magic[8];
  get(f, magic, 8);
  if (memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("bad checkpoint magic");
  uint32_t version = get_pod<uint32_t>(f);
  if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");

  CheckpointData ck;
  ck.iteration = get_pod<uint64_t>(f);
  uint64_t cfg_len = get_pod<uint64_t>(f);
  if (cfg_len > (1ull << 24)) throw std::runtime_error("implausible config length");
  ck.config_json.resize(cfg_len);
  get(f, ck.config_json.data(), cfg_len);

  uint64_t nseg = get_pod<uint64_t>(f);
  if (nseg > (1ull << 16)) throw std::runtime_error("implausible segment count");
  size_t expect_off = 0;
  for (uint64_t i = 0; i < nseg; ++i) {
    SegmentInfo s;
    uint32_t nl = get_pod<uint32_t>(f);
    if (nl > 4096) throw std::runtime_error("implausible segment name");
    s.name.resize(nl);
    get(f, s.name.data(), nl);
    s.offset = get_pod<uint64_t>(f);
    s.size = get_pod<uint64_t>(f);
    s.row_len = get_pod<uint32_t>(f);
    s.cls = static_cast<ParamClass>(get_pod<uint32_t>(f));
    if (s.offset != expect_off) throw std::runtime_error("segment table not contiguous");
    expect_off += s.size;
    ck.segments.push_back(std::move(s));
  }

  uint64_t nvals = get_pod<uint64_t>(f);
  if (nvals != expect_off) throw std::runtime_error("value count mismatch");
  ck.values.resize(nvals);
  get(f, ck.values.data(), nvals * sizeof(double));
  uint64_t sum = get_pod<uint64_t>(f);
  if (sum != fnv1a(ck.values.data(), nvals * sizeof(double)))
    throw std::runtime_error("checkpoint checksum mismatch");
  return ck;
}

void restore_into(Tape& tape, const CheckpointData& ck) {
  if (ck.segments.size() != tape.num_segments() || ck.values.size() != tape.size())
    throw std::runtime_error("checkpoint layout does not match model");
  for (size_t i = 0; i < ck.segments.size(); ++i) {
    const auto& a = ck.segments[i];
    const auto& b = tape.seg(static_cast<int>(i));
    if (a.name != b.name || a.offset != b.offset || a.size != b.size ||
        a.row_len != b.row_len || a.cls != b.cls)
      throw std::runtime_error("checkpoint segment mismatch: " + a.name);
  }
  std::memcpy(tape.values(), ck.values.data(), ck.values.size() * sizeof(double));
}

}  // namespace tinerf
