#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

// Flat parameter storage. Every trainable array (hash tables, MLP weights,
// per-frame embeddings) lives in one contiguous value buffer with a named
// segment table on top, so the optimizer, checkpoints and gradient checks
// all see a single address space.

namespace tinerf {

enum class ParamClass : uint32_t {
  grid_table = 0,  // hash-table rows; Adam runs with beta2=0.99, eps=1e-15
  mlp = 1,         // dense weights/biases; beta2=0.999, eps=1e-8
  embedding = 2,   // per-frame latent codes; optimized like mlp
  state = 3,       // non-trainable run state (occupancy cache); skipped by the
                   // optimizer but checkpointed like everything else
};

struct SegmentInfo {
  std::string name;
  size_t offset = 0;
  size_t size = 0;
  // >0: gather/scatter addressed in rows of this length (feature tables).
  // 0: dense segment updated as a whole (weights, biases, embeddings).
  uint32_t row_len = 0;
  ParamClass cls = ParamClass::mlp;
};

class Tape {
 public:
  int add_segment(const std::string& name, size_t size, uint32_t row_len,
                  ParamClass cls) {
    if (by_name_.count(name)) throw std::runtime_error("duplicate segment: " + name);
    if (row_len > 0 && size % row_len != 0)
      throw std::runtime_error("segment size not a row multiple: " + name);
    SegmentInfo s;
    s.name = name;
    s.offset = values_.size();
    s.size = size;
    s.row_len = row_len;
    s.cls = cls;
    by_name_[name] = static_cast<int>(segments_.size());
    segments_.push_back(s);
    values_.resize(values_.size() + size, 0.0);
    grads_.resize(values_.size(), 0.0);
    return static_cast<int>(segments_.size()) - 1;
  }

  size_t size() const { return values_.size(); }
  size_t num_segments() const { return segments_.size(); }
  const SegmentInfo& seg(int id) const { return segments_.at(static_cast<size_t>(id)); }
  const std::vector<SegmentInfo>& segments() const { return segments_; }

  int find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? -1 : it->second;
  }

  double* values() { return values_.data(); }
  const double* values() const { return values_.data(); }
  double* grads() { return grads_.data(); }
  const double* grads() const { return grads_.data(); }

  double* seg_values(int id) { return values_.data() + seg(id).offset; }
  const double* seg_values(int id) const { return values_.data() + seg(id).offset; }
  double* seg_grads(int id) { return grads_.data() + seg(id).offset; }

  void zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }

 private:
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<SegmentInfo> segments_;
  std::unordered_map<std::string, int> by_name_;
};

// Per-worker gradient accumulator. Tracks which rows/segments were touched so
// merging and clearing cost O(touched), not O(all parameters). Merging into
// the tape in fixed worker order keeps accumulation deterministic.
class GradBuffer {
 public:
  explicit GradBuffer(const Tape& tape)
      : tape_(&tape), g_(tape.size(), 0.0), seg_dense_(tape.num_segments(), 0) {
    row_mark_.resize(tape.num_segments());
    rows_touched_.resize(tape.num_segments());
    for (size_t i = 0; i < tape.num_segments(); ++i) {
      const auto& s = tape.seg(static_cast<int>(i));
      if (s.row_len > 0) row_mark_[i].assign(s.size / s.row_len, 0);
    }
  }

  // Gradient slot for one row of a row-addressed segment.
  double* row(int seg_id, uint32_t row_idx) {
    const auto& s = tape_->seg(seg_id);
    auto& mark = row_mark_[static_cast<size_t>(seg_id)];
    if (!mark[row_idx]) {
      mark[row_idx] = 1;
      rows_touched_[static_cast<size_t>(seg_id)].push_back(row_idx);
    }
    return g_.data() + s.offset + static_cast<size_t>(row_idx) * s.row_len;
  }

  // Gradient slots for a whole dense segment.
  double* dense(int seg_id) {
    const auto& s = tape_->seg(seg_id);
    if (s.row_len != 0) throw std::runtime_error("dense() on row segment " + s.name);
    seg_dense_[static_cast<size_t>(seg_id)] = 1;
    return g_.data() + s.offset;
  }

  void merge_into(Tape& tape) const {
    double* dst = tape.grads();
    for (size_t i = 0; i < tape.num_segments(); ++i) {
      const auto& s = tape.seg(static_cast<int>(i));
      if (seg_dense_[i]) {
        const double* src = g_.data() + s.offset;
        double* out = dst + s.offset;
        for (size_t k = 0; k < s.size; ++k) out[k] += src[k];
      }
      for (uint32_t r : rows_touched_[i]) {
        const double* src = g_.data() + s.offset + static_cast<size_t>(r) * s.row_len;
        double* out = dst + s.offset + static_cast<size_t>(r) * s.row_len;
        for (uint32_t k = 0; k < s.row_len; ++k) out[k] += src[k];
      }
    }
  }

  void clear() {
    for (size_t i = 0; i < tape_->num_segments(); ++i) {
      const auto& s = tape_->seg(static_cast<int>(i));
      if (seg_dense_[i]) {
        std::fill(g_.begin() + s.offset, g_.begin() + s.offset + s.size, 0.0);
        seg_dense_[i] = 0;
      }
      for (uint32_t r : rows_touched_[i]) {
        double* p = g_.data() + s.offset + static_cast<size_t>(r) * s.row_len;
        std::fill(p, p + s.row_len, 0.0);
        row_mark_[i][r] = 0;
      }
      rows_touched_[i].clear();
    }
  }

 private:
  const Tape* tape_;
  std::vector<double> g_;
  std::vector<uint8_t> seg_dense_;
  std::vector<std::vector<uint8_t>> row_mark_;
  std::vector<std::vector<uint32_t>> rows_touched_;
};

// ---- checkpoint io (tape.cpp) ----

struct CheckpointData {
  uint64_t iteration = 0;
  std::string config_json;
  std::vector<SegmentInfo> segments;
  std::vector<double> values;
};

// Binary format (little-endian), documented in README:
//   magic "TNRFCKP1" | u32 version | u64 iteration | u64 cfg_len | cfg bytes
//   | u64 nseg | per-seg {u32 name_len, name, u64 offset, u64 size,
//   u32 row_len, u32 class} | u64 nvalues | f64 raw values | u64 fnv1a
void save_checkpoint(const std::string& path, const Tape& tape,
                     const std::string& config_json, uint64_t iteration);
CheckpointData load_checkpoint(const std::string& path);

// Restores values into a tape whose layout must match the checkpoint exactly.
void restore_into(Tape& tape, const CheckpointData& ck);

}  // namespace tinerf
