#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tinerf/adam.hpp"
#include "tinerf/dataset.hpp"
#include "tinerf/field.hpp"
#include "tinerf/occupancy.hpp"
#include "tinerf/renderer.hpp"

// Training loop. Each iteration draws rays uniformly over (frame, pixel),
// builds one autodiff graph per ray, backpropagates the color loss plus the
// weighted temporal-smoothness loss, and applies one Adam step. Worker
// gradients merge in fixed chunk order, every random draw is counter-keyed,
// and the metrics log can omit wall-clock times, so two runs with the same
// config, seed and thread count produce bit-identical checkpoints and logs.

namespace tinerf {

struct TrainConfig {
  uint64_t iterations = 1000;
  int rays_per_batch = 128;
  // Smoothness weight; negative selects the per-representation default
  // (grid 1e-4, neural 1e-2).
  double lambda_smooth = -1.0;
  uint64_t seed = 1;
  int threads = 1;
  LrSchedule lr;

  int n_coarse = 64;      // neural stratified samples per ray
  int n_fine = 64;        // neural importance samples per ray
  int march_steps = 128;  // grid fixed-step count across the scene box
  double bg[3] = {1.0, 1.0, 1.0};
  // Replace the background with a random color per training ray (ground truth
  // is recomposited over the same color via its alpha). Fog that merely
  // matches a fixed background is free; against a random one it costs, so
  // empty space is actively driven transparent and occupancy culling bites.
  // Evaluation always renders over the fixed `bg`.
  bool bg_jitter = false;
  bool use_occupancy = true;  // grid path; neural path never culls
  OccupancyConfig occ;
  // Grid levels carrying the smoothness term; empty selects the two levels
  // with the finest temporal resolution (the last two).
  std::vector<int> smooth_levels;

  uint64_t log_every = 50;  // metrics rows; 0 logs only the final iteration
  uint64_t eval_every = 0;  // held-out snapshot cadence; 0 = final eval only
  int eval_limit = -1;      // test frames per snapshot, -1 = all
  bool save_eval_pngs = true;
  bool log_timing = true;  // false zeroes the wall-clock column (bit-stable logs)
  std::string out_dir = "out";
  std::string run_config_json = "{}";  // embedded verbatim in the checkpoint

  double lambda_for(Representation rep) const {
    if (lambda_smooth >= 0.0) return lambda_smooth;
    return rep == Representation::grid ? 1e-4 : 1e-2;
  }
  void validate() const;
};

struct TrainResult {
  uint64_t iterations = 0;
  double loss_color = 0.0;   // last batch
  double loss_smooth = 0.0;  // last batch (unweighted)
  double loss_total = 0.0;
  double eval_psnr = 0.0;  // last eval pass; NaN when never evaluated
  double eval_ssim = 0.0;
  uint64_t rejected_steps = 0;
  uint64_t smooth_skipped_rays = 0;  // neural rays sourced from the last frame
  uint64_t train_samples = 0;        // field evaluations inside training batches
  uint64_t culled_samples = 0;       // grid march points skipped by occupancy
  double occupied_fraction = -1.0;
  std::string checkpoint_path;
  std::string metrics_path;
};

// Seed scoping an eval render of one held-out frame; command-line renders use
// the same derivation so a restored checkpoint reproduces training snapshots
// bit for bit.
uint64_t eval_seed(uint64_t train_seed, int test_frame);

// Rendering options matching what training evals use for this dataset/config.
RenderOptions render_options(const SceneDataset& ds, const TrainConfig& cfg,
                             const OccupancyGrid* occ, double alpha_x,
                             double alpha_z);

// Runs the full loop: parameter init, iterations, periodic occupancy sweeps
// and eval snapshots, metrics CSV (iteration, wall-clock ms, color loss,
// smoothness loss, lr, eval PSNR), final checkpoint. `occ` may be null (and
// is ignored on the neural path). A non-finite loss aborts with a diagnostic
// dump under out_dir. With iterations = 0 the checkpoint holds the untouched
// initialization.
TrainResult train_model(Tape& tape, FieldModel& model, OccupancyGrid* occ,
                        const SceneDataset& train_set, const SceneDataset* test_set,
                        const TrainConfig& cfg);

}  // namespace tinerf
