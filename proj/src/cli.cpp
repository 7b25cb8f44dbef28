#include "tinerf/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tinerf/config.hpp"
#include "tinerf/dataset.hpp"
#include "tinerf/encoding.hpp"
#include "tinerf/metrics.hpp"
#include "tinerf/occupancy.hpp"
#include "tinerf/renderer.hpp"
#include "tinerf/synthetic.hpp"
#include "tinerf/train.hpp"

namespace tinerf {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t c = s.find(',', pos);
    if (c == std::string::npos) c = s.size();
    if (c > pos) out.push_back(s.substr(pos, c - pos));
    pos = c + 1;
  }
  return out;
}

std::string rep_name(Representation r) {
  return r == Representation::grid ? "grid" : "neural";
}

// A checkpoint plus everything needed to query it. Heap-allocated because the
// model and occupancy grid hold addresses into the tape.
struct RestoredRun {
  RunConfig rc;
  Tape tape;
  std::unique_ptr<FieldModel> model;
  std::unique_ptr<OccupancyGrid> occ;
  uint64_t iteration = 0;
  SceneDataset train_split;  // training timeline: brackets held-out times
  double alpha_x = 1e9, alpha_z = 1e9;
};

std::unique_ptr<RestoredRun> restore_run(const std::string& ck_path,
                                         const std::string& dataset_override,
                                         const std::string& rep_override) {
  CheckpointData ck = load_checkpoint(ck_path);
  auto r = std::make_unique<RestoredRun>();
  r->rc = parse_run_config(ck.config_json);
  if (!rep_override.empty() && rep_override != rep_name(r->rc.model.rep))
    throw std::runtime_error("checkpoint holds a " + rep_name(r->rc.model.rep) +
                             " model, not " + rep_override);
  if (!dataset_override.empty()) r->rc.dataset = dataset_override;
  if (r->rc.dataset.empty())
    throw std::runtime_error("checkpoint config has no dataset path; pass --dataset");
  r->train_split = load_dataset(r->rc.dataset, "train");
  r->model = std::make_unique<FieldModel>(r->tape, r->rc.model,
                                          r->train_split.n_frames());
  if (r->rc.model.rep == Representation::grid && r->rc.train.use_occupancy)
    r->occ = std::make_unique<OccupancyGrid>(r->tape, r->rc.train.occ);
  restore_into(r->tape, ck);
  if (r->occ) r->occ->refresh_bits();
  r->iteration = ck.iteration;
  if (r->rc.model.rep == Representation::neural) {
    const auto& b = r->rc.model.bank;
    r->alpha_x = posenc_alpha(r->iteration, r->rc.train.iterations, b.posenc_x_bands,
                              r->rc.model.posenc_ramp_frac);
    r->alpha_z = posenc_alpha(r->iteration, r->rc.train.iterations, b.posenc_z_bands,
                              r->rc.model.posenc_ramp_frac);
  }
  return r;
}

struct TrainArgs {
  std::string config, dataset, out, representation;
  uint64_t seed = 0, iters = 0;
  int threads = 0;
  double lambda = 0.0;
  bool seed_set = false, iters_set = false, threads_set = false, lambda_set = false;
};

int run_train(const TrainArgs& a) {
  RunConfig rc;
  if (a.representation.empty()) {
    if (!a.config.empty()) rc = load_run_config(a.config);
  } else {
    // The lr default is derived from the representation at parse time, so a
    // representation override re-parses with the key spliced in.
    nlohmann::json j = nlohmann::json::object();
    if (!a.config.empty()) {
      std::ifstream in(a.config);
      if (!in) throw std::runtime_error("config: cannot open " + a.config);
      j = nlohmann::json::parse(in);
    }
    j["representation"] = a.representation;
    rc = parse_run_config(j.dump());
  }
  if (!a.dataset.empty()) rc.dataset = a.dataset;
  if (!a.out.empty()) rc.train.out_dir = a.out;
  if (a.seed_set) rc.train.seed = a.seed;
  if (a.iters_set) rc.train.iterations = a.iters;
  if (a.threads_set) rc.train.threads = a.threads;
  if (a.lambda_set) rc.train.lambda_smooth = a.lambda;
  if (rc.dataset.empty())
    throw std::runtime_error("train: no dataset path (config key 'dataset' or --dataset)");
  rc.validate();

  SceneDataset train_set = load_dataset(rc.dataset, "train");
  SceneDataset test_set;
  const SceneDataset* test_ptr = nullptr;
  if (fs::exists(fs::path(rc.dataset) / "transforms_test.json")) {
    test_set = load_dataset(rc.dataset, "test");
    if (test_set.n_frames() > 0) test_ptr = &test_set;
  }

  fs::create_directories(rc.train.out_dir);
  const std::string echo = rc.to_json();
  {
    std::ofstream f(rc.train.out_dir + "/config.json");
    f << echo;
  }
  rc.train.run_config_json = echo;

  Tape tape;
  FieldModel model(tape, rc.model, train_set.n_frames());
  std::unique_ptr<OccupancyGrid> occ;
  if (rc.model.rep == Representation::grid && rc.train.use_occupancy)
    occ = std::make_unique<OccupancyGrid>(tape, rc.train.occ);

  TrainResult res = train_model(tape, model, occ.get(), train_set, test_ptr, rc.train);
  std::printf("trained %llu iterations (%s path)\n",
              static_cast<unsigned long long>(res.iterations),
              rep_name(rc.model.rep).c_str());
  std::printf("  loss_color %.6g  loss_smooth %.6g\n", res.loss_color, res.loss_smooth);
  if (std::isfinite(res.eval_psnr))
    std::printf("  held-out PSNR %.3f dB  SSIM %.4f\n", res.eval_psnr, res.eval_ssim);
  if (res.rejected_steps > 0)
    std::printf("  rejected %llu non-finite steps\n",
                static_cast<unsigned long long>(res.rejected_steps));
  std::printf("  checkpoint %s\n  metrics %s\n", res.checkpoint_path.c_str(),
              res.metrics_path.c_str());
  return 0;
}

struct RenderArgs {
  std::string checkpoint, dataset, split = "test", out = "renders";
  std::string frames, times, representation;
  bool frames_set = false, times_set = false;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool threads_set = false;
};

int run_render(const RenderArgs& a) {
  auto run = restore_run(a.checkpoint, a.dataset, a.representation);
  SceneDataset poses = a.split == "train" ? run->train_split
                                          : load_dataset(run->rc.dataset, a.split);

  std::vector<int> frames;
  if (a.frames_set) {
    for (const std::string& tok : split_list(a.frames)) frames.push_back(std::stoi(tok));
  } else {
    for (int f = 0; f < poses.n_frames(); ++f) frames.push_back(f);
  }
  std::vector<double> times;
  if (a.times_set) {
    for (const std::string& tok : split_list(a.times)) times.push_back(std::stod(tok));
    if (times.empty()) return 0;  // explicit empty time list: nothing to do
    if (frames.size() != 1 && frames.size() != times.size())
      throw std::runtime_error(
          "render: --times needs one --frames entry or one frame per time");
  }
  if (frames.empty()) return 0;
  for (int f : frames)
    if (f < 0 || f >= poses.n_frames())
      throw std::runtime_error("render: frame " + std::to_string(f) +
                               " outside split of " + std::to_string(poses.n_frames()));

  const uint64_t seed = a.seed_set ? a.seed : run->rc.train.seed;
  ThreadPool pool(a.threads_set ? a.threads : run->rc.train.threads);
  RenderOptions opt = render_options(poses, run->rc.train, run->occ.get(),
                                     run->alpha_x, run->alpha_z);
  fs::create_directories(a.out);

  const size_t count = a.times_set ? times.size() : frames.size();
  for (size_t i = 0; i < count; ++i) {
    const int f = frames[frames.size() == 1 ? 0 : i];
    const double t = a.times_set ? times[i] : poses.frames[static_cast<size_t>(f)].time;
    TimeContext tc = time_context(run->train_split, t, run->rc.model.rep);
    Camera cam = poses.camera(f);
    Image img = render_image(run->tape, *run->model, cam, tc, opt,
                             eval_seed(seed, f), &pool, nullptr);
    char name[80];
    if (a.times_set)
      std::snprintf(name, sizeof name, "/r_%03d_t%08.6f.png", f, t);
    else
      std::snprintf(name, sizeof name, "/r_%03d.png", f);
    write_png(img, a.out + name);
    std::printf("wrote %s%s\n", a.out.c_str(), name);
  }
  return 0;
}

struct EvalArgs {
  std::string checkpoint, dataset, split = "test", out = "eval_out";
  std::string representation;
  uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool threads_set = false;
};

int run_eval(const EvalArgs& a) {
  auto run = restore_run(a.checkpoint, a.dataset, a.representation);
  SceneDataset ds = a.split == "train" ? run->train_split
                                       : load_dataset(run->rc.dataset, a.split);
  if (ds.n_frames() == 0) throw std::runtime_error("eval: split '" + a.split + "' is empty");

  const uint64_t seed = a.seed_set ? a.seed : run->rc.train.seed;
  ThreadPool pool(a.threads_set ? a.threads : run->rc.train.threads);
  RenderOptions opt = render_options(ds, run->rc.train, run->occ.get(), run->alpha_x,
                                     run->alpha_z);

  fs::create_directories(a.out);
  const std::string csv_path = a.out + "/eval_" + a.split + ".csv";
  std::ofstream csv(csv_path);
  csv << "frame,file,time,psnr,ssim\n";
  double sp = 0.0, ss = 0.0;
  for (int f = 0; f < ds.n_frames(); ++f) {
    const auto& fr = ds.frames[static_cast<size_t>(f)];
    TimeContext tc = time_context(run->train_split, fr.time, run->rc.model.rep);
    Image img = render_image(run->tape, *run->model, ds.camera(f), tc, opt,
                             eval_seed(seed, f), &pool, nullptr);
    Image ref = fr.image;
    if (ref.has_alpha()) composite_over(ref, opt.bg);
    const double p = psnr(img, ref), s = ssim(img, ref);
    sp += p;
    ss += s;
    char row[256];
    std::snprintf(row, sizeof row, "%d,%s,%.17g,%.17g,%.17g\n", f,
                  fr.file_path.c_str(), fr.time, p, s);
    csv << row;
  }
  const double mp = sp / ds.n_frames(), ms = ss / ds.n_frames();
  char mean_row[128];
  std::snprintf(mean_row, sizeof mean_row, "mean,,,%.17g,%.17g\n", mp, ms);
  csv << mean_row;
  std::printf("eval %s: %d frames, mean PSNR %.3f dB, mean SSIM %.4f\n",
              a.split.c_str(), ds.n_frames(), mp, ms);
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

struct SynthArgs {
  SynthConfig cfg;
  std::string out = "data";
  std::string test_frames;
  bool test_frames_set = false;
};

int run_synth(SynthArgs a) {
  if (a.test_frames_set) {
    a.cfg.test_frames.clear();
    for (const std::string& tok : split_list(a.test_frames))
      a.cfg.test_frames.push_back(std::stoi(tok));
  }
  generate_dataset(a.cfg, a.out);
  std::printf("wrote %s scene '%s': %d frames (%zu held out), %dx%d\n", a.out.c_str(),
              a.cfg.scene.c_str(), a.cfg.n_frames, a.cfg.test_frames.size(),
              a.cfg.width, a.cfg.height);
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"dynamic radiance fields via temporal feature interpolation"};
  app.require_subcommand(1);

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "fit a model to a dataset");
  train->add_option("--config", ta.config, "JSON run config")->envname("TINERF_CONFIG");
  train->add_option("--dataset", ta.dataset, "dataset root")->envname("TINERF_DATASET");
  train->add_option("--out", ta.out, "output directory")->envname("TINERF_OUT");
  train->add_option("--seed", ta.seed, "RNG seed")->envname("TINERF_SEED");
  train->add_option("--threads", ta.threads, "worker threads")->envname("TINERF_THREADS");
  train->add_option("--representation", ta.representation, "grid | neural");
  train->add_option("--lambda", ta.lambda, "smoothness weight");
  train->add_option("--iters", ta.iters, "training iterations");

  RenderArgs ra;
  CLI::App* render = app.add_subcommand("render", "render views from a checkpoint");
  render->add_option("--checkpoint", ra.checkpoint, "checkpoint file")->required();
  render->add_option("--dataset", ra.dataset, "dataset root override");
  render->add_option("--split", ra.split, "pose source split (default test)");
  render->add_option("--out", ra.out, "output directory");
  render->add_option("--frames", ra.frames, "comma list of frame indices");
  render->add_option("--times", ra.times, "comma list of query times");
  render->add_option("--seed", ra.seed, "base render seed (default: training seed)");
  render->add_option("--threads", ra.threads, "worker threads")->envname("TINERF_THREADS");
  render->add_option("--representation", ra.representation, "expected representation");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "PSNR/SSIM a checkpoint against a split");
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint file")->required();
  eval->add_option("--dataset", ea.dataset, "dataset root override");
  eval->add_option("--split", ea.split, "evaluation split (default test)");
  eval->add_option("--out", ea.out, "output directory");
  eval->add_option("--seed", ea.seed, "base render seed (default: training seed)");
  eval->add_option("--threads", ea.threads, "worker threads")->envname("TINERF_THREADS");
  eval->add_option("--representation", ea.representation, "expected representation");

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "generate an analytic dataset");
  synth->add_option("--scene", sa.cfg.scene, "blob-bounce | split-merge | corner-flash");
  synth->add_option("--out", sa.out, "dataset root to write");
  synth->add_option("--width", sa.cfg.width, "image width");
  synth->add_option("--height", sa.cfg.height, "image height");
  synth->add_option("--frames", sa.cfg.n_frames, "timeline length");
  synth->add_option("--test-frames", sa.test_frames, "comma list of held-out frames");
  synth->add_option("--oracle-samples", sa.cfg.oracle_samples, "quadrature samples");
  synth->add_option("--fov", sa.cfg.fov_deg, "horizontal fov, degrees");
  synth->add_option("--radius", sa.cfg.orbit_radius, "camera orbit radius");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) {
      ta.seed_set = train->count("--seed") > 0;
      ta.iters_set = train->count("--iters") > 0;
      ta.threads_set = train->count("--threads") > 0;
      ta.lambda_set = train->count("--lambda") > 0;
      return run_train(ta);
    }
    if (*render) {
      ra.frames_set = render->count("--frames") > 0;
      ra.times_set = render->count("--times") > 0;
      ra.seed_set = render->count("--seed") > 0;
      ra.threads_set = render->count("--threads") > 0;
      return run_render(ra);
    }
    if (*eval) {
      ea.seed_set = eval->count("--seed") > 0;
      ea.threads_set = eval->count("--threads") > 0;
      return run_eval(ea);
    }
    if (*synth) {
      sa.test_frames_set = synth->count("--test-frames") > 0;
      return run_synth(sa);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace tinerf
