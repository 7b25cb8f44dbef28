#include "tinerf/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tinerf/encoding.hpp"
#include "tinerf/graph.hpp"
#include "tinerf/losses.hpp"
#include "tinerf/metrics.hpp"
#include "tinerf/sampling.hpp"

namespace tinerf {

void TrainConfig::validate() const {
  if (rays_per_batch < 1)
    throw std::invalid_argument("train: rays_per_batch must be >= 1");
  if (threads < 1) throw std::invalid_argument("train: threads must be >= 1");
  if (n_coarse < 1) throw std::invalid_argument("train: n_coarse must be >= 1");
  if (n_fine < 0) throw std::invalid_argument("train: n_fine must be >= 0");
  if (march_steps < 1) throw std::invalid_argument("train: march_steps must be >= 1");
  for (double c : bg)
    if (!(c >= 0.0 && c <= 1.0))
      throw std::invalid_argument("train: background color outside [0,1]");
  if (out_dir.empty()) throw std::invalid_argument("train: out_dir empty");
}

uint64_t eval_seed(uint64_t train_seed, int test_frame) {
  return mix_seed(train_seed, 0x6576616cull, static_cast<uint64_t>(test_frame));
}

RenderOptions render_options(const SceneDataset& ds, const TrainConfig& cfg,
                             const OccupancyGrid* occ, double alpha_x,
                             double alpha_z) {
  RenderOptions opt;
  for (int i = 0; i < 3; ++i) {
    opt.aabb_lo[i] = ds.aabb_lo[i];
    opt.aabb_hi[i] = ds.aabb_hi[i];
    opt.bg[i] = cfg.bg[i];
  }
  opt.near = ds.near_clip;
  opt.far = ds.far_clip;
  opt.n_coarse = cfg.n_coarse;
  opt.n_fine = cfg.n_fine;
  opt.march_steps = cfg.march_steps;
  opt.occ = occ;
  opt.alpha_x = alpha_x;
  opt.alpha_z = alpha_z;
  return opt;
}

namespace {

// Per-worker arenas; graphs and gradient buffers keep their capacity across
// rays so steady-state iterations allocate nothing.
struct Worker {
  Graph g;
  GradBuffer gbuf;
  std::vector<int> sig_ids, rgb_ids;
  std::vector<SamplePoint> pts;
  std::vector<double> du, uu, weights;
  std::vector<Graph::Seed> seeds;
  double lc = 0.0, ls = 0.0;  // batch partial sums
  uint64_t samples = 0, culled = 0, skipped = 0;
  explicit Worker(Tape& t) : g(t), gbuf(t) {}
};

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

TrainResult train_model(Tape& tape, FieldModel& model, OccupancyGrid* occ,
                        const SceneDataset& train_set, const SceneDataset* test_set,
                        const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.n_frames() == 0)
    throw std::invalid_argument("train: empty training set");
  const bool grid_path = model.rep() == Representation::grid;
  if (!grid_path) occ = nullptr;
  const double lambda = cfg.lambda_for(model.rep());

  // Smoothness level set: default is the two levels with the finest temporal
  // resolution (resolution grows with level index, so the last two).
  std::vector<int> slevels = cfg.smooth_levels;
  if (grid_path) {
    int nl = model.config().grid.levels;
    if (slevels.empty()) {
      if (nl >= 2)
        slevels = {nl - 2, nl - 1};
      else
        slevels = {0};
    }
    for (int l : slevels)
      if (l < 0 || l >= nl)
        throw std::invalid_argument("train: smoothness level out of range");
  } else {
    slevels.clear();
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const bool evals_possible = test_set && test_set->n_frames() > 0;
  if (evals_possible && cfg.save_eval_pngs)
    fs::create_directories(cfg.out_dir + "/renders");

  model.init_params(tape, cfg.seed);

  // Supervision targets: ground truth composited over the training
  // background, or kept with alpha so bg_jitter can recomposite per ray.
  std::vector<Image> gt;
  std::vector<Camera> cams;
  gt.reserve(train_set.frames.size());
  cams.reserve(train_set.frames.size());
  for (int f = 0; f < train_set.n_frames(); ++f) {
    Image img = train_set.frames[static_cast<size_t>(f)].image;
    if (cfg.bg_jitter && !img.has_alpha())
      throw std::runtime_error(
          "train: bg_jitter needs alpha in the ground-truth images");
    if (img.has_alpha() && !cfg.bg_jitter) composite_over(img, cfg.bg);
    gt.push_back(std::move(img));
    cams.push_back(train_set.camera(f));
  }

  const int width = train_set.width, height = train_set.height;
  const uint64_t n_pix = static_cast<uint64_t>(width) * height;
  const int n_frames = train_set.n_frames();
  const double inv_nf2 = 1.0 / (static_cast<double>(n_frames) * n_frames);
  const size_t batch = static_cast<size_t>(cfg.rays_per_batch);
  const double inv_b = 1.0 / static_cast<double>(batch);
  // Nominal smoothness batch size on the neural path: every merged fine
  // sample of every ray. Last-frame rays are skipped but keep the nominal
  // normalization, so the term stays a deterministic function of the batch.
  const double inv_smooth =
      1.0 / (static_cast<double>(batch) * (cfg.n_coarse + cfg.n_fine));

  const int x_bands = model.config().bank.posenc_x_bands;
  const int z_bands = model.config().bank.posenc_z_bands;
  const double ramp = model.config().posenc_ramp_frac;
  auto alpha_x_at = [&](uint64_t it) {
    return grid_path ? 1e9 : posenc_alpha(it, cfg.iterations, x_bands, ramp);
  };
  auto alpha_z_at = [&](uint64_t it) {
    return grid_path ? 1e9 : posenc_alpha(it, cfg.iterations, z_bands, ramp);
  };

  const RenderOptions opt = render_options(train_set, cfg, occ, 1e9, 1e9);

  ThreadPool pool(cfg.threads);
  std::vector<Worker> workers;
  workers.reserve(static_cast<size_t>(pool.workers()));
  for (int c = 0; c < pool.workers(); ++c) workers.emplace_back(tape);

  Adam adam(tape, AdamConfig{});

  TrainResult res;
  res.iterations = cfg.iterations;
  res.eval_psnr = std::numeric_limits<double>::quiet_NaN();
  res.eval_ssim = std::numeric_limits<double>::quiet_NaN();
  res.metrics_path = cfg.out_dir + "/metrics.csv";
  res.checkpoint_path = cfg.out_dir + "/checkpoint.bin";

  std::ofstream metrics(res.metrics_path);
  if (!metrics) throw std::runtime_error("train: cannot write " + res.metrics_path);
  metrics << "iteration,wall_ms,loss_color,loss_smooth,lr,eval_psnr\n";

  const HashGridSet* hgrid = model.grid();
  const KeyframeBank* bank = model.bank();
  const uint32_t m_s = grid_path ? static_cast<uint32_t>(model.config().grid.m_s) : 0;
  const uint32_t m_d = grid_path ? static_cast<uint32_t>(model.config().grid.m_d) : 0;

  // One ray: draw (frame, pixel), build the graph, accumulate losses and
  // seed the backward sweep into this worker's gradient buffer.
  auto run_ray = [&](Worker& w, uint64_t it, uint64_t r, double ax, double az) {
    Rng spec(cfg.seed, RngStream::ray_pixel, it, r);
    const int frame = static_cast<int>(spec.below(static_cast<uint64_t>(n_frames)));
    const uint64_t pix = spec.below(n_pix);
    const int px = static_cast<int>(pix % static_cast<uint64_t>(width));
    const int py = static_cast<int>(pix / static_cast<uint64_t>(width));
    const double* gtp = gt[static_cast<size_t>(frame)].px(px, py);
    const double t = train_set.frames[static_cast<size_t>(frame)].time;
    const TimeContext tc = TimeContext::at_frame(frame, t);

    // Per-ray background and the ground-truth pixel composited over it. The
    // jitter draws come after (frame, pixel), so runs without jitter consume
    // the identical stream they always did.
    double bgc[3] = {cfg.bg[0], cfg.bg[1], cfg.bg[2]};
    double gtpix[3] = {gtp[0], gtp[1], gtp[2]};
    if (cfg.bg_jitter) {
      for (double& c : bgc) c = spec.uniform();
      const Image& gimg = gt[static_cast<size_t>(frame)];
      double a = gimg.alpha[static_cast<size_t>(py) * width + px];
      for (int c = 0; c < 3; ++c) gtpix[c] = gtp[c] * a + bgc[c] * (1.0 - a);
    }

    Ray ray = make_ray(cams[static_cast<size_t>(frame)], px, py);
    double u0, u1;
    if (!clip_ray(ray, opt, &u0, &u1)) {
      // Ray misses the scene box: the prediction is exactly the background.
      w.lc += feature_sqdiff(bgc, gtpix, 3);
      return;
    }

    double sh[kShDim];
    sh16(ray.dir, sh);
    Graph& g = w.g;
    g.reset();
    w.seeds.clear();
    w.sig_ids.clear();
    w.rgb_ids.clear();
    w.du.clear();
    w.uu.clear();
    const int enc_dir = g.constant(sh, kShDim);

    if (grid_path) {
      w.pts.clear();
      march_ray(ray, u0, u1, opt, w.pts);
      w.culled += static_cast<uint64_t>(cfg.march_steps) - w.pts.size();
      if (w.pts.empty()) {
        w.lc += feature_sqdiff(bgc, gtpix, 3);
        return;
      }
      for (const SamplePoint& s : w.pts) {
        double p[3] = {ray.origin[0] + s.u * ray.dir[0],
                       ray.origin[1] + s.u * ray.dir[1],
                       ray.origin[2] + s.u * ray.dir[2]};
        double xu[3];
        to_unit_cube(opt, p, xu);
        auto sn = model.sample_node(g, xu, tc, enc_dir, ax, az, true);
        w.sig_ids.push_back(sn.sigma);
        w.rgb_ids.push_back(sn.rgb);
        w.du.push_back(s.du);
        w.uu.push_back(s.u);
        if (lambda > 0.0) {
          for (int l : slevels) {
            auto c4 = hgrid->corners_4d(xu, t, l);
            const int seg = hgrid->level_segment(l);
            for (int k = 0; k < 8; ++k) {
              int sd = g.row_sqdiff(seg, c4.idx_a[k], c4.idx_b[k], m_s, m_d);
              w.ls += g.value(sd)[0] * inv_nf2;
              w.seeds.push_back({sd, lambda * inv_nf2});
            }
          }
        }
      }
      const int n = static_cast<int>(w.pts.size());
      w.samples += w.pts.size();
      int comp = g.composite(w.sig_ids.data(), w.rgb_ids.data(), n, w.du.data(),
                             w.uu.data());
      int over = g.composite_over_bg(comp, bgc);
      int err = g.sq_err(over, gtpix);
      w.lc += g.value(err)[0];
      w.seeds.push_back({err, inv_b});
    } else {
      // Coarse stratified pass.
      Rng srng(cfg.seed, RngStream::stratified, it, r);
      std::vector<SamplePoint> coarse = stratified_samples(u0, u1, cfg.n_coarse, srng);
      std::vector<double> coarse_u;
      coarse_u.reserve(coarse.size());
      for (const SamplePoint& s : coarse) {
        double p[3] = {ray.origin[0] + s.u * ray.dir[0],
                       ray.origin[1] + s.u * ray.dir[1],
                       ray.origin[2] + s.u * ray.dir[2]};
        double xu[3];
        to_unit_cube(opt, p, xu);
        auto sn = model.sample_node(g, xu, tc, enc_dir, ax, az, false);
        w.sig_ids.push_back(sn.sigma);
        w.rgb_ids.push_back(sn.rgb);
        w.du.push_back(s.du);
        w.uu.push_back(s.u);
        coarse_u.push_back(s.u);
      }
      int comp_c = g.composite(w.sig_ids.data(), w.rgb_ids.data(),
                               static_cast<int>(coarse.size()), w.du.data(),
                               w.uu.data());
      int over_c = g.composite_over_bg(comp_c, bgc);
      int err_c = g.sq_err(over_c, gtpix);
      w.seeds.push_back({err_c, inv_b});

      // Importance-resampled fine pass through the second template.
      g.composite_weights(comp_c, w.weights);
      Rng irng(cfg.seed, RngStream::importance, it, r);
      std::vector<SamplePoint> fine =
          importance_samples(u0, u1, coarse_u, w.weights, cfg.n_fine, irng);

      const bool smooth_ray = lambda > 0.0 && n_frames > 1;
      const bool has_next = frame + 1 < n_frames;
      if (smooth_ray && !has_next) ++w.skipped;
      int enc_z_next = -1;
      double t_next = 0.0;
      if (smooth_ray && has_next) {
        enc_z_next = bank->posenc_z_node(g, frame + 1, az);
        t_next = train_set.frames[static_cast<size_t>(frame) + 1].time;
      }

      w.sig_ids.clear();
      w.rgb_ids.clear();
      w.du.clear();
      w.uu.clear();
      for (const SamplePoint& s : fine) {
        double p[3] = {ray.origin[0] + s.u * ray.dir[0],
                       ray.origin[1] + s.u * ray.dir[1],
                       ray.origin[2] + s.u * ray.dir[2]};
        double xu[3];
        to_unit_cube(opt, p, xu);
        auto sn = model.sample_node(g, xu, tc, enc_dir, ax, az, true);
        w.sig_ids.push_back(sn.sigma);
        w.rgb_ids.push_back(sn.rgb);
        w.du.push_back(s.du);
        w.uu.push_back(s.u);
        if (enc_z_next >= 0) {
          int vnext = bank->dynamic_node(g, sn.enc_x, enc_z_next, t_next);
          int sd = g.sqdiff(sn.vdyn, vnext);
          w.ls += g.value(sd)[0] * inv_smooth;
          w.seeds.push_back({sd, lambda * inv_smooth});
        }
      }
      int comp_f = g.composite(w.sig_ids.data(), w.rgb_ids.data(),
                               static_cast<int>(fine.size()), w.du.data(),
                               w.uu.data());
      int over_f = g.composite_over_bg(comp_f, bgc);
      int err_f = g.sq_err(over_f, gtpix);
      w.seeds.push_back({err_f, inv_b});
      w.lc += g.value(err_c)[0] + g.value(err_f)[0];
      w.samples += coarse.size() + fine.size();
    }
    g.backward(w.seeds.data(), static_cast<int>(w.seeds.size()), w.gbuf);
  };

  auto run_eval = [&](uint64_t snapshot_it) -> std::pair<double, double> {
    const int avail = test_set->n_frames();
    const int count =
        cfg.eval_limit < 0 ? avail : std::min(cfg.eval_limit, avail);
    RenderOptions eopt = render_options(*test_set, cfg, occ,
                                        alpha_x_at(snapshot_it), alpha_z_at(snapshot_it));
    double sp = 0.0, ss = 0.0;
    for (int f = 0; f < count; ++f) {
      const auto& fr = test_set->frames[static_cast<size_t>(f)];
      // Bracketing frames come from the training timeline — held-out times sit
      // between training keyframes.
      TimeContext tc = time_context(train_set, fr.time, model.rep());
      Camera cam = test_set->camera(f);
      Image ren = render_image(tape, model, cam, tc, eopt,
                               eval_seed(cfg.seed, f), &pool, nullptr);
      Image ref = fr.image;
      if (ref.has_alpha()) composite_over(ref, cfg.bg);
      sp += psnr(ren, ref);
      ss += ssim(ren, ref);
      if (cfg.save_eval_pngs) {
        char name[64];
        std::snprintf(name, sizeof name, "/renders/it%06llu_f%02d.png",
                      static_cast<unsigned long long>(snapshot_it), f);
        write_png(ren, cfg.out_dir + name);
      }
    }
    return {sp / count, ss / count};
  };

  const auto t_start = std::chrono::steady_clock::now();
  auto wall_ms = [&]() -> uint64_t {
    if (!cfg.log_timing) return 0;
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - t_start)
                                     .count());
  };

  for (uint64_t it = 0; it < cfg.iterations; ++it) {
    if (occ && it % static_cast<uint64_t>(occ->config().update_every) == 0) {
      occ->update(
          [&](const double x[3], double tt) {
            return model.sigma_raw(tape, x, tt, 1e9, 1e9);
          },
          cfg.seed, &pool);
    }

    const double ax = alpha_x_at(it), az = alpha_z_at(it);
    for (Worker& w : workers) w.lc = w.ls = 0.0;
    pool.for_chunks(batch, [&](int chunk, size_t b, size_t e) {
      Worker& w = workers[static_cast<size_t>(chunk)];
      for (size_t rr = b; rr < e; ++rr) run_ray(w, it, rr, ax, az);
    });

    double lc = 0.0, ls = 0.0;
    for (Worker& w : workers) {
      lc += w.lc;
      ls += w.ls;
      w.gbuf.merge_into(tape);
      w.gbuf.clear();
    }
    lc *= inv_b;
    const double total = total_loss(lc, ls, lambda);
    res.loss_color = lc;
    res.loss_smooth = ls;
    res.loss_total = total;

    const double lr_now = cfg.lr.at(it);
    if (!std::isfinite(total)) {
      const std::string dump = cfg.out_dir + "/nan_dump.txt";
      std::ofstream f(dump);
      f << "non-finite training loss\n"
        << "iteration " << it << "\nloss_color " << lc << "\nloss_smooth " << ls
        << "\nlambda " << lambda << "\nlr " << lr_now << "\n";
      for (const auto& s : tape.segments()) {
        size_t bad_v = 0, bad_g = 0;
        for (size_t i = 0; i < s.size; ++i) {
          if (!std::isfinite(tape.values()[s.offset + i])) ++bad_v;
          if (!std::isfinite(tape.grads()[s.offset + i])) ++bad_g;
        }
        f << "segment " << s.name << ": " << bad_v << "/" << s.size
          << " non-finite values, " << bad_g << " non-finite grads\n";
      }
      metrics.flush();
      throw std::runtime_error("training diverged at iteration " +
                               std::to_string(it) + "; diagnostics in " + dump);
    }

    adam.step(tape, lr_now);

    bool did_eval = false;
    if (evals_possible && cfg.eval_every > 0 && (it + 1) % cfg.eval_every == 0 &&
        it + 1 != cfg.iterations) {
      auto [p, s] = run_eval(it + 1);
      res.eval_psnr = p;
      res.eval_ssim = s;
      did_eval = true;
    }
    const bool last = it + 1 == cfg.iterations;
    if (evals_possible && last) {
      auto [p, s] = run_eval(cfg.iterations);
      res.eval_psnr = p;
      res.eval_ssim = s;
      did_eval = true;
    }

    if (did_eval || last || (cfg.log_every > 0 && it % cfg.log_every == 0)) {
      metrics << it << ',' << wall_ms() << ',' << csv_num(lc) << ',' << csv_num(ls)
              << ',' << csv_num(lr_now) << ','
              << (did_eval ? csv_num(res.eval_psnr) : "") << '\n';
      metrics.flush();  // rows are rare; keep the file live for monitoring
    }
  }

  for (const Worker& w : workers) {
    res.train_samples += w.samples;
    res.culled_samples += w.culled;
    res.smooth_skipped_rays += w.skipped;
  }
  res.rejected_steps = adam.rejected_steps();
  res.occupied_fraction = occ ? occ->occupied_fraction() : -1.0;

  save_checkpoint(res.checkpoint_path, tape, cfg.run_config_json, cfg.iterations);
  return res;
}

}  // namespace tinerf
