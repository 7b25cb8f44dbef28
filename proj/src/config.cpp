#include "tinerf/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tinerf {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  for (const auto& kv : j.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (kv.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw std::runtime_error("config: unknown key '" + ctx + kv.key() + "'");
  }
}

template <class T>
T get_or(const json& j, const char* key, const std::string& ctx, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::runtime_error("config: bad value for '" + ctx + key + "': " + e.what());
  }
}

void read_vec3(const json& j, const char* key, const std::string& ctx, double out[3]) {
  if (!j.contains(key)) return;
  const json& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw std::runtime_error("config: '" + ctx + key + "' must be a 3-array");
  for (int i = 0; i < 3; ++i) out[i] = a[static_cast<size_t>(i)].get<double>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config: parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: top level must be an object");
  check_keys(j,
             {"representation", "dataset", "out", "seed", "threads", "iterations",
              "rays_per_batch", "lambda", "lr", "n_coarse", "n_fine", "march_steps",
              "bg", "bg_jitter", "use_occupancy", "occupancy", "smooth_levels",
              "log_every",
              "eval_every", "eval_limit", "save_eval_pngs", "log_timing", "grid",
              "bank", "template", "posenc_ramp_frac"},
             "");

  RunConfig rc;
  std::string rep = get_or<std::string>(j, "representation", "", "grid");
  if (rep == "grid")
    rc.model.rep = Representation::grid;
  else if (rep == "neural")
    rc.model.rep = Representation::neural;
  else
    throw std::runtime_error("config: representation must be 'grid' or 'neural'");

  rc.dataset = get_or<std::string>(j, "dataset", "", "");
  rc.train.out_dir = get_or<std::string>(j, "out", "", rc.train.out_dir);
  rc.train.seed = get_or<uint64_t>(j, "seed", "", rc.train.seed);
  rc.train.threads = get_or<int>(j, "threads", "", rc.train.threads);
  rc.train.iterations = get_or<uint64_t>(j, "iterations", "", rc.train.iterations);
  rc.train.rays_per_batch =
      get_or<int>(j, "rays_per_batch", "", rc.train.rays_per_batch);
  rc.train.lambda_smooth = get_or<double>(j, "lambda", "", rc.train.lambda_smooth);
  rc.train.n_coarse = get_or<int>(j, "n_coarse", "", rc.train.n_coarse);
  rc.train.n_fine = get_or<int>(j, "n_fine", "", rc.train.n_fine);
  rc.train.march_steps = get_or<int>(j, "march_steps", "", rc.train.march_steps);
  read_vec3(j, "bg", "", rc.train.bg);
  rc.train.bg_jitter = get_or<bool>(j, "bg_jitter", "", rc.train.bg_jitter);
  rc.train.use_occupancy =
      get_or<bool>(j, "use_occupancy", "", rc.train.use_occupancy);
  rc.train.smooth_levels =
      get_or<std::vector<int>>(j, "smooth_levels", "", rc.train.smooth_levels);
  rc.train.log_every = get_or<uint64_t>(j, "log_every", "", rc.train.log_every);
  rc.train.eval_every = get_or<uint64_t>(j, "eval_every", "", rc.train.eval_every);
  rc.train.eval_limit = get_or<int>(j, "eval_limit", "", rc.train.eval_limit);
  rc.train.save_eval_pngs =
      get_or<bool>(j, "save_eval_pngs", "", rc.train.save_eval_pngs);
  rc.train.log_timing = get_or<bool>(j, "log_timing", "", rc.train.log_timing);

  // Learning-rate schedule: staircase decay on the grid path, exponential
  // sweep over the whole run on the neural path.
  LrSchedule& lr = rc.train.lr;
  if (rc.model.rep == Representation::neural) {
    lr.kind = LrSchedule::Kind::exponential;
    lr.lr0 = 5e-4;
    lr.lr_end = 5e-5;
    lr.total = rc.train.iterations;
  }
  if (j.contains("lr")) {
    const json& lj = j.at("lr");
    check_keys(lj,
               {"kind", "lr0", "lr_end", "total", "decay_start", "decay_every",
                "decay_factor"},
               "lr.");
    std::string kind = get_or<std::string>(
        lj, "kind", "lr.",
        lr.kind == LrSchedule::Kind::staircase ? "staircase" : "exponential");
    if (kind == "staircase")
      lr.kind = LrSchedule::Kind::staircase;
    else if (kind == "exponential")
      lr.kind = LrSchedule::Kind::exponential;
    else
      throw std::runtime_error("config: lr.kind must be 'staircase' or 'exponential'");
    lr.lr0 = get_or<double>(lj, "lr0", "lr.", lr.lr0);
    lr.lr_end = get_or<double>(lj, "lr_end", "lr.", lr.lr_end);
    lr.total = get_or<uint64_t>(lj, "total", "lr.", lr.total);
    lr.decay_start = get_or<uint64_t>(lj, "decay_start", "lr.", lr.decay_start);
    lr.decay_every = get_or<uint64_t>(lj, "decay_every", "lr.", lr.decay_every);
    lr.decay_factor = get_or<double>(lj, "decay_factor", "lr.", lr.decay_factor);
  }

  if (j.contains("occupancy")) {
    const json& oj = j.at("occupancy");
    check_keys(oj, {"res", "decay", "threshold", "update_every", "warmup"},
               "occupancy.");
    OccupancyConfig& o = rc.train.occ;
    o.res = get_or<int>(oj, "res", "occupancy.", o.res);
    o.decay = get_or<double>(oj, "decay", "occupancy.", o.decay);
    o.threshold = get_or<double>(oj, "threshold", "occupancy.", o.threshold);
    o.update_every = get_or<int>(oj, "update_every", "occupancy.", o.update_every);
    o.warmup_sweeps = get_or<int>(oj, "warmup", "occupancy.", o.warmup_sweeps);
  }

  if (j.contains("grid")) {
    const json& gj = j.at("grid");
    check_keys(gj,
               {"levels", "table_size", "m_s", "m_d", "spatial_base", "spatial_scale",
                "temporal_base", "temporal_scale"},
               "grid.");
    HashGridConfig& g = rc.model.grid;
    g.levels = get_or<int>(gj, "levels", "grid.", g.levels);
    g.table_size = get_or<uint32_t>(gj, "table_size", "grid.", g.table_size);
    g.m_s = get_or<int>(gj, "m_s", "grid.", g.m_s);
    g.m_d = get_or<int>(gj, "m_d", "grid.", g.m_d);
    g.spatial_base = get_or<double>(gj, "spatial_base", "grid.", g.spatial_base);
    g.spatial_scale = get_or<double>(gj, "spatial_scale", "grid.", g.spatial_scale);
    g.temporal_base = get_or<double>(gj, "temporal_base", "grid.", g.temporal_base);
    g.temporal_scale =
        get_or<double>(gj, "temporal_scale", "grid.", g.temporal_scale);
  }

  if (j.contains("bank")) {
    const json& bj = j.at("bank");
    check_keys(bj,
               {"levels", "slots", "dims", "static_dim", "embed_dim",
                "posenc_x_bands", "posenc_z_bands"},
               "bank.");
    KeyframeBankConfig& b = rc.model.bank;
    b.levels = get_or<int>(bj, "levels", "bank.", b.levels);
    b.slots = get_or<std::vector<int>>(bj, "slots", "bank.", b.slots);
    b.dims = get_or<std::vector<int>>(bj, "dims", "bank.", b.dims);
    b.static_dim = get_or<int>(bj, "static_dim", "bank.", b.static_dim);
    b.embed_dim = get_or<int>(bj, "embed_dim", "bank.", b.embed_dim);
    b.posenc_x_bands = get_or<int>(bj, "posenc_x_bands", "bank.", b.posenc_x_bands);
    b.posenc_z_bands = get_or<int>(bj, "posenc_z_bands", "bank.", b.posenc_z_bands);
  }

  if (j.contains("template")) {
    const json& tj = j.at("template");
    check_keys(tj, {"layers", "hidden", "color_hidden", "skip_layer", "density_bias"},
               "template.");
    TemplateNerfConfig& t = rc.model.tmpl;
    t.layers = get_or<int>(tj, "layers", "template.", t.layers);
    t.hidden = get_or<int>(tj, "hidden", "template.", t.hidden);
    t.color_hidden = get_or<int>(tj, "color_hidden", "template.", t.color_hidden);
    t.skip_layer = get_or<int>(tj, "skip_layer", "template.", t.skip_layer);
    t.density_bias = get_or<double>(tj, "density_bias", "template.", t.density_bias);
  }

  rc.model.posenc_ramp_frac =
      get_or<double>(j, "posenc_ramp_frac", "", rc.model.posenc_ramp_frac);
  return rc;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

void RunConfig::validate() const {
  model.grid.validate();
  model.bank.validate();
  model.tmpl.validate();
  train.validate();
  if (!(model.posenc_ramp_frac >= 0.0 && model.posenc_ramp_frac <= 1.0))
    throw std::invalid_argument("config: posenc_ramp_frac outside [0,1]");
}

std::string RunConfig::to_json() const {
  json j;
  j["representation"] = model.rep == Representation::grid ? "grid" : "neural";
  j["dataset"] = dataset;
  j["out"] = train.out_dir;
  j["seed"] = train.seed;
  j["threads"] = train.threads;
  j["iterations"] = train.iterations;
  j["rays_per_batch"] = train.rays_per_batch;
  j["lambda"] = train.lambda_smooth;
  j["lr"] = {
      {"kind",
       train.lr.kind == LrSchedule::Kind::staircase ? "staircase" : "exponential"},
      {"lr0", train.lr.lr0},
      {"lr_end", train.lr.lr_end},
      {"total", train.lr.total},
      {"decay_start", train.lr.decay_start},
      {"decay_every", train.lr.decay_every},
      {"decay_factor", train.lr.decay_factor},
  };
  j["n_coarse"] = train.n_coarse;
  j["n_fine"] = train.n_fine;
  j["march_steps"] = train.march_steps;
  j["bg"] = {train.bg[0], train.bg[1], train.bg[2]};
  j["bg_jitter"] = train.bg_jitter;
  j["use_occupancy"] = train.use_occupancy;
  j["occupancy"] = {
      {"res", train.occ.res},
      {"decay", train.occ.decay},
      {"threshold", train.occ.threshold},
      {"update_every", train.occ.update_every},
      {"warmup", train.occ.warmup_sweeps},
  };
  j["smooth_levels"] = train.smooth_levels;
  j["log_every"] = train.log_every;
  j["eval_every"] = train.eval_every;
  j["eval_limit"] = train.eval_limit;
  j["save_eval_pngs"] = train.save_eval_pngs;
  j["log_timing"] = train.log_timing;
  j["grid"] = {
      {"levels", model.grid.levels},
      {"table_size", model.grid.table_size},
      {"m_s", model.grid.m_s},
      {"m_d", model.grid.m_d},
      {"spatial_base", model.grid.spatial_base},
      {"spatial_scale", model.grid.spatial_scale},
      {"temporal_base", model.grid.temporal_base},
      {"temporal_scale", model.grid.temporal_scale},
  };
  j["bank"] = {
      {"levels", model.bank.levels},
      {"slots", model.bank.slots},
      {"dims", model.bank.dims},
      {"static_dim", model.bank.static_dim},
      {"embed_dim", model.bank.embed_dim},
      {"posenc_x_bands", model.bank.posenc_x_bands},
      {"posenc_z_bands", model.bank.posenc_z_bands},
  };
  j["template"] = {
      {"layers", model.tmpl.layers},
      {"hidden", model.tmpl.hidden},
      {"color_hidden", model.tmpl.color_hidden},
      {"skip_layer", model.tmpl.skip_layer},
      {"density_bias", model.tmpl.density_bias},
  };
  j["posenc_ramp_frac"] = model.posenc_ramp_frac;
  return j.dump(2) + "\n";
}

}  // namespace tinerf
