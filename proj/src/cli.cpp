#include "tusla/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"
#include "tusla/bounds.hpp"
#include "tusla/data.hpp"
#include "tusla/empirics.hpp"
#include "tusla/optimizers.hpp"
#include "tusla/problems.hpp"

namespace tusla {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kInitSalt = 0x9E3779B97F4A7C15ULL;

// ------------------------------------------------------------ json access

[[noreturn]] void fail(const std::string& msg) { throw SchemaError(msg); }

void check_keys(const json& o, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
  if (!o.is_object()) fail(ctx + ": expected an object");
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(ctx + ": unknown key '" + it.key() + "'");
  }
}

const json* find(const json& o, const char* k) {
  auto it = o.find(k);
  return it == o.end() ? nullptr : &*it;
}

double jnum(const json& o, const char* k, const std::string& ctx) {
  const json* v = find(o, k);
  if (!v || !v->is_number()) fail(ctx + "." + k + ": expected a number");
  return v->get<double>();
}

double jnum_or(const json& o, const char* k, double dflt,
               const std::string& ctx) {
  const json* v = find(o, k);
  if (!v) return dflt;
  if (!v->is_number()) fail(ctx + "." + k + ": expected a number");
  return v->get<double>();
}

std::int64_t jint(const json& o, const char* k, const std::string& ctx) {
  const json* v = find(o, k);
  if (!v || !v->is_number_integer())
    fail(ctx + "." + k + ": expected an integer");
  return v->get<std::int64_t>();
}

std::int64_t jint_or(const json& o, const char* k, std::int64_t dflt,
                     const std::string& ctx) {
  const json* v = find(o, k);
  if (!v) return dflt;
  if (!v->is_number_integer()) fail(ctx + "." + k + ": expected an integer");
  return v->get<std::int64_t>();
}

std::size_t jsize(const json& o, const char* k, const std::string& ctx) {
  const std::int64_t v = jint(o, k, ctx);
  if (v < 0) fail(ctx + "." + k + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::size_t jsize_or(const json& o, const char* k, std::size_t dflt,
                     const std::string& ctx) {
  const std::int64_t v =
      jint_or(o, k, static_cast<std::int64_t>(dflt), ctx);
  if (v < 0) fail(ctx + "." + k + ": expected a non-negative integer");
  return static_cast<std::size_t>(v);
}

std::string jstr(const json& o, const char* k, const std::string& ctx) {
  const json* v = find(o, k);
  if (!v || !v->is_string()) fail(ctx + "." + k + ": expected a string");
  return v->get<std::string>();
}

std::string jstr_or(const json& o, const char* k, const std::string& dflt,
                    const std::string& ctx) {
  const json* v = find(o, k);
  if (!v) return dflt;
  if (!v->is_string()) fail(ctx + "." + k + ": expected a string");
  return v->get<std::string>();
}

bool jbool_or(const json& o, const char* k, bool dflt,
              const std::string& ctx) {
  const json* v = find(o, k);
  if (!v) return dflt;
  if (!v->is_boolean()) fail(ctx + "." + k + ": expected a boolean");
  return v->get<bool>();
}

const json& jobj(const json& o, const char* k, const std::string& ctx) {
  const json* v = find(o, k);
  if (!v || !v->is_object()) fail(ctx + "." + k + ": expected an object");
  return *v;
}

const json& jarr(const json& o, const char* k, const std::string& ctx) {
  const json* v = find(o, k);
  if (!v || !v->is_array()) fail(ctx + "." + k + ": expected an array");
  return *v;
}

Vec jvec(const json& a, const std::string& ctx) {
  if (a.is_number()) return Vec{a.get<double>()};
  if (!a.is_array()) fail(ctx + ": expected a number or an array of numbers");
  Vec out;
  out.reserve(a.size());
  for (const auto& e : a) {
    if (!e.is_number()) fail(ctx + ": expected numeric entries");
    out.push_back(e.get<double>());
  }
  return out;
}

// ------------------------------------------------------------- formatting

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const fs::path& p, const std::string& content) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + tmp.string());
  }
  fs::rename(tmp, p);
}

void write_json_atomic(const fs::path& p, const json& j) {
  write_file_atomic(p, j.dump(2) + "\n");
}

struct MeanStd {
  double mean = 0, stdev = 0;
  std::size_t n = 0;
};

MeanStd mean_std(const Vec& v) {
  MeanStd ms;
  ms.n = v.size();
  if (v.empty()) return ms;
  double s = 0;
  for (double x : v) s += x;
  ms.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double q = 0;
    for (double x : v) q += (x - ms.mean) * (x - ms.mean);
    ms.stdev = std::sqrt(q / static_cast<double>(v.size() - 1));
  }
  return ms;
}

// -------------------------------------------------------------- builders

std::shared_ptr<const DataLaw> build_law(const json& j,
                                         const std::string& ctx) {
  check_keys(j, {"kind", "dim"}, ctx);
  const std::string kind = jstr(j, "kind", ctx);
  if (kind == "beta22") return std::make_shared<Beta22Law>();
  if (kind == "std_normal") return std::make_shared<StdNormalLaw>();
  if (kind == "uniform01") return std::make_shared<Uniform01Law>();
  if (kind == "uniform_box")
    return std::make_shared<UniformBoxLaw>(jsize(j, "dim", ctx));
  fail(ctx + ".kind: unknown law '" + kind + "'");
}

std::shared_ptr<ArtificialProblem> build_artificial(const json& j,
                                                    const std::string& ctx) {
  check_keys(j, {"kind", "a1", "a2", "law"}, ctx);
  const double a1 = jnum_or(j, "a1", 2.0, ctx);
  const double a2 = jnum_or(j, "a2", 1.0, ctx);
  std::shared_ptr<const DataLaw> law;
  if (const json* l = find(j, "law"))
    law = build_law(*l, ctx + ".law");
  else
    law = std::make_shared<Beta22Law>();
  try {
    return std::make_shared<ArtificialProblem>(a1, a2, law);
  } catch (const std::invalid_argument& e) {
    fail(ctx + ": " + e.what());
  }
}

Activation act_from_string(const std::string& s, const std::string& ctx) {
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  if (s == "identity") return Activation::Identity;
  fail(ctx + ": unknown activation '" + s + "'");
}

std::shared_ptr<FeedForwardNet> build_ffn(const json& j,
                                          const std::string& ctx) {
  check_keys(j, {"kind", "in_dim", "layers", "loss", "eta", "r_reg"}, ctx);
  const std::size_t in_dim = jsize(j, "in_dim", ctx);
  std::vector<LayerSpec> layers;
  const json& la = jarr(j, "layers", ctx);
  for (std::size_t i = 0; i < la.size(); ++i) {
    const std::string lc = ctx + ".layers[" + std::to_string(i) + "]";
    check_keys(la[i], {"width", "act", "bias"}, lc);
    LayerSpec ls;
    ls.width = jsize(la[i], "width", lc);
    ls.act = act_from_string(jstr(la[i], "act", lc), lc + ".act");
    ls.bias = jbool_or(la[i], "bias", true, lc);
    layers.push_back(ls);
  }
  const std::string loss = jstr_or(j, "loss", "squared", ctx);
  LossKind lk;
  if (loss == "squared")
    lk = LossKind::Squared;
  else if (loss == "softmax_ce")
    lk = LossKind::SoftmaxCrossEntropy;
  else
    fail(ctx + ".loss: expected 'squared' or 'softmax_ce'");
  const double eta = jnum_or(j, "eta", 0.0, ctx);
  const double r_reg = jnum_or(j, "r_reg", 0.5, ctx);
  try {
    return std::make_shared<FeedForwardNet>(in_dim, std::move(layers), lk,
                                            eta, r_reg);
  } catch (const std::invalid_argument& e) {
    fail(ctx + ": " + e.what());
  }
}

double planted_target(const std::string& target, const double* z,
                      const std::string& ctx) {
  if (target == "planted1") {
    const double t = 2.0 * z[0] + 2.0 * z[1] - 1.5;
    return std::pow(std::abs(t), 3.0);
  }
  if (target == "planted2") {
    const double t = z[0] + 2.0 * z[1] - 1.0;
    return -(t * t);
  }
  fail(ctx + ": unknown synthetic target '" + target + "'");
}

Dataset make_synthetic(std::size_t n, std::size_t in_dim,
                       const std::string& target, std::uint64_t seed,
                       double test_fraction, const std::string& ctx) {
  if (in_dim < 2) fail(ctx + ": synthetic targets need in_dim >= 2");
  if (n == 0) fail(ctx + ": n must be positive");
  Dataset ds;
  ds.n = n;
  ds.feat_dim = in_dim;
  ds.target_dim = 1;
  ds.X.resize(n * in_dim);
  ds.Y.resize(n);
  RngStream rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < in_dim; ++k)
      ds.X[i * in_dim + k] = rng.uniform01();
    ds.Y[i] = planted_target(target, ds.x_row(i), ctx);
  }
  ds.provenance = "synthetic:" + target;
  assign_split(ds, seed ^ kInitSalt, test_fraction);
  return ds;
}

struct JobContext {
  json cfg;
  std::string job, name;
  fs::path out;
  std::vector<std::uint64_t> seeds;
  int threads = 0;
  fs::path data_dir;
};

fs::path resolve_data_path(const JobContext& ctx, const std::string& p) {
  fs::path fp(p);
  return fp.is_absolute() ? fp : ctx.data_dir / fp;
}

std::shared_ptr<const Dataset> build_dataset(const JobContext& ctx,
                                             const json& j,
                                             const std::string& cx) {
  const std::string kind = jstr(j, "kind", cx);
  if (kind == "csv") {
    check_keys(j, {"kind", "path", "manifest", "split_seed", "test_fraction"},
               cx);
    const auto path = resolve_data_path(ctx, jstr(j, "path", cx));
    std::string manifest = jstr_or(j, "manifest", "", cx);
    if (!manifest.empty())
      manifest = resolve_data_path(ctx, manifest).string();
    const auto seed =
        static_cast<std::uint64_t>(jint_or(j, "split_seed", 1, cx));
    const double tf = jnum_or(j, "test_fraction", 0.1, cx);
    return std::make_shared<Dataset>(
        load_concrete_csv(path.string(), seed, tf, manifest));
  }
  if (kind == "idx") {
    check_keys(j,
               {"kind", "images", "labels", "test_images", "test_labels",
                "subsample", "test_subsample", "subsample_seed"},
               cx);
    const auto seed =
        static_cast<std::uint64_t>(jint_or(j, "subsample_seed", 1, cx));
    Dataset train = load_idx(
        resolve_data_path(ctx, jstr(j, "images", cx)).string(),
        resolve_data_path(ctx, jstr(j, "labels", cx)).string(),
        jsize_or(j, "subsample", 0, cx), seed);
    if (find(j, "test_images")) {
      Dataset test = load_idx(
          resolve_data_path(ctx, jstr(j, "test_images", cx)).string(),
          resolve_data_path(ctx, jstr(j, "test_labels", cx)).string(),
          jsize_or(j, "test_subsample", 0, cx), seed + 1);
      return std::make_shared<Dataset>(merge_train_test(train, test));
    }
    return std::make_shared<Dataset>(std::move(train));
  }
  if (kind == "synthetic") {
    check_keys(j, {"kind", "n", "in_dim", "target", "seed", "test_fraction"},
               cx);
    return std::make_shared<Dataset>(make_synthetic(
        jsize(j, "n", cx), jsize_or(j, "in_dim", 2, cx),
        jstr(j, "target", cx),
        static_cast<std::uint64_t>(jint_or(j, "seed", 1, cx)),
        jnum_or(j, "test_fraction", 0.0, cx), cx));
  }
  fail(cx + ".kind: unknown dataset kind '" + kind + "'");
}

OptimizerConfig build_optimizer(const json& j, const std::string& ctx) {
  check_keys(j,
             {"name", "algo", "stepsize", "beta", "r", "beta1", "beta2",
              "eps", "alpha", "expect_blowup"},
             ctx);
  OptimizerConfig cfg;
  try {
    cfg.algo = algo_from_string(jstr(j, "algo", ctx));
  } catch (const std::invalid_argument& e) {
    fail(ctx + ": " + e.what());
  }
  cfg.stepsize = jnum(j, "stepsize", ctx);
  cfg.beta = jnum_or(j, "beta", 0.0, ctx);
  cfg.r = jnum_or(j, "r", 0.0, ctx);
  cfg.beta1 = jnum_or(j, "beta1", 0.9, ctx);
  cfg.beta2 = jnum_or(j, "beta2", 0.999, ctx);
  cfg.eps = jnum_or(j, "eps", 1e-8, ctx);
  cfg.alpha = jnum_or(j, "alpha", 0.99, ctx);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(ctx + ": " + e.what());
  }
  return cfg;
}

// ------------------------------------------------------------ csv output

std::string traj_csv(const Trajectory& t) {
  std::string s;
  const bool wide = t.dim <= 16;
  s += "step";
  if (wide)
    for (std::size_t k = 0; k < t.dim; ++k)
      s += ",theta_" + std::to_string(k);
  else
    s += ",theta_norm";
  s += ",loss\n";
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    s += std::to_string(t.steps[i]);
    if (wide)
      for (double v : t.thetas[i]) s += "," + fmt17(v);
    else
      s += "," + fmt17(norm(t.thetas[i]));
    s += "," + fmt17(t.losses[i]) + "\n";
  }
  return s;
}

std::string epochs_csv(const EpochTrace& t) {
  const bool with_test = !t.test_metric.empty();
  std::string s = with_test ? "epoch,train_loss,test_metric\n"
                            : "epoch,train_loss\n";
  for (std::size_t i = 0; i < t.train_loss.size(); ++i) {
    s += std::to_string(i + 1) + "," + fmt17(t.train_loss[i]);
    if (with_test) s += "," + fmt17(t.test_metric[i]);
    s += "\n";
  }
  return s;
}

// --------------------------------------------------------- run summaries

json summarize_steps(const std::vector<Trajectory>& trs, double first_hit_r) {
  json per = json::array();
  Vec fin_loss, fin_norm;
  std::size_t blowups = 0;
  for (const auto& t : trs) {
    json e;
    e["seed"] = t.seed;
    e["blew_up"] = t.blew_up;
    if (t.blew_up) e["blowup_step"] = t.blowup_step;
    double mn = std::numeric_limits<double>::infinity();
    std::uint64_t mn_step = 0;
    json first_hit = nullptr;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      const double nr = norm(t.thetas[i]);
      if (std::isfinite(nr) && nr < mn) {
        mn = nr;
        mn_step = t.steps[i];
      }
      if (first_hit.is_null() && first_hit_r > 0 && std::isfinite(nr) &&
          nr <= first_hit_r)
        first_hit = t.steps[i];
    }
    e["min_theta_norm"] = mn;
    e["min_theta_norm_step"] = mn_step;
    if (first_hit_r > 0) e["first_hit_step"] = first_hit;
    if (!t.blew_up && !t.steps.empty()) {
      e["final_step"] = t.steps.back();
      e["final_loss"] = t.losses.back();
      e["final_theta_norm"] = norm(t.thetas.back());
      fin_loss.push_back(t.losses.back());
      fin_norm.push_back(norm(t.thetas.back()));
    } else {
      ++blowups;
    }
    per.push_back(std::move(e));
  }
  json out;
  out["per_seed"] = std::move(per);
  out["n_blowups"] = blowups;
  if (!fin_loss.empty()) {
    const MeanStd l = mean_std(fin_loss), n = mean_std(fin_norm);
    out["final_loss_mean"] = l.mean;
    out["final_loss_std"] = l.stdev;
    out["final_theta_norm_mean"] = n.mean;
    out["final_theta_norm_std"] = n.stdev;
  }
  return out;
}

json summarize_epochs(const std::vector<EpochTrace>& trs,
                      bool metric_is_accuracy) {
  json per = json::array();
  Vec fin_loss, fin_metric, best_metric;
  std::size_t blowups = 0;
  for (const auto& t : trs) {
    json e;
    e["seed"] = t.seed;
    e["blew_up"] = t.blew_up;
    if (t.blew_up) {
      e["blowup_epoch"] = t.blowup_epoch;
      ++blowups;
    } else {
      e["final_train_loss"] = t.final_train_loss;
      e["final_metric"] = t.final_metric;
      e["best_metric"] = t.best_metric;
      e["best_epoch"] = t.best_epoch;
      fin_loss.push_back(t.final_train_loss);
      fin_metric.push_back(t.final_metric);
      best_metric.push_back(t.best_metric);
    }
    per.push_back(std::move(e));
  }
  json out;
  out["per_seed"] = std::move(per);
  out["n_blowups"] = blowups;
  out["metric"] = metric_is_accuracy ? "accuracy" : "mse";
  if (!fin_loss.empty()) {
    const MeanStd l = mean_std(fin_loss), m = mean_std(fin_metric),
                  b = mean_std(best_metric);
    out["final_train_loss_mean"] = l.mean;
    out["final_train_loss_std"] = l.stdev;
    out["final_metric_mean"] = m.mean;
    out["final_metric_std"] = m.stdev;
    out["best_metric_mean"] = b.mean;
    out["best_metric_std"] = b.stdev;
  }
  return out;
}

void require_seeds(const JobContext& ctx) {
  if (ctx.seeds.empty())
    fail("no seeds specified (config key 'seeds' or --seeds)");
}

struct OptimizerEntry {
  std::string label;
  OptimizerConfig cfg;
  bool expect_blowup = false;
};

std::vector<OptimizerEntry> build_optimizers(const json& cfg,
                                             const std::string& ctx) {
  const json& arr = jarr(cfg, "optimizers", ctx);
  if (arr.empty()) fail(ctx + ".optimizers: must not be empty");
  std::vector<OptimizerEntry> out;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string oc = ctx + ".optimizers[" + std::to_string(i) + "]";
    OptimizerEntry e;
    e.cfg = build_optimizer(arr[i], oc);
    e.label = jstr_or(arr[i], "name", to_string(e.cfg.algo), oc);
    e.expect_blowup = jbool_or(arr[i], "expect_blowup", false, oc);
    if (!labels.insert(e.label).second)
      fail(oc + ": duplicate optimizer name '" + e.label + "'");
    out.push_back(std::move(e));
  }
  return out;
}

// ----------------------------------------------------------- job: optimize

struct StepsSchedule {
  RunSchedule sch;
  Vec theta0;
};

StepsSchedule parse_steps_schedule(const json& s, std::size_t dim,
                                   const std::string& ctx) {
  check_keys(s,
             {"kind", "steps", "batch_size", "thinning", "lr_decay_step",
              "lr_decay_factor", "theta0"},
             ctx);
  StepsSchedule out;
  out.sch.n_steps = jsize(s, "steps", ctx);
  if (out.sch.n_steps == 0) fail(ctx + ".steps: must be positive");
  out.sch.batch_size = jsize_or(s, "batch_size", 1, ctx);
  if (out.sch.batch_size == 0) fail(ctx + ".batch_size: must be positive");
  out.sch.thinning = jsize_or(s, "thinning", 1, ctx);
  if (out.sch.thinning == 0) fail(ctx + ".thinning: must be positive");
  out.sch.lr_decay_step = jsize_or(s, "lr_decay_step", 0, ctx);
  out.sch.lr_decay_factor = jnum_or(s, "lr_decay_factor", 1.0, ctx);
  const json* t0 = find(s, "theta0");
  if (!t0) fail(ctx + ".theta0: required for step schedules");
  out.theta0 = jvec(*t0, ctx + ".theta0");
  if (out.theta0.size() != dim)
    fail(ctx + ".theta0: expected dimension " + std::to_string(dim) +
         ", got " + std::to_string(out.theta0.size()));
  return out;
}

EpochSchedule parse_epoch_schedule(const json& s, const std::string& ctx) {
  check_keys(
      s, {"kind", "epochs", "batch_size", "lr_decay_epoch", "lr_decay_factor"},
      ctx);
  EpochSchedule es;
  es.epochs = jsize(s, "epochs", ctx);
  if (es.epochs == 0) fail(ctx + ".epochs: must be positive");
  es.batch_size = jsize_or(s, "batch_size", 128, ctx);
  if (es.batch_size == 0) fail(ctx + ".batch_size: must be positive");
  es.lr_decay_epoch = jsize_or(s, "lr_decay_epoch", 0, ctx);
  es.lr_decay_factor = jnum_or(s, "lr_decay_factor", 1.0, ctx);
  return es;
}

void throw_if_unexpected_blowups(const json& results) {
  std::string bad;
  for (auto it = results.begin(); it != results.end(); ++it) {
    const json& r = *it;
    if (r["expect_blowup"].get<bool>()) continue;
    if (r["runs"]["n_blowups"].get<std::size_t>() > 0)
      bad += (bad.empty() ? "" : ", ") + it.key();
  }
  if (!bad.empty())
    throw BlowupError("unexpected blow-up in optimizer(s): " + bad);
}

void job_optimize(JobContext& ctx) {
  check_keys(ctx.cfg,
             {"job", "name", "out_dir", "seeds", "threads", "problem",
              "data", "optimizers", "schedule", "report"},
             "config");
  require_seeds(ctx);
  const json& sched = jobj(ctx.cfg, "schedule", "config");
  const std::string kind = jstr(sched, "kind", "config.schedule");
  const auto opts = build_optimizers(ctx.cfg, "config");
  double first_hit_r = 0.0;
  if (const json* rep = find(ctx.cfg, "report")) {
    check_keys(*rep, {"first_hit_radius"}, "config.report");
    first_hit_r = jnum_or(*rep, "first_hit_radius", 0.0, "config.report");
  }

  json results;
  bool is_accuracy = false;
  if (kind == "steps") {
    const json& pj = jobj(ctx.cfg, "problem", "config");
    if (jstr(pj, "kind", "config.problem") != "artificial")
      fail("config.schedule: step schedules require the artificial problem");
    auto prob = build_artificial(pj, "config.problem");
    const StepsSchedule ss =
        parse_steps_schedule(sched, prob->dim_param(), "config.schedule");
    for (const auto& oe : opts) {
      auto trs = run_seeds(*prob, oe.cfg, ss.sch, ctx.seeds, ss.theta0,
                           ctx.threads);
      for (const auto& t : trs)
        write_file_atomic(ctx.out / ("traj_" + oe.label + "_seed" +
                                     std::to_string(t.seed) + ".csv"),
                          traj_csv(t));
      json r;
      r["algo"] = to_string(oe.cfg.algo);
      r["stepsize"] = oe.cfg.stepsize;
      r["expect_blowup"] = oe.expect_blowup;
      r["runs"] = summarize_steps(trs, first_hit_r);
      results[oe.label] = std::move(r);
    }
  } else if (kind == "epochs") {
    const json& pj = jobj(ctx.cfg, "problem", "config");
    if (jstr(pj, "kind", "config.problem") != "ffn")
      fail("config.schedule: epoch schedules require an ffn problem");
    auto net = build_ffn(pj, "config.problem");
    auto ds = build_dataset(ctx, jobj(ctx.cfg, "data", "config"),
                            "config.data");
    if (ds->feat_dim != net->in_dim() ||
        ds->target_dim != net->out_dim())
      fail("config.data: dataset shape (" + std::to_string(ds->feat_dim) +
           " -> " + std::to_string(ds->target_dim) +
           ") does not match the network (" + std::to_string(net->in_dim()) +
           " -> " + std::to_string(net->out_dim()) + ")");
    is_accuracy = net->metric_is_accuracy();
    const EpochSchedule es = parse_epoch_schedule(sched, "config.schedule");
    std::vector<Vec> theta0s;
    for (auto s : ctx.seeds) {
      RngStream r0(s ^ kInitSalt);
      theta0s.push_back(net->xavier_init(r0).values());
    }
    for (const auto& oe : opts) {
      auto trs = run_epochs_seeds(*net, *ds, oe.cfg, es, ctx.seeds, theta0s,
                                  ctx.threads);
      for (const auto& t : trs)
        write_file_atomic(ctx.out / ("epochs_" + oe.label + "_seed" +
                                     std::to_string(t.seed) + ".csv"),
                          epochs_csv(t));
      json r;
      r["algo"] = to_string(oe.cfg.algo);
      r["stepsize"] = oe.cfg.stepsize;
      r["expect_blowup"] = oe.expect_blowup;
      r["runs"] = summarize_epochs(trs, is_accuracy);
      results[oe.label] = std::move(r);
    }
  } else {
    fail("config.schedule.kind: expected 'steps' or 'epochs'");
  }

  json summary;
  summary["job"] = ctx.job;
  summary["name"] = ctx.name;
  summary["seeds"] = ctx.seeds;
  summary["results"] = results;
  bool ok = true;
  for (const auto& oe : opts) {
    const auto nb =
        results[oe.label]["runs"]["n_blowups"].get<std::size_t>();
    if (!oe.expect_blowup && nb > 0) ok = false;
  }
  summary["ok"] = ok;
  write_json_atomic(ctx.out / "summary.json", summary);
  throw_if_unexpected_blowups(results);
}

// -------------------------------------------------------------- job: sweep

void job_sweep(JobContext& ctx) {
  check_keys(ctx.cfg,
             {"job", "name", "out_dir", "seeds", "threads", "problem",
              "data", "optimizer", "schedule", "axis", "values"},
             "config");
  require_seeds(ctx);
  const std::string axis = jstr(ctx.cfg, "axis", "config");
  static const std::set<std::string> axes = {"beta", "r", "stepsize", "eta"};
  if (!axes.count(axis))
    fail("config.axis: expected one of beta, r, stepsize, eta");
  const Vec values = jvec(jarr(ctx.cfg, "values", "config"), "config.values");
  if (values.empty()) fail("config.values: must not be empty");
  const json& oj = jobj(ctx.cfg, "optimizer", "config");
  const OptimizerConfig base = build_optimizer(oj, "config.optimizer");
  const std::string label = jstr_or(oj, "name", to_string(base.algo),
                                    "config.optimizer");
  const json& sched = jobj(ctx.cfg, "schedule", "config");
  const std::string kind = jstr(sched, "kind", "config.schedule");
  const json& pj = jobj(ctx.cfg, "problem", "config");
  const std::string pkind = jstr(pj, "kind", "config.problem");
  if (axis == "eta" && pkind != "ffn")
    fail("config.axis: 'eta' sweeps the ffn ridge weight; problem.kind must "
         "be 'ffn'");

  std::string table = "axis,value,seed,blew_up,final_loss,final_metric\n";
  json results = json::array();

  for (std::size_t vi = 0; vi < values.size(); ++vi) {
    OptimizerConfig cfg = base;
    if (axis == "beta") cfg.beta = values[vi];
    if (axis == "r") cfg.r = values[vi];
    if (axis == "stepsize") cfg.stepsize = values[vi];
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      fail("config.values[" + std::to_string(vi) + "]: " + e.what());
    }
    const std::string tag = label + "_v" + std::to_string(vi);
    json r;
    r["value"] = values[vi];

    if (kind == "steps") {
      if (pkind != "artificial")
        fail("config.schedule: step schedules require the artificial problem");
      auto prob = build_artificial(pj, "config.problem");
      const StepsSchedule ss =
          parse_steps_schedule(sched, prob->dim_param(), "config.schedule");
      auto trs =
          run_seeds(*prob, cfg, ss.sch, ctx.seeds, ss.theta0, ctx.threads);
      for (const auto& t : trs) {
        write_file_atomic(ctx.out / ("traj_" + tag + "_seed" +
                                     std::to_string(t.seed) + ".csv"),
                          traj_csv(t));
        const double fl = t.blew_up ? std::nan("") : t.losses.back();
        const double fm = t.blew_up ? std::nan("") : norm(t.thetas.back());
        table += axis + "," + fmt17(values[vi]) + "," +
                 std::to_string(t.seed) + "," +
                 (t.blew_up ? "1" : "0") + "," + fmt17(fl) + "," + fmt17(fm) +
                 "\n";
      }
      r["runs"] = summarize_steps(trs, 0.0);
    } else if (kind == "epochs") {
      if (pkind != "ffn")
        fail("config.schedule: epoch schedules require an ffn problem");
      json pmod = pj;
      if (axis == "eta") pmod["eta"] = values[vi];
      auto net = build_ffn(pmod, "config.problem");
      auto ds = build_dataset(ctx, jobj(ctx.cfg, "data", "config"),
                              "config.data");
      const EpochSchedule es = parse_epoch_schedule(sched, "config.schedule");
      std::vector<Vec> theta0s;
      for (auto s : ctx.seeds) {
        RngStream r0(s ^ kInitSalt);
        theta0s.push_back(net->xavier_init(r0).values());
      }
      auto trs = run_epochs_seeds(*net, *ds, cfg, es, ctx.seeds, theta0s,
                                  ctx.threads);
      for (const auto& t : trs) {
        write_file_atomic(ctx.out / ("epochs_" + tag + "_seed" +
                                     std::to_string(t.seed) + ".csv"),
                          epochs_csv(t));
        const double fl = t.blew_up ? std::nan("") : t.final_train_loss;
        const double fm = t.blew_up ? std::nan("") : t.final_metric;
        table += axis + "," + fmt17(values[vi]) + "," +
                 std::to_string(t.seed) + "," +
                 (t.blew_up ? "1" : "0") + "," + fmt17(fl) + "," + fmt17(fm) +
                 "\n";
      }
      r["runs"] = summarize_epochs(trs, net->metric_is_accuracy());
    } else {
      fail("config.schedule.kind: expected 'steps' or 'epochs'");
    }
    results.push_back(std::move(r));
  }

  write_file_atomic(ctx.out / "table.csv", table);
  json summary;
  summary["job"] = ctx.job;
  summary["name"] = ctx.name;
  summary["axis"] = axis;
  summary["seeds"] = ctx.seeds;
  summary["results"] = results;
  summary["ok"] = true;
  write_json_atomic(ctx.out / "summary.json", summary);
}

// ------------------------------------------------------------- job: bounds

json logval_entry(const LogVal& v) {
  json e;
  e["log10"] = v.is_zero() ? json(nullptr) : json(v.log10());
  const double val = v.value();
  e["value"] = std::isfinite(val) ? json(val) : json(nullptr);
  return e;
}

void job_bounds(JobContext& ctx) {
  check_keys(ctx.cfg,
             {"job", "name", "out_dir", "seeds", "threads", "problem",
              "beta", "moment_ps", "theorem_inputs", "evaluate"},
             "config");
  auto prob = build_artificial(jobj(ctx.cfg, "problem", "config"),
                               "config.problem");
  const double beta = jnum(ctx.cfg, "beta", "config");
  AssumptionConstants ac = artificial_assumptions(*prob, beta);
  try {
    ac.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("config: ") + e.what());
  }

  std::vector<int> ps = {2};
  if (const json* mp = find(ctx.cfg, "moment_ps")) {
    ps.clear();
    if (!mp->is_array()) fail("config.moment_ps: expected an array");
    for (const auto& e : *mp) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 1)
        fail("config.moment_ps: expected positive integers");
      ps.push_back(static_cast<int>(e.get<std::int64_t>()));
    }
  }

  TheoremInputs in;
  json pi_info = nullptr;
  bool need_auto = false;
  const json* ti = find(ctx.cfg, "theorem_inputs");
  if (ti) {
    check_keys(*ti,
               {"intV2_pi", "pi_abs_moment_4rp2", "theta0_moment_4rp2",
                "theta0_moment_4_2rp1"},
               "config.theorem_inputs");
    auto num_or_auto = [&](const char* k, double dflt, bool& is_auto) {
      const json* v = find(*ti, k);
      if (!v) return dflt;
      if (v->is_string()) {
        if (v->get<std::string>() != "auto")
          fail(std::string("config.theorem_inputs.") + k +
               ": expected a number or 'auto'");
        is_auto = true;
        return dflt;
      }
      if (!v->is_number())
        fail(std::string("config.theorem_inputs.") + k +
             ": expected a number or 'auto'");
      return v->get<double>();
    };
    bool a1 = false, a2 = false;
    in.intV2_pi = num_or_auto("intV2_pi", in.intV2_pi, a1);
    in.pi_abs_moment_4rp2 =
        num_or_auto("pi_abs_moment_4rp2", in.pi_abs_moment_4rp2, a2);
    in.theta0_moment_4rp2 = jnum_or(*ti, "theta0_moment_4rp2", 1.0,
                                    "config.theorem_inputs");
    in.theta0_moment_4_2rp1 = jnum_or(*ti, "theta0_moment_4_2rp1", 1.0,
                                      "config.theorem_inputs");
    need_auto = a1 || a2;
    if (need_auto) {
      auto u = [&prob](double th) { return prob->u_exact1(th); };
      const TargetDensity1D td = TargetDensity1D::build_auto(u, beta);
      const double e2 = td.abs_moment(2.0);
      if (a1) in.intV2_pi = 1.0 + e2;
      if (a2) in.pi_abs_moment_4rp2 = td.abs_moment(4.0 * ac.r + 2.0);
      pi_info = json::object();
      pi_info["grid_lo"] = td.x.front();
      pi_info["grid_hi"] = td.x.back();
      pi_info["grid_n"] = td.x.size();
      pi_info["log10_Z"] = td.z.log10();
      pi_info["mean"] = td.mean();
      pi_info["second_moment"] = e2;
      pi_info["abs_moment_4rp2"] = td.abs_moment(4.0 * ac.r + 2.0);
      pi_info["expected_u"] =
          td.moment([&prob](double t) { return prob->u_exact1(t); });
    }
  }

  json report;
  report["assumptions"] = {
      {"q", ac.q},     {"r", ac.r},     {"rbar", ac.rbar}, {"rho", ac.rho},
      {"L_G", ac.L_G}, {"K_G", ac.K_G}, {"L_F", ac.L_F},   {"K_F", ac.K_F},
      {"a", ac.a},     {"b", ac.b},     {"d", ac.d},       {"beta", ac.beta},
      {"h0_norm", ac.h0_norm}};
  json consts = json::array();
  for (const auto& re : bounds_report(ac, in, ps)) {
    json e = logval_entry(re.value);
    e["name"] = re.name;
    e["definition"] = re.definition;
    consts.push_back(std::move(e));
  }
  report["constants"] = std::move(consts);
  report["pi"] = pi_info;

  json evals = json::array();
  if (const json* ev = find(ctx.cfg, "evaluate")) {
    if (!ev->is_array()) fail("config.evaluate: expected an array");
    const TheoremConstants tc = theorem_constants(ac, in);
    for (std::size_t i = 0; i < ev->size(); ++i) {
      const std::string ec = "config.evaluate[" + std::to_string(i) + "]";
      check_keys((*ev)[i], {"kind", "n", "lambda"}, ec);
      const std::string k = jstr((*ev)[i], "kind", ec);
      BoundKind bk;
      if (k == "w1")
        bk = BoundKind::W1;
      else if (k == "w2")
        bk = BoundKind::W2;
      else if (k == "excess_risk")
        bk = BoundKind::ExcessRisk;
      else
        fail(ec + ".kind: expected w1, w2 or excess_risk");
      const double n = jnum((*ev)[i], "n", ec);
      const double lam = jnum((*ev)[i], "lambda", ec);
      BoundValue bv;
      try {
        bv = evaluate_bound(bk, n, lam, tc);
      } catch (const std::invalid_argument& e) {
        fail(ec + ": " + e.what());
      }
      json e = logval_entry(bv.value);
      e["kind"] = k;
      e["n"] = n;
      e["lambda"] = lam;
      e["lambda_exceeds_max"] = bv.lambda_exceeds_max;
      evals.push_back(std::move(e));
    }
  }
  report["evaluations"] = std::move(evals);
  write_json_atomic(ctx.out / "bounds_report.json", report);

  json summary;
  summary["job"] = ctx.job;
  summary["name"] = ctx.name;
  summary["beta"] = beta;
  summary["n_constants"] = report["constants"].size();
  summary["n_evaluations"] = report["evaluations"].size();
  summary["ok"] = true;
  write_json_atomic(ctx.out / "summary.json", summary);
}

// ---------------------------------------------------------------- job: sde

void job_sde(JobContext& ctx) {
  check_keys(ctx.cfg,
             {"job", "name", "out_dir", "seeds", "threads", "problem",
              "beta", "lambda", "dt", "steps", "burn_in", "sample_stride",
              "z0", "write_samples"},
             "config");
  require_seeds(ctx);
  auto prob = build_artificial(jobj(ctx.cfg, "problem", "config"),
                               "config.problem");
  SdeConfig sc;
  sc.beta = jnum(ctx.cfg, "beta", "config");
  sc.lambda = jnum_or(ctx.cfg, "lambda", 1.0, "config");
  sc.dt = jnum(ctx.cfg, "dt", "config");
  sc.n_steps = jsize(ctx.cfg, "steps", "config");
  sc.burn_in = jsize_or(ctx.cfg, "burn_in", 0, "config");
  sc.sample_stride = jsize_or(ctx.cfg, "sample_stride", 1, "config");
  const double z0 = jnum(ctx.cfg, "z0", "config");
  const bool write_samples =
      jbool_or(ctx.cfg, "write_samples", false, "config");

  auto drift = [&prob](const Vec& z, Vec& out) { prob->h_exact(z, out); };
  json per = json::array();
  bool any_blowup = false;
  for (auto seed : ctx.seeds) {
    SdeConfig s = sc;
    s.seed = seed;
    const SdeResult res = euler_maruyama(drift, Vec{z0}, s);
    json e;
    e["seed"] = seed;
    e["blew_up"] = res.blew_up;
    if (res.blew_up) {
      e["blowup_step"] = res.blowup_step;
      any_blowup = true;
    } else {
      Vec zs(res.samples.size());
      for (std::size_t i = 0; i < zs.size(); ++i) zs[i] = res.samples[i][0];
      const MeanStd ms = mean_std(zs);
      double m2 = 0;
      for (double v : zs) m2 += v * v;
      e["n_samples"] = zs.size();
      e["mean"] = ms.mean;
      e["std"] = ms.stdev;
      e["second_moment"] = zs.empty() ? 0.0 : m2 / double(zs.size());
      if (write_samples) {
        std::string s_csv = "index,z\n";
        for (std::size_t i = 0; i < zs.size(); ++i)
          s_csv += std::to_string(i) + "," + fmt17(zs[i]) + "\n";
        write_file_atomic(
            ctx.out / ("sde_seed" + std::to_string(seed) + ".csv"), s_csv);
      }
    }
    per.push_back(std::move(e));
  }
  json summary;
  summary["job"] = ctx.job;
  summary["name"] = ctx.name;
  summary["seeds"] = ctx.seeds;
  summary["per_seed"] = std::move(per);
  summary["ok"] = !any_blowup;
  write_json_atomic(ctx.out / "summary.json", summary);
  if (any_blowup) throw BlowupError("sde trajectory diverged");
}

// -------------------------------------------------------- job: wasserstein

void job_wasserstein(JobContext& ctx) {
  check_keys(ctx.cfg,
             {"job", "name", "out_dir", "seeds", "threads", "problem",
              "beta", "lambda", "r", "steps", "checkpoints", "theta0",
              "bound"},
             "config");
  require_seeds(ctx);
  auto prob = build_artificial(jobj(ctx.cfg, "problem", "config"),
                               "config.problem");
  const double beta = jnum(ctx.cfg, "beta", "config");
  const double lambda = jnum(ctx.cfg, "lambda", "config");
  const double r = jnum_or(ctx.cfg, "r", prob->r(), "config");
  const std::uint64_t n_steps = jsize(ctx.cfg, "steps", "config");
  const double theta0 = jnum(ctx.cfg, "theta0", "config");
  const bool with_bound = jbool_or(ctx.cfg, "bound", false, "config");
  if (!(lambda > 0) || !(beta > 0))
    fail("config: lambda and beta must be positive");

  std::vector<std::uint64_t> cps;
  for (const auto& e : jarr(ctx.cfg, "checkpoints", "config")) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 1)
      fail("config.checkpoints: expected positive integers");
    cps.push_back(e.get<std::uint64_t>());
  }
  if (cps.empty()) fail("config.checkpoints: must not be empty");
  if (!std::is_sorted(cps.begin(), cps.end()) ||
      std::adjacent_find(cps.begin(), cps.end()) != cps.end())
    fail("config.checkpoints: must be strictly increasing");
  if (cps.back() > n_steps)
    fail("config.checkpoints: last checkpoint exceeds steps");

  const auto law = prob->data_law();
  const double sigma = std::sqrt(2.0 * lambda / beta);
  std::vector<Vec> samples(cps.size());
  bool any_blowup = false;
  json blowups = json::array();
  for (auto seed : ctx.seeds) {
    RngStream rng(seed);
    double th = theta0;
    std::size_t ci = 0;
    for (std::uint64_t n = 1; n <= n_steps && ci < cps.size(); ++n) {
      double x;
      law->sample_into(rng, &x);
      const double H = prob->H1(th, x);
      const double denom = 1.0 + std::sqrt(lambda) * std::pow(th * th, r);
      th += -lambda * H / denom + sigma * rng.normal();
      if (!std::isfinite(th)) {
        any_blowup = true;
        json b;
        b["seed"] = seed;
        b["step"] = n;
        blowups.push_back(std::move(b));
        break;
      }
      if (n == cps[ci]) {
        samples[ci].push_back(th);
        ++ci;
      }
    }
  }

  auto u = [&prob](double t) { return prob->u_exact1(t); };
  const TargetDensity1D td = TargetDensity1D::build_auto(u, beta);

  json per = json::array();
  std::string csv = with_bound
                        ? "step,n_samples,w1,w2,w1_bound_log10\n"
                        : "step,n_samples,w1,w2\n";
  TheoremConstants tc;
  if (with_bound) {
    AssumptionConstants ac = artificial_assumptions(*prob, beta);
    TheoremInputs in;
    in.intV2_pi = 1.0 + td.abs_moment(2.0);
    in.pi_abs_moment_4rp2 = td.abs_moment(4.0 * ac.r + 2.0);
    in.theta0_moment_4rp2 = std::pow(std::abs(theta0), 4.0 * ac.r + 2.0);
    in.theta0_moment_4_2rp1 =
        std::pow(std::abs(theta0), 4.0 * (2.0 * ac.r + 1.0));
    tc = theorem_constants(ac, in);
  }
  for (std::size_t i = 0; i < cps.size(); ++i) {
    json e;
    e["step"] = cps[i];
    e["n_samples"] = samples[i].size();
    if (!samples[i].empty()) {
      const EmpiricalMeasure em(samples[i]);
      const double w1 = wasserstein_1d(em, td, 1.0);
      const double w2 = wasserstein_1d(em, td, 2.0);
      e["w1"] = w1;
      e["w2"] = w2;
      csv += std::to_string(cps[i]) + "," +
             std::to_string(samples[i].size()) + "," + fmt17(w1) + "," +
             fmt17(w2);
      if (with_bound) {
        const BoundValue bv = evaluate_bound(
            BoundKind::W1, static_cast<double>(cps[i]), lambda, tc);
        e["w1_bound_log10"] = bv.value.log10();
        e["lambda_exceeds_max"] = bv.lambda_exceeds_max;
        csv += "," + fmt17(bv.value.log10());
      }
      csv += "\n";
    }
    per.push_back(std::move(e));
  }
  write_file_atomic(ctx.out / "wasserstein.csv", csv);

  json summary;
  summary["job"] = ctx.job;
  summary["name"] = ctx.name;
  summary["seeds"] = ctx.seeds;
  summary["lambda"] = lambda;
  summary["beta"] = beta;
  summary["checkpoints"] = std::move(per);
  if (any_blowup) summary["blowups"] = std::move(blowups);
  summary["ok"] = !any_blowup;
  write_json_atomic(ctx.out / "summary.json", summary);
  if (any_blowup)
    throw BlowupError("trajectory diverged during wasserstein job");
}

// ------------------------------------------------------------ job: transfer

struct StageParams {
  std::size_t n_samples = 10000;
  std::uint64_t epochs = 0;
  std::size_t batch_size = 128;
  double stepsize = 0.5;
  double beta = 1e10;
  double eta = 1e-6;
  std::uint64_t seed = 1;
};

StageParams parse_stage(const json& j, const std::string& ctx) {
  check_keys(j,
             {"n_samples", "epochs", "batch_size", "stepsize", "beta", "eta",
              "seed"},
             ctx);
  StageParams sp;
  sp.n_samples = jsize_or(j, "n_samples", 10000, ctx);
  sp.epochs = jsize(j, "epochs", ctx);
  if (sp.epochs == 0) fail(ctx + ".epochs: must be positive");
  sp.batch_size = jsize_or(j, "batch_size", 128, ctx);
  sp.stepsize = jnum_or(j, "stepsize", 0.5, ctx);
  sp.beta = jnum_or(j, "beta", 1e10, ctx);
  sp.eta = jnum_or(j, "eta", 1e-6, ctx);
  sp.seed = static_cast<std::uint64_t>(jint_or(j, "seed", 1, ctx));
  return sp;
}

double target_variance(const Dataset& ds) {
  double s = 0;
  for (std::size_t i = 0; i < ds.n; ++i) s += ds.Y[i];
  const double mu = s / static_cast<double>(ds.n);
  double v = 0;
  for (std::size_t i = 0; i < ds.n; ++i)
    v += (ds.Y[i] - mu) * (ds.Y[i] - mu);
  return v / static_cast<double>(ds.n);
}

void job_transfer(JobContext& ctx) {
  check_keys(ctx.cfg,
             {"job", "name", "out_dir", "seeds", "threads", "stage1",
              "stage2", "threshold_divisor", "grid_n"},
             "config");
  const StageParams s1 =
      parse_stage(jobj(ctx.cfg, "stage1", "config"), "config.stage1");
  const StageParams s2 =
      parse_stage(jobj(ctx.cfg, "stage2", "config"), "config.stage2");
  const double divisor =
      jnum_or(ctx.cfg, "threshold_divisor", 10.0, "config");
  if (!(divisor > 0)) fail("config.threshold_divisor: must be positive");
  const std::size_t grid_n = jsize_or(ctx.cfg, "grid_n", 41, "config");
  if (grid_n < 2) fail("config.grid_n: must be at least 2");

  json summary;
  summary["job"] = ctx.job;
  summary["name"] = ctx.name;

  // stage 1: train the wide two-hidden-layer net on the auxiliary task
  const Dataset ds1 =
      make_synthetic(s1.n_samples, 2, "planted2", s1.seed, 0.0, "stage1");
  auto net1 = std::make_shared<FeedForwardNet>(
      2,
      std::vector<LayerSpec>{{15, Activation::ReLU, true},
                             {15, Activation::Tanh, true},
                             {1, Activation::Identity, false}},
      LossKind::Squared, s1.eta, 3.0);
  OptimizerConfig oc1;
  oc1.algo = Algo::TUSLA;
  oc1.stepsize = s1.stepsize;
  oc1.beta = s1.beta;
  oc1.r = 3.0;
  oc1.validate();
  EpochSchedule es1;
  es1.epochs = s1.epochs;
  es1.batch_size = s1.batch_size;
  es1.seed = s1.seed;
  RngStream init1(s1.seed ^ kInitSalt);
  const Vec theta1 = net1->xavier_init(init1).values();
  const EpochTrace tr1 = run_epochs(*net1, ds1, oc1, es1, theta1);
  write_file_atomic(ctx.out / "transfer_stage1.csv", epochs_csv(tr1));

  const double var1 = target_variance(ds1);
  const double thr1 = var1 / divisor;
  auto ws1 = net1->make_workspace();
  const double mse1 =
      tr1.blew_up ? std::numeric_limits<double>::quiet_NaN()
                  : net1->dataset_metric(tr1.final_theta, ds1, ds1.train_idx,
                                         *ws1);
  json j1;
  j1["epochs"] = s1.epochs;
  j1["target_variance"] = var1;
  j1["threshold"] = thr1;
  j1["final_mse"] = mse1;
  j1["final_theta_norm"] = tr1.blew_up ? 0.0 : norm(tr1.final_theta);
  j1["blew_up"] = tr1.blew_up;
  summary["stage1"] = j1;

  if (tr1.blew_up || !(mse1 <= thr1)) {
    summary["ok"] = false;
    summary["reason"] = "stage1 did not reach the loss threshold";
    write_json_atomic(ctx.out / "summary.json", summary);
    throw StageError("stage 1 final mse " + fmt17(mse1) +
                     " above threshold " + fmt17(thr1));
  }

  // freeze the trained first layer as the fixed input matrix
  const auto [w_lo, w_hi] = net1->layer_weight_range(0);
  std::vector<double> c(tr1.final_theta.begin() + w_lo,
                        tr1.final_theta.begin() + w_hi);
  std::shared_ptr<const FixedInputNet> net2;
  try {
    net2 = std::make_shared<FixedInputNet>(15, 2, 1, std::move(c), s2.eta);
  } catch (const std::invalid_argument& e) {
    summary["ok"] = false;
    summary["reason"] = std::string("degenerate frozen layer: ") + e.what();
    write_json_atomic(ctx.out / "summary.json", summary);
    throw StageError(std::string("stage 1 produced a degenerate frozen "
                                 "layer: ") +
                     e.what());
  }

  // stage 2: train the output layer and bias on the main task
  const Dataset ds2 =
      make_synthetic(s2.n_samples, 2, "planted1", s2.seed + 1000, 0.0,
                     "stage2");
  FixedNetTrainer trainer(net2);
  OptimizerConfig oc2;
  oc2.algo = Algo::TUSLA;
  oc2.stepsize = s2.stepsize;
  oc2.beta = s2.beta;
  oc2.r = 2.0;
  oc2.validate();
  EpochSchedule es2;
  es2.epochs = s2.epochs;
  es2.batch_size = s2.batch_size;
  es2.seed = s2.seed + 1;
  RngStream init2(s2.seed ^ (kInitSalt + 1));
  const Vec theta2 = net2->xavier_init(init2).values();
  const EpochTrace tr2 = run_epochs(trainer, ds2, oc2, es2, theta2);
  write_file_atomic(ctx.out / "transfer_stage2.csv", epochs_csv(tr2));

  const double var2 = target_variance(ds2);
  const double thr2 = var2 / divisor;
  auto ws2 = trainer.make_workspace();
  const double mse2 =
      tr2.blew_up ? std::numeric_limits<double>::quiet_NaN()
                  : trainer.dataset_metric(tr2.final_theta, ds2,
                                           ds2.train_idx, *ws2);
  json j2;
  j2["epochs"] = s2.epochs;
  j2["target_variance"] = var2;
  j2["threshold"] = thr2;
  j2["final_mse"] = mse2;
  j2["final_theta_norm"] = tr2.blew_up ? 0.0 : norm(tr2.final_theta);
  j2["blew_up"] = tr2.blew_up;
  summary["stage2"] = j2;
  summary["frozen_layer"] = {{"c_frobenius", net2->c_frobenius()},
                             {"c", net2->c()}};

  // fitted surface on a regular grid for plotting
  {
    std::string csv = "z1,z2,y_true,y_pred\n";
    Vec out(1);
    const double step = 1.0 / static_cast<double>(grid_n - 1);
    for (std::size_t i = 0; i < grid_n; ++i) {
      for (std::size_t k = 0; k < grid_n; ++k) {
        const double z[2] = {static_cast<double>(i) * step,
                             static_cast<double>(k) * step};
        const double yt = planted_target("planted1", z, "grid");
        if (tr2.blew_up)
          out[0] = std::numeric_limits<double>::quiet_NaN();
        else
          net2->forward(tr2.final_theta, z, out);
        csv += fmt17(z[0]) + "," + fmt17(z[1]) + "," + fmt17(yt) + "," +
               fmt17(out[0]) + "\n";
      }
    }
    write_file_atomic(ctx.out / "fit_grid.csv", csv);
  }

  const bool ok = !tr2.blew_up && mse2 <= thr2;
  summary["ok"] = ok;
  if (!ok) summary["reason"] = "stage2 did not reach the loss threshold";
  write_json_atomic(ctx.out / "summary.json", summary);
  if (!ok)
    throw std::runtime_error("stage 2 final mse " + fmt17(mse2) +
                             " above threshold " + fmt17(thr2));
}

// --------------------------------------------------------------- dispatch

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("config is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) fail("config root must be a JSON object");
  return cfg;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string tok = s.substr(pos, comma - pos);
    if (tok.empty()) fail("--seeds: empty entry in '" + s + "'");
    std::uint64_t v = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      fail("--seeds: invalid seed '" + tok + "'");
    out.push_back(v);
    pos = comma + 1;
    if (comma == s.size()) break;
  }
  return out;
}

std::vector<std::uint64_t> config_seeds(const json& cfg) {
  const json* v = find(cfg, "seeds");
  if (!v) return {};
  if (!v->is_array()) fail("config.seeds: expected an array of integers");
  std::vector<std::uint64_t> out;
  for (const auto& e : *v) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 0)
      fail("config.seeds: expected non-negative integers");
    out.push_back(e.get<std::uint64_t>());
  }
  return out;
}

void dispatch(const std::string& sub, const std::string& config_path,
              const std::string& out_override, const std::string& seeds_csv,
              int threads_override) {
  JobContext ctx;
  ctx.cfg = load_config(config_path);
  ctx.job = jstr(ctx.cfg, "job", "config");

  static const std::map<std::string, std::set<std::string>> kJobs = {
      {"run", {"optimize", "sde", "wasserstein"}},
      {"sweep", {"sweep"}},
      {"bounds", {"bounds"}},
      {"transfer", {"transfer"}}};
  const auto& allowed = kJobs.at(sub);
  if (!allowed.count(ctx.job)) {
    std::string lst;
    for (const auto& a : allowed) lst += (lst.empty() ? "" : ", ") + a;
    fail("subcommand '" + sub + "' handles job kinds {" + lst +
         "}, but config.job is '" + ctx.job + "'");
  }

  ctx.name = jstr_or(ctx.cfg, "name", fs::path(config_path).stem().string(),
                     "config");
  if (ctx.name.empty()) fail("config.name: must not be empty");

  if (!out_override.empty()) {
    ctx.out = out_override;
  } else if (const json* od = find(ctx.cfg, "out_dir")) {
    if (!od->is_string()) fail("config.out_dir: expected a string");
    ctx.out = od->get<std::string>();
  } else if (const char* root = std::getenv("TUSLA_OUT_ROOT")) {
    ctx.out = fs::path(root) / ctx.name;
  } else {
    ctx.out = fs::path("out") / ctx.name;
  }

  ctx.seeds = seeds_csv.empty() ? config_seeds(ctx.cfg)
                                : parse_seed_list(seeds_csv);
  if (threads_override >= 0)
    ctx.threads = threads_override;
  else
    ctx.threads =
        static_cast<int>(jint_or(ctx.cfg, "threads", 0, "config"));
  if (ctx.threads < 0) fail("config.threads: must be non-negative");

  if (const char* dd = std::getenv("TUSLA_DATA_DIR"))
    ctx.data_dir = dd;
  else
    ctx.data_dir = "data";

  fs::create_directories(ctx.out);
  {
    json echo;
    echo["config"] = ctx.cfg;
    echo["resolved"] = {{"name", ctx.name},
                        {"out_dir", ctx.out.string()},
                        {"seeds", ctx.seeds},
                        {"threads", ctx.threads},
                        {"data_dir", ctx.data_dir.string()}};
    write_json_atomic(ctx.out / "config_echo.json", echo);
  }

  if (ctx.job == "optimize")
    job_optimize(ctx);
  else if (ctx.job == "sweep")
    job_sweep(ctx);
  else if (ctx.job == "bounds")
    job_bounds(ctx);
  else if (ctx.job == "sde")
    job_sde(ctx);
  else if (ctx.job == "wasserstein")
    job_wasserstein(ctx);
  else if (ctx.job == "transfer")
    job_transfer(ctx);
  else
    fail("config.job: unknown job kind '" + ctx.job + "'");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"stochastic non-convex optimization with tamed Langevin "
               "methods"};
  app.require_subcommand(1);

  std::string config_path, out_dir, seeds_csv;
  int threads = -1;
  auto add_common = [&](CLI::App* s) {
    s->add_option("config", config_path, "JSON job configuration")
        ->required();
    s->add_option("--out", out_dir,
                  "output directory (overrides config and TUSLA_OUT_ROOT)");
    s->add_option("--seeds", seeds_csv, "comma-separated seed override");
    s->add_option("--threads", threads,
                  "worker threads for seed-parallel runs (0 = serial)");
  };
  add_common(app.add_subcommand(
      "run", "execute an optimize, sde or wasserstein job"));
  add_common(app.add_subcommand("sweep", "hyperparameter sweep"));
  add_common(app.add_subcommand("bounds", "derive theoretical constants"));
  add_common(
      app.add_subcommand("transfer", "two-stage transfer-learning pipeline"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    dispatch(sub, config_path, out_dir, seeds_csv, threads);
    return 0;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const BlowupError& e) {
    std::cerr << "blow-up: " << e.what() << "\n";
    return 4;
  } catch (const StageError& e) {
    std::cerr << "stage failure: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tusla
