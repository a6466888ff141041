#include "bandtaper/bayes.hpp"
#include "bandtaper/config.hpp"
#include "bandtaper/csv.hpp"
#include "bandtaper/estimators.hpp"
#include "bandtaper/jsonw.hpp"
#include "bandtaper/manifest.hpp"
#include "bandtaper/parallel.hpp"
#include "bandtaper/simulation.hpp"
#include "bandtaper/spatiotemporal.hpp"
#include "bandtaper/tuning.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace bandtaper;

namespace {

struct Ctx {
  std::uint64_t seed = 20260809;
  bool seed_given = false;
  int threads = 0;
  std::string out_dir = "out";
  bool literal_minimize = false;
  std::vector<std::string> argv;
};

class ManifestScope {
 public:
  ManifestScope(const Ctx& ctx, const std::string& command) : t0_(Clock::now()) {
    m_.command = command;
    m_.argv = ctx.argv;
    m_.seed = ctx.seed;
    m_.threads = thread_count();
    m_.started_at = iso8601_utc_now();
  }

  RunManifest& manifest() { return m_; }

  void add_output(const std::string& path) { m_.outputs.push_back(path); }

  void finish(const std::string& out_dir) {
    m_.finished_at = iso8601_utc_now();
    m_.duration_seconds =
        std::chrono::duration<double>(Clock::now() - t0_).count();
    m_.outputs.push_back("manifest.json");
    m_.write((fs::path(out_dir) / "manifest.json").string());
  }

 private:
  using Clock = std::chrono::steady_clock;
  RunManifest m_;
  Clock::time_point t0_;
};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

/// "family:loocv" or "family:k=4[,a=5]"; epsilon and tuned grids come from
/// the surrounding configuration.
MethodSpec parse_method_spec(const std::string& spec, double epsilon,
                             const std::vector<int>& k_grid,
                             const std::vector<double>& a_grid) {
  const auto colon = spec.find(':');
  MethodSpec m;
  m.family = family_from_name(colon == std::string::npos ? spec
                                                         : spec.substr(0, colon));
  const bool blockwise = m.family == MethodFamily::kBlockwise ||
                         m.family == MethodFamily::kBlockwisePpp;
  const std::string rest =
      colon == std::string::npos ? "loocv" : spec.substr(colon + 1);
  if (rest == "loocv") {
    m.tuned = true;
    for (const int k : k_grid) {
      if (blockwise) {
        for (const double a : a_grid) m.grid.push_back({k, a, epsilon});
      } else {
        m.grid.push_back({k, 0.0, epsilon});
      }
    }
    if (m.grid.empty()) throw InputError("method '" + spec + "': empty grid");
    return m;
  }
  m.tuned = false;
  bool have_k = false, have_a = false;
  std::stringstream ss(rest);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw InputError("method '" + spec + "': expected key=value, got '" +
                       part + "'");
    }
    const std::string key = part.substr(0, eq);
    const std::string val = part.substr(eq + 1);
    if (key == "k") {
      m.fixed.k = std::stoi(val);
      have_k = true;
    } else if (key == "a") {
      m.fixed.a = std::stod(val);
      have_a = true;
    } else if (key == "epsilon") {
      m.fixed.epsilon = std::stod(val);
    } else {
      throw InputError("method '" + spec + "': unknown parameter '" + key + "'");
    }
  }
  if (!have_k) throw InputError("method '" + spec + "': k is required");
  if (blockwise && !have_a) {
    throw InputError("method '" + spec + "': blockwise needs a");
  }
  if (rest.find("epsilon=") == std::string::npos) m.fixed.epsilon = epsilon;
  return m;
}

std::string cell_column(Eigen::Index n, double alpha) {
  return "n" + std::to_string(n) + "_alpha" + csv::format_double(alpha, 6);
}

Json tvalue_json(const TValue& t) {
  return t.degenerate() ? Json() : Json(*t.value);
}

void write_study_outputs(const StudyReport& rep, const StudyConfig& cfg,
                         const std::string& out_dir, ManifestScope& scope) {
  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("kind", "study");
  j.set("seed", rep.seed);
  Json cells = Json::array();
  for (const auto& c : rep.cells) {
    Json e = Json::object();
    e.set("n", static_cast<std::int64_t>(c.n));
    e.set("alpha", c.alpha);
    e.set("method", c.method);
    e.set("reps", c.reps);
    e.set("mean_loss", c.mean_loss);
    e.set("sd_loss", c.sd_loss);
    Json losses = Json::array();
    for (const double v : c.losses) losses.push(v);
    e.set("losses", std::move(losses));
    e.set("complete", c.failures.empty());
    Json fails = Json::array();
    for (const auto& f : c.failures) fails.push(f);
    e.set("failures", std::move(fails));
    cells.push(std::move(e));
  }
  j.set("cells", std::move(cells));
  write_text_file((fs::path(out_dir) / "study_report.json").string(), j.dump());
  scope.add_output("study_report.json");

  // Table-1-shaped CSV: rows = methods, columns = (n, alpha) cells.
  std::vector<std::pair<Eigen::Index, double>> cols;
  for (const Eigen::Index n : cfg.ns) {
    for (const double a : cfg.alphas) cols.emplace_back(n, a);
  }
  std::ostringstream tbl;
  tbl << "method";
  for (const auto& [n, a] : cols) tbl << "," << cell_column(n, a);
  tbl << "\n";
  for (const auto& m : cfg.methods) {
    tbl << m.label();
    for (const auto& [n, a] : cols) {
      for (const auto& c : rep.cells) {
        if (c.n == n && c.alpha == a && c.method == m.label()) {
          tbl << "," << csv::format_double(c.mean_loss, 6);
        }
      }
    }
    tbl << "\n";
  }
  write_text_file((fs::path(out_dir) / "table1.csv").string(), tbl.str());
  scope.add_output("table1.csv");
}

void write_compare_outputs(const CompareReport& rep, const CompareConfig& cfg,
                           const std::string& out_dir, ManifestScope& scope) {
  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("kind", "compare");
  j.set("seed", rep.seed);
  j.set("method_a", family_name(cfg.method_a));
  j.set("method_b", family_name(cfg.method_b));
  Json cells = Json::array();
  for (const auto& c : rep.cells) {
    Json e = Json::object();
    e.set("k", c.k);
    e.set("a", c.a);
    if (cfg.frequentist) {
      e.set("t_f", tvalue_json(c.t_f));
      e.set("t_f_degenerate", c.t_f.degenerate());
      e.set("mean_d_f", c.mean_d_f);
      Json df = Json::array();
      for (const double v : c.d_f) df.push(v);
      e.set("d_f", std::move(df));
    }
    if (cfg.bayes) {
      e.set("t_b", tvalue_json(c.t_b));
      e.set("t_b_degenerate", c.t_b.degenerate());
      e.set("mean_d_b", c.mean_d_b);
      Json db = Json::array();
      for (const double v : c.d_b) db.push(v);
      e.set("d_b", std::move(db));
    }
    cells.push(std::move(e));
  }
  j.set("cells", std::move(cells));
  write_text_file((fs::path(out_dir) / "compare_report.json").string(), j.dump());
  scope.add_output("compare_report.json");

  // Figure-1-shaped CSVs: k rows x a columns of t-values.
  const auto grid_csv = [&](bool freq) {
    std::ostringstream os;
    os << "k";
    for (const double a : cfg.a_grid) os << ",a" << csv::format_double(a, 6);
    os << "\n";
    for (const int k : cfg.k_grid) {
      os << k;
      for (const double a : cfg.a_grid) {
        for (const auto& c : rep.cells) {
          if (c.k == k && c.a == a) {
            const TValue& t = freq ? c.t_f : c.t_b;
            os << ",";
            if (t.degenerate()) {
              os << "degenerate";
            } else {
              os << csv::format_double(*t.value, 6);
            }
          }
        }
      }
      os << "\n";
    }
    return os.str();
  };
  if (cfg.frequentist) {
    write_text_file((fs::path(out_dir) / "tf_grid.csv").string(), grid_csv(true));
    scope.add_output("tf_grid.csv");
  }
  if (cfg.bayes) {
    write_text_file((fs::path(out_dir) / "tb_grid.csv").string(), grid_csv(false));
    scope.add_output("tb_grid.csv");
  }
}

void write_cv_outputs(const CVReport& rep, const std::string& method,
                      const std::string& out_dir, ManifestScope& scope) {
  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("kind", "tune");
  j.set("method", method);
  j.set("maximized", rep.maximized);
  const Candidate& sel = rep.candidates[rep.selected];
  Json selected = Json::object();
  selected.set("index", rep.selected);
  selected.set("k", sel.k);
  selected.set("a", sel.a);
  selected.set("epsilon", sel.epsilon);
  j.set("selected", std::move(selected));
  Json cands = Json::array();
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    Json e = Json::object();
    e.set("k", rep.candidates[i].k);
    e.set("a", rep.candidates[i].a);
    e.set("epsilon", rep.candidates[i].epsilon);
    e.set("score", rep.scores[i]);
    Json folds = Json::array();
    for (const double v : rep.fold_scores[i]) folds.push(v);
    e.set("fold_scores", std::move(folds));
    cands.push(std::move(e));
  }
  j.set("candidates", std::move(cands));
  Json diags = Json::array();
  for (const auto& d : rep.diagnostics) diags.push(d);
  j.set("diagnostics", std::move(diags));
  write_text_file((fs::path(out_dir) / "cv_report.json").string(), j.dump());
  scope.add_output("cv_report.json");

  std::ostringstream os;
  os << "index,k,a,epsilon,score,selected\n";
  for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
    os << i << "," << rep.candidates[i].k << ","
       << csv::format_double(rep.candidates[i].a, 6) << ","
       << csv::format_double(rep.candidates[i].epsilon, 6) << ","
       << csv::format_double(rep.scores[i], 6) << ","
       << (static_cast<int>(i) == rep.selected ? 1 : 0) << "\n";
  }
  write_text_file((fs::path(out_dir) / "cv_scores.csv").string(), os.str());
  scope.add_output("cv_scores.csv");
}

int cmd_estimate(const Ctx& ctx, const std::string& data_path,
                 Eigen::Index p0, const std::string& method_spec,
                 double epsilon, bool center_data, int draws) {
  ManifestScope scope(ctx, "estimate");
  scope.manifest().add_input(data_path);
  const DataMatrix z = csv::read_matrix(data_path);
  if (p0 < 1 || p0 >= z.cols()) {
    throw InputError("estimate: need 1 <= p0 < p (data has " +
                     std::to_string(z.cols()) + " columns)");
  }
  const Partition part(z.cols(), p0);
  const MethodSpec m = parse_method_spec(method_spec, epsilon, {}, {});
  if (m.tuned) {
    throw InputError("estimate: pass fixed parameters (use the tune command "
                     "to select them)");
  }
  scope.manifest().config = {
      {"cli.data", data_path},
      {"cli.p0", std::to_string(p0)},
      {"cli.method", method_spec},
      {"cli.epsilon", csv::format_double(epsilon, 17)},
      {"cli.center", center_data ? "true" : "false"},
      {"cli.draws", std::to_string(draws)},
  };

  const CovMatrix s = sample_covariance(z, center_data);
  CoefMatrix c;
  if (is_ppp_family(m.family)) {
    const IWParams post = iw_posterior(IWParams::default_prior(part.p),
                                       center_data ? center(z).first : z);
    std::vector<PppTransform> tr;
    switch (m.family) {
      case MethodFamily::kTaperingPpp:
        tr.push_back(PppTransform::tapering(m.fixed.k, m.fixed.epsilon, part));
        break;
      case MethodFamily::kBlockwisePpp:
        tr.push_back(PppTransform::blockwise(m.fixed.k, m.fixed.a,
                                             m.fixed.epsilon, part));
        break;
      default:
        tr.push_back(PppTransform::banding(m.fixed.k, m.fixed.epsilon, part));
    }
    c = ppp_means(post, tr, draws, ctx.seed)[0];
  } else {
    c = detail::fit_point(m.family, m.fixed, s, part);
  }

  fs::create_directories(ctx.out_dir);
  std::vector<std::string> header(p0);
  for (Eigen::Index i = 0; i < p0; ++i) header[i] = "x" + std::to_string(i + 1);
  csv::write_matrix((fs::path(ctx.out_dir) / "coefficients.csv").string(), c,
                    header, 17);
  scope.add_output("coefficients.csv");
  scope.finish(ctx.out_dir);
  return 0;
}

int cmd_tune(const Ctx& ctx, const std::string& data_path, Eigen::Index p0,
             const std::string& family, const std::string& k_grid_str,
             const std::string& a_grid_str, double epsilon, int fold_draws,
             bool center_data) {
  ManifestScope scope(ctx, "tune");
  scope.manifest().add_input(data_path);
  DataMatrix z = csv::read_matrix(data_path);
  if (center_data) z = center(z).first;
  if (p0 < 1 || p0 >= z.cols()) {
    throw InputError("tune: need 1 <= p0 < p");
  }
  const Partition part(z.cols(), p0);

  Config flags;
  flags.set("grid.k", k_grid_str);
  flags.set("grid.a", a_grid_str);
  TuningGrid grid;
  grid.method = family_from_name(family);
  const bool blockwise = grid.method == MethodFamily::kBlockwise ||
                         grid.method == MethodFamily::kBlockwisePpp;
  for (const auto k : flags.get_int_list("grid.k")) {
    if (blockwise) {
      for (const double a : flags.get_double_list("grid.a")) {
        grid.candidates.push_back({static_cast<int>(k), a, epsilon});
      }
    } else {
      grid.candidates.push_back({static_cast<int>(k), 0.0, epsilon});
    }
  }
  scope.manifest().config = {
      {"cli.data", data_path},
      {"cli.p0", std::to_string(p0)},
      {"cli.method", family},
      {"cli.k_grid", k_grid_str},
      {"cli.a_grid", a_grid_str},
      {"cli.epsilon", csv::format_double(epsilon, 17)},
      {"cli.fold_draws", std::to_string(fold_draws)},
      {"cli.center", center_data ? "true" : "false"},
  };

  CVOptions opts;
  opts.literal_minimize = ctx.literal_minimize;
  CVReport rep;
  if (is_ppp_family(grid.method)) {
    rep = loocv_bayes(z, part, IWParams::default_prior(part.p), grid,
                      fold_draws, ctx.seed, opts);
  } else {
    rep = loocv_frequentist(z, part, grid, opts);
  }

  fs::create_directories(ctx.out_dir);
  write_cv_outputs(rep, family, ctx.out_dir, scope);
  scope.finish(ctx.out_dir);
  return 0;
}

int cmd_study(const Ctx& ctx, const std::string& config_path) {
  ManifestScope scope(ctx, "study");
  scope.manifest().add_input(config_path);
  Config cfg = Config::from_file(config_path);
  cfg.apply_env_overrides();

  StudyConfig sc;
  sc.p = cfg.get_int("truth.p");
  sc.rho = cfg.get_double("truth.rho", 0.6);
  sc.floor = cfg.get_double("truth.floor", 0.5);
  sc.alphas = cfg.get_double_list("truth.alphas");
  sc.ns.clear();
  for (const auto n : cfg.get_int_list("data.ns")) sc.ns.push_back(n);
  sc.p0 = cfg.get_int("data.p0");
  sc.reps = static_cast<int>(cfg.get_int("study.reps"));
  sc.seed = ctx.seed_given ? ctx.seed : cfg.get_u64("study.seed", ctx.seed);
  sc.ppp_draws = static_cast<int>(cfg.get_int("study.ppp_draws", 1000));
  sc.fold_draws = static_cast<int>(cfg.get_int("study.fold_draws", 50));
  sc.literal_minimize = ctx.literal_minimize;
  const double epsilon = cfg.get_double("study.epsilon", 0.5);

  std::vector<int> k_grid;
  for (const auto k : cfg.has("study.k_grid")
                          ? cfg.get_int_list("study.k_grid")
                          : std::vector<std::int64_t>{2, 3, 4, 5, 6, 7, 8, 9, 10}) {
    k_grid.push_back(static_cast<int>(k));
  }
  const std::vector<double> a_grid =
      cfg.has("study.a_grid") ? cfg.get_double_list("study.a_grid")
                              : std::vector<double>{5.0, 10.0, 20.0};
  for (const std::string& spec : split_ws(cfg.get_string("study.methods"))) {
    sc.methods.push_back(parse_method_spec(spec, epsilon, k_grid, a_grid));
  }

  scope.manifest().seed = sc.seed;
  scope.manifest().config = cfg.entries();

  const StudyReport rep = risk_mc(sc);
  fs::create_directories(ctx.out_dir);
  write_study_outputs(rep, sc, ctx.out_dir, scope);
  scope.finish(ctx.out_dir);
  for (const auto& c : rep.cells) {
    if (!c.failures.empty()) {
      warn("study cell (" + c.method + ", n=" + std::to_string(c.n) +
           ") incomplete: " + std::to_string(c.failures.size()) +
           " replication(s) failed");
    }
  }
  return 0;
}

int cmd_compare(const Ctx& ctx, const std::string& config_path) {
  ManifestScope scope(ctx, "compare");
  scope.manifest().add_input(config_path);
  Config cfg = Config::from_file(config_path);
  cfg.apply_env_overrides();

  CompareConfig cc;
  cc.truth.p = cfg.get_int("truth.p");
  cc.truth.rho = cfg.get_double("truth.rho", 0.6);
  cc.truth.alpha = cfg.get_double("truth.alpha", 0.1);
  cc.truth.floor = cfg.get_double("truth.floor", 0.5);
  cc.n = cfg.get_int("data.n");
  cc.p0 = cfg.get_int("data.p0");
  cc.reps = static_cast<int>(cfg.get_int("compare.reps"));
  cc.epsilon = cfg.get_double("compare.epsilon", 0.5);
  cc.seed = ctx.seed_given ? ctx.seed : cfg.get_u64("compare.seed", ctx.seed);
  cc.k_grid.clear();
  for (const auto k : cfg.get_int_list("compare.k_grid")) {
    cc.k_grid.push_back(static_cast<int>(k));
  }
  cc.a_grid = cfg.get_double_list("compare.a_grid");
  cc.frequentist = cfg.get_bool("compare.frequentist", true);
  cc.bayes = cfg.get_bool("compare.bayes", true);
  cc.ppp_draws = static_cast<int>(cfg.get_int("compare.ppp_draws", 1000));
  cc.method_a = family_from_name(cfg.get_string("compare.method_a", "tapering"));
  cc.method_b = family_from_name(cfg.get_string("compare.method_b", "blockwise"));

  scope.manifest().seed = cc.seed;
  scope.manifest().config = cfg.entries();

  const CompareReport rep = compare_study(cc);
  fs::create_directories(ctx.out_dir);
  write_compare_outputs(rep, cc, ctx.out_dir, scope);
  scope.finish(ctx.out_dir);
  return 0;
}

int cmd_rate(const Ctx& ctx, double alpha, const std::string& n_list_str,
             int reps, double a, double rho, double epsilon) {
  ManifestScope scope(ctx, "rate");
  Config flags;
  flags.set("rate.n_list", n_list_str);
  RateConfig rc;
  rc.alpha = alpha;
  rc.n_list.clear();
  for (const auto n : flags.get_int_list("rate.n_list")) rc.n_list.push_back(n);
  rc.reps = reps;
  rc.seed = ctx.seed;
  rc.a = a;
  rc.rho = rho;
  rc.fixed_epsilon = epsilon;
  scope.manifest().config = {
      {"cli.alpha", csv::format_double(alpha, 17)},
      {"cli.n_list", n_list_str},
      {"cli.reps", std::to_string(reps)},
      {"cli.a", csv::format_double(a, 17)},
      {"cli.rho", csv::format_double(rho, 17)},
      {"cli.epsilon", csv::format_double(epsilon, 17)},
  };

  const RateReport rep = rate_study(rc);

  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("kind", "rate");
  j.set("seed", rep.seed);
  j.set("alpha", rep.alpha);
  j.set("slope", rep.slope);
  Json pts = Json::array();
  for (const auto& p : rep.points) {
    Json e = Json::object();
    e.set("n", static_cast<std::int64_t>(p.n));
    e.set("p", static_cast<std::int64_t>(p.p));
    e.set("p0", static_cast<std::int64_t>(p.p0));
    e.set("k", p.k);
    e.set("epsilon", p.epsilon);
    e.set("mean_sq_loss", p.mean_sq_loss);
    pts.push(std::move(e));
  }
  j.set("points", std::move(pts));
  fs::create_directories(ctx.out_dir);
  write_text_file((fs::path(ctx.out_dir) / "rate_report.json").string(),
                  j.dump());
  scope.add_output("rate_report.json");

  std::ostringstream os;
  os << "n,p,p0,k,epsilon,mean_sq_loss\n";
  for (const auto& p : rep.points) {
    os << p.n << "," << p.p << "," << p.p0 << "," << p.k << ","
       << csv::format_double(p.epsilon, 6) << ","
       << csv::format_double(p.mean_sq_loss, 6) << "\n";
  }
  write_text_file((fs::path(ctx.out_dir) / "rate_points.csv").string(), os.str());
  scope.add_output("rate_points.csv");
  scope.finish(ctx.out_dir);
  return 0;
}

int cmd_decay(const Ctx& ctx, Eigen::Index p, double rho, double alpha,
              double a, const std::string& k_list_str) {
  ManifestScope scope(ctx, "decay");
  Config flags;
  flags.set("decay.k_list", k_list_str);
  scope.manifest().config = {
      {"cli.p", std::to_string(p)},
      {"cli.rho", csv::format_double(rho, 17)},
      {"cli.alpha", csv::format_double(alpha, 17)},
      {"cli.a", csv::format_double(a, 17)},
      {"cli.k_list", k_list_str},
  };
  const CovMatrix sigma0 = make_sigma0({p, rho, alpha, 0.5});

  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("kind", "decay");
  j.set("p", static_cast<std::int64_t>(p));
  j.set("rho", rho);
  j.set("alpha", alpha);
  j.set("a", a);
  Json entries = Json::array();
  std::ostringstream os;
  os << "k,threshold,value\n";
  for (const auto k64 : flags.get_int_list("decay.k_list")) {
    const int k = static_cast<int>(k64);
    const double value = precision_decay(sigma0, k, a);
    const double threshold = a * k * std::log(static_cast<double>(k));
    Json e = Json::object();
    e.set("k", k);
    e.set("threshold", threshold);
    e.set("value", value);
    entries.push(std::move(e));
    os << k << "," << csv::format_double(threshold, 6) << ","
       << csv::format_double(value, 6) << "\n";
  }
  j.set("entries", std::move(entries));
  fs::create_directories(ctx.out_dir);
  write_text_file((fs::path(ctx.out_dir) / "decay_report.json").string(),
                  j.dump());
  scope.add_output("decay_report.json");
  write_text_file((fs::path(ctx.out_dir) / "decay.csv").string(), os.str());
  scope.add_output("decay.csv");
  scope.finish(ctx.out_dir);
  return 0;
}

int cmd_forecast(const Ctx& ctx, const std::string& panel_path, Eigen::Index t0,
                 const std::vector<std::string>& method_specs, double epsilon,
                 int draws) {
  ManifestScope scope(ctx, "forecast");
  scope.manifest().add_input(panel_path);
  std::vector<std::string> dropped;
  const Panel panel = read_panel_csv(panel_path, &dropped);
  const ForecastTask task(t0, panel.s_count, panel.t_count);
  std::vector<MethodSpec> methods;
  for (const auto& spec : method_specs) {
    methods.push_back(parse_method_spec(spec, epsilon, {}, {}));
  }
  scope.manifest().config = {
      {"cli.panel", panel_path},
      {"cli.t0", std::to_string(t0)},
      {"cli.epsilon", csv::format_double(epsilon, 17)},
      {"cli.draws", std::to_string(draws)},
  };
  for (std::size_t i = 0; i < method_specs.size(); ++i) {
    scope.manifest().config.emplace_back("cli.method" + std::to_string(i),
                                         method_specs[i]);
  }

  ForecastOptions opts;
  opts.ppp_draws = draws;
  opts.seed = ctx.seed;
  const ForecastReport rep = run_forecast(panel, task, methods, opts);

  Json j = Json::object();
  j.set("tool", kToolName);
  j.set("version", kToolVersion);
  j.set("kind", "forecast");
  j.set("s", static_cast<std::int64_t>(panel.s_count));
  j.set("t", static_cast<std::int64_t>(panel.t_count));
  j.set("t0", static_cast<std::int64_t>(t0));
  j.set("n_units", static_cast<std::int64_t>(panel.size()));
  j.set("n_train", static_cast<std::int64_t>(rep.n_train));
  j.set("n_test", static_cast<std::int64_t>(rep.n_test));
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json e = Json::object();
    e.set("method", r.method);
    e.set("error", r.error);
    rows.push(std::move(e));
  }
  j.set("rows", std::move(rows));
  Json drops = Json::array();
  for (const auto& d : dropped) drops.push(d);
  j.set("dropped_units", std::move(drops));
  fs::create_directories(ctx.out_dir);
  write_text_file((fs::path(ctx.out_dir) / "forecast_report.json").string(),
                  j.dump());
  scope.add_output("forecast_report.json");

  std::ostringstream os;
  os << "method,error\n";
  for (const auto& r : rep.rows) {
    os << r.method << "," << csv::format_double(r.error, 6) << "\n";
  }
  write_text_file((fs::path(ctx.out_dir) / "forecast_table.csv").string(),
                  os.str());
  scope.add_output("forecast_table.csv");
  scope.finish(ctx.out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Ctx ctx;
  ctx.argv.assign(argv, argv + argc);

  CLI::App app{"Minimax estimation of the conditional mean operator under "
               "bandable covariance: tapering, blockwise tapering and banding "
               "estimators, their post-processed posteriors, tuning and "
               "simulation harness"};
  app.require_subcommand(1);
  app.add_option("--seed", ctx.seed, "RNG seed")->capture_default_str();
  app.add_option("--threads", ctx.threads,
                 "worker threads (0 = hardware)")->capture_default_str();
  app.add_option("--out", ctx.out_dir, "output directory")->capture_default_str();
  app.add_flag("--paper-literal-minimize", ctx.literal_minimize,
               "select CV candidates by minimizing the log-likelihood sum "
               "(the literal published rule) instead of maximizing");

  // estimate
  std::string data_path, method_spec = "tapering:k=4";
  Eigen::Index p0 = 0;
  double epsilon = 0.5;
  bool center_data = false;
  int draws = 1000;
  auto* est = app.add_subcommand("estimate",
                                 "fit one estimator on a CSV data matrix");
  est->add_option("--data", data_path, "CSV with header row, rows = samples")
      ->required();
  est->add_option("--p0", p0, "covariate dimension (first p0 columns)")
      ->required();
  est->add_option("--method", method_spec,
                  "family:k=K[,a=A][,epsilon=E], e.g. blockwise:k=4,a=5")
      ->capture_default_str();
  est->add_option("--epsilon", epsilon, "PD-adjustment level")
      ->capture_default_str();
  est->add_flag("--center", center_data, "subtract column means first");
  est->add_option("--draws", draws, "posterior draws for PPP methods")
      ->capture_default_str();

  // tune
  std::string tune_family = "tapering", k_grid_str = "2:10",
              a_grid_str = "5,10,20";
  int fold_draws = 50;
  auto* tune = app.add_subcommand("tune", "leave-one-out cross-validation");
  tune->add_option("--data", data_path, "CSV data matrix")->required();
  tune->add_option("--p0", p0, "covariate dimension")->required();
  tune->add_option("--method", tune_family,
                   "tapering|blockwise|banding|tapering-ppp|blockwise-ppp|"
                   "banding-ppp")
      ->capture_default_str();
  tune->add_option("--k-grid", k_grid_str, "k candidates, e.g. 2:10 or 2,4,8")
      ->capture_default_str();
  tune->add_option("--a-grid", a_grid_str, "a candidates (blockwise families)")
      ->capture_default_str();
  tune->add_option("--epsilon", epsilon, "PD-adjustment level")
      ->capture_default_str();
  tune->add_option("--fold-draws", fold_draws,
                   "posterior draws per fold (Bayesian CV)")
      ->capture_default_str();
  tune->add_flag("--center", center_data, "subtract column means first");

  // study / compare
  std::string config_path;
  auto* study = app.add_subcommand("study", "Monte-Carlo risk study");
  study->add_option("--config", config_path, "study configuration file")
      ->required();
  auto* compare = app.add_subcommand(
      "compare", "paired error-reduction study (t-value grids)");
  compare->add_option("--config", config_path, "compare configuration file")
      ->required();

  // rate
  double rate_alpha = 0.5, rate_a = 1.0, rate_rho = 0.6, rate_eps = -1.0;
  std::string n_list_str = "100,200,400,800";
  int rate_reps = 30;
  auto* rate = app.add_subcommand("rate", "convergence-rate slope study");
  rate->add_option("--alpha", rate_alpha, "decay exponent of the truth")
      ->capture_default_str();
  rate->add_option("--n-list", n_list_str, "sample sizes (increasing)")
      ->capture_default_str();
  rate->add_option("--reps", rate_reps, "replications per n")
      ->capture_default_str();
  rate->add_option("--a", rate_a, "blockwise a parameter")
      ->capture_default_str();
  rate->add_option("--rho", rate_rho, "truth rho")->capture_default_str();
  rate->add_option("--epsilon", rate_eps,
                   "fixed epsilon (< 0: schedule sqrt(k/n) capped at 0.5)")
      ->capture_default_str();

  // decay
  Eigen::Index decay_p = 200;
  double decay_rho = 0.6, decay_alpha = 0.3, decay_a = 5.0;
  std::string k_list_str = "3,5,8";
  auto* decay = app.add_subcommand(
      "decay", "precision-matrix tail decay diagnostic");
  decay->add_option("--p", decay_p, "dimension")->capture_default_str();
  decay->add_option("--rho", decay_rho, "truth rho")->capture_default_str();
  decay->add_option("--alpha", decay_alpha, "truth alpha")->capture_default_str();
  decay->add_option("--a", decay_a, "offset multiplier")->capture_default_str();
  decay->add_option("--k-list", k_list_str, "bandwidths")->capture_default_str();

  // forecast
  std::string panel_path;
  Eigen::Index t0 = 17;
  std::vector<std::string> forecast_methods;
  auto* forecast = app.add_subcommand(
      "forecast", "spatio-temporal trailing-block forecast on a panel CSV");
  forecast->add_option("--panel", panel_path, "panel CSV")->required();
  forecast->add_option("--t0", t0, "cut time index (train on times 1..t0)")
      ->capture_default_str();
  forecast->add_option("--method", forecast_methods,
                       "method spec (repeatable), e.g. tapering:k=4")
      ->required();
  forecast->add_option("--epsilon", epsilon, "PD-adjustment level")
      ->capture_default_str();
  forecast->add_option("--draws", draws, "posterior draws for PPP methods")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  ctx.seed_given = app.count("--seed") > 0;
  set_thread_count(ctx.threads);

  try {
    if (est->parsed()) {
      return cmd_estimate(ctx, data_path, p0, method_spec, epsilon, center_data,
                          draws);
    }
    if (tune->parsed()) {
      return cmd_tune(ctx, data_path, p0, tune_family, k_grid_str, a_grid_str,
                      epsilon, fold_draws, center_data);
    }
    if (study->parsed()) return cmd_study(ctx, config_path);
    if (compare->parsed()) return cmd_compare(ctx, config_path);
    if (rate->parsed()) {
      return cmd_rate(ctx, rate_alpha, n_list_str, rate_reps, rate_a, rate_rho,
                      rate_eps);
    }
    if (decay->parsed()) {
      return cmd_decay(ctx, decay_p, decay_rho, decay_alpha, decay_a,
                       k_list_str);
    }
    if (forecast->parsed()) {
      return cmd_forecast(ctx, panel_path, t0, forecast_methods, epsilon, draws);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
