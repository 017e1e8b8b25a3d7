// npthresh command line tool: threshold detection on CSV data, the critical
// value table and the simulation experiments.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "npthresh/npthresh.hpp"

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitEstimation = 4;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

json interval_json(const npthresh::RegimeInterval& r) {
  json j;
  j["lo"] = std::isfinite(r.lo) ? json(r.lo) : json(nullptr);
  j["hi"] = std::isfinite(r.hi) ? json(r.hi) : json(nullptr);
  return j;
}

json vector_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

json report_json(const npthresh::SequentialTestReport& report) {
  json round;
  round["s_null"] = report.s_null;
  round["f_stat"] = report.f_stat;
  round["critical_value"] = report.critical_value;
  round["alpha"] = report.alpha;
  round["reject"] = report.reject;
  round["p_value"] = npthresh::p_value(
      report.f_stat, static_cast<int>(report.per_regime.size()));
  round["regimes"] = json::array();
  for (const auto& r : report.per_regime) {
    json jr;
    jr["interval"] = interval_json(r.grid.regime);
    jr["taus"] = r.grid.taus;
    jr["used"] = r.used;
    jr["gamma_tilde"] = vector_json(r.gamma_tilde);
    jr["xi_hat"] = vector_json(r.xi_hat);
    jr["sigma2_hat"] = vector_json(r.sigma2_hat);
    jr["delta_star"] = vector_json(r.delta_star);
    jr["z"] = r.z;
    round["regimes"].push_back(std::move(jr));
  }
  round["skipped"] = json::array();
  for (const auto& s : report.skipped) {
    json js = interval_json(s.interval);
    js["reason"] = s.reason;
    round["skipped"].push_back(std::move(js));
  }
  return round;
}

struct DetectOptions {
  npthresh::DatasetSpec dataset;
  double c = 1.0;
  double delta = 4.25;
  std::optional<double> scale;
  double alpha = 0.05;
  int m = 7;
  int grid_points = 100;
  double trim = 0.05;
  int min_regime_obs = 10;
  int max_thresholds = 5;
  std::vector<double> box_lo, box_hi;
  std::uint64_t seed = 1;
  int threads = 0;
  bool text = false;
};

// Box from flags, broadcast if a single bound is given; otherwise the
// per-dimension 5th-95th percentile span of the covariates.
npthresh::WeightBox resolve_box(const npthresh::Sample& sample,
                                std::vector<double> lo, std::vector<double> hi) {
  const Eigen::Index p = sample.p();
  npthresh::WeightBox box;
  if (lo.empty() != hi.empty()) {
    throw npthresh::DomainError("--box-lo and --box-hi must come together");
  }
  if (!lo.empty()) {
    if (lo.size() == 1 && p > 1) lo.assign(p, lo[0]);
    if (hi.size() == 1 && p > 1) hi.assign(p, hi[0]);
    if (static_cast<Eigen::Index>(lo.size()) != p ||
        static_cast<Eigen::Index>(hi.size()) != p) {
      throw npthresh::DomainError(
          "--box-lo/--box-hi need one value per covariate");
    }
    box.lower = Eigen::Map<Eigen::VectorXd>(lo.data(), p);
    box.upper = Eigen::Map<Eigen::VectorXd>(hi.data(), p);
    box.validate();
    return box;
  }
  box.lower.resize(p);
  box.upper.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<double> col(sample.x.col(j).data(),
                            sample.x.col(j).data() + sample.n());
    std::sort(col.begin(), col.end());
    const auto at = [&](double q) {
      const double pos = q * (col.size() - 1);
      return col[static_cast<std::size_t>(pos)];
    };
    box.lower[j] = at(0.05);
    box.upper[j] = at(0.95);
  }
  box.validate();
  return box;
}

double default_scale(const npthresh::Sample& sample) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < sample.p(); ++j) {
    const double mean = sample.x.col(j).mean();
    const double var = (sample.x.col(j).array() - mean).square().sum() /
                       (sample.n() - 1);
    total += std::sqrt(var);
  }
  return total / sample.p();
}

int run_detect(const DetectOptions& opt) {
  npthresh::parallel::set_thread_count(opt.threads);
  const auto t_start = Clock::now();
  const npthresh::LoadResult loaded = npthresh::load_csv(opt.dataset);
  const double load_seconds = seconds_since(t_start);
  const npthresh::Sample& sample = loaded.sample;

  const double scale = opt.scale ? *opt.scale : default_scale(sample);
  npthresh::KernelConfig config = npthresh::KernelConfig::resolved(
      sample.n(), static_cast<int>(sample.p()), opt.c, opt.delta, scale);
  config.min_regime_obs = opt.min_regime_obs;
  npthresh::SearchConfig search;
  search.grid_points = opt.grid_points;
  search.trim_fraction = opt.trim;
  search.max_thresholds = opt.max_thresholds;
  search.alpha = opt.alpha;
  search.m = opt.m;
  search.validate();
  const npthresh::WeightBox box = resolve_box(sample, opt.box_lo, opt.box_hi);

  const auto t_detect = Clock::now();
  const npthresh::DetectionResult result =
      npthresh::detect(sample, config, search, box);
  const double detect_seconds = seconds_since(t_detect);

  json out;
  out["schema_version"] = npthresh::kReportSchemaVersion;
  out["tool_version"] = npthresh::kVersion;
  out["command"] = "detect";
  json cfg;
  cfg["input"] = opt.dataset.path;
  cfg["y"] = opt.dataset.y_column;
  cfg["x"] = opt.dataset.x_columns;
  cfg["q"] = opt.dataset.q_column;
  cfg["has_header"] = opt.dataset.has_header;
  cfg["c"] = opt.c;
  cfg["delta"] = opt.delta;
  cfg["scale"] = scale;
  cfg["h"] = config.h;
  cfg["alpha"] = opt.alpha;
  cfg["m"] = opt.m;
  cfg["grid_points"] = opt.grid_points;
  cfg["trim"] = opt.trim;
  cfg["min_regime_obs"] = opt.min_regime_obs;
  cfg["max_thresholds"] = opt.max_thresholds;
  cfg["box_lo"] = std::vector<double>(box.lower.data(),
                                      box.lower.data() + box.lower.size());
  cfg["box_hi"] = std::vector<double>(box.upper.data(),
                                      box.upper.data() + box.upper.size());
  cfg["seed"] = opt.seed;
  cfg["threads"] = opt.threads;
  out["config"] = std::move(cfg);
  out["data"] = {{"rows_used", sample.n()},
                 {"rows_dropped", loaded.rows_dropped},
                 {"p", sample.p()}};

  json detection;
  detection["s_hat"] = result.s_hat;
  detection["thresholds"] = result.gammas;
  // Percentile of each threshold within the input Q distribution; derived
  // output, not part of the estimation itself.
  json percentiles = json::array();
  for (double g : result.gammas) {
    Eigen::Index below = 0;
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
      if (sample.q[i] <= g) ++below;
    }
    percentiles.push_back(100.0 * static_cast<double>(below) /
                          static_cast<double>(sample.n()));
  }
  detection["threshold_percentiles"] = std::move(percentiles);
  detection["round_ssr"] = result.round_ssr;
  detection["cap_reached"] = result.cap_reached;
  detection["rounds"] = json::array();
  for (const auto& report : result.reports) {
    detection["rounds"].push_back(report_json(report));
  }
  out["detection"] = std::move(detection);
  out["timing"] = {{"load_seconds", load_seconds},
                   {"detect_seconds", detect_seconds}};

  if (opt.text) {
    std::printf("thresholds detected: %d\n", result.s_hat);
    for (int i = 0; i < result.s_hat; ++i) {
      std::printf("  gamma_%d = %.6g\n", i + 1, result.gammas[i]);
    }
    for (const auto& report : result.reports) {
      std::printf("test s=%d: F=%.4f cv=%.4f %s\n", report.s_null,
                  report.f_stat, report.critical_value,
                  report.reject ? "reject" : "accept");
    }
    if (result.cap_reached) std::printf("threshold cap reached\n");
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return 0;
}

int run_critical_values(int k_max, std::vector<double> alphas, bool text) {
  if (alphas.empty()) alphas = {0.10, 0.05, 0.01};
  json rows = json::array();
  for (int k = 1; k <= k_max; ++k) {
    json row;
    row["k"] = k;
    row["values"] = json::array();
    for (double a : alphas) {
      row["values"].push_back(npthresh::critical_value(k, a));
    }
    rows.push_back(std::move(row));
  }
  if (text) {
    std::printf("%-6s", "s+1");
    for (double a : alphas) std::printf("%12.6g%%", 100.0 * a);
    std::printf("\n");
    for (int k = 1; k <= k_max; ++k) {
      std::printf("%-6d", k);
      for (double a : alphas) {
        std::printf("%13.6f", npthresh::critical_value(k, a));
      }
      std::printf("\n");
    }
  } else {
    json out;
    out["schema_version"] = npthresh::kReportSchemaVersion;
    out["tool_version"] = npthresh::kVersion;
    out["command"] = "critical-values";
    out["alphas"] = alphas;
    out["rows"] = std::move(rows);
    std::cout << out.dump(2) << "\n";
  }
  return 0;
}

int run_simulate(const std::string& mode, const npthresh::SimConfig& sim,
                 const std::vector<double>& box_lo,
                 const std::vector<double>& box_hi, int threads, bool text) {
  npthresh::parallel::set_thread_count(threads);
  npthresh::WeightBox box = npthresh::default_sim_box();
  if (!box_lo.empty() || !box_hi.empty()) {
    if (box_lo.size() != 1 || box_hi.size() != 1) {
      throw npthresh::DomainError(
          "simulate uses one-dimensional covariates: give one --box-lo/--box-hi");
    }
    box.lower = Eigen::VectorXd::Constant(1, box_lo[0]);
    box.upper = Eigen::VectorXd::Constant(1, box_hi[0]);
    box.validate();
  }
  json out;
  out["schema_version"] = npthresh::kReportSchemaVersion;
  out["tool_version"] = npthresh::kVersion;
  out["command"] = "simulate";
  out["mode"] = mode;
  json cfg;
  cfg["n"] = sim.n;
  cfg["reps"] = sim.reps;
  cfg["seed"] = sim.seed;
  cfg["c"] = sim.c;
  cfg["delta"] = sim.delta;
  cfg["m"] = sim.m;
  cfg["alphas"] = sim.alphas;
  cfg["threads"] = threads;
  const auto start = Clock::now();
  if (mode == "size") {
    cfg["box_lo"] = box.lower[0];
    cfg["box_hi"] = box.upper[0];
    const npthresh::SizeTable table = npthresh::size_experiment(sim, box);
    out["config"] = std::move(cfg);
    json jt;
    jt["n"] = table.n;
    jt["reps"] = table.reps;
    jt["errors"] = table.errors;
    jt["alphas"] = table.alphas;
    jt["rejection_rate"] = table.rejection_rate;
    jt["monte_carlo_se"] = table.monte_carlo_se;
    out["table"] = std::move(jt);
    out["timing"] = {{"simulate_seconds", seconds_since(start)}};
    if (text) {
      std::cout << table.to_text();
    } else {
      std::cout << out.dump(2) << "\n";
    }
  } else {
    const npthresh::EstimationTable table = npthresh::estimation_experiment(sim);
    out["config"] = std::move(cfg);
    json jt;
    jt["n"] = table.n;
    jt["reps"] = table.reps;
    jt["errors"] = table.errors;
    jt["truth"] = table.truth;
    jt["mean"] = table.mean;
    jt["se"] = table.se;
    jt["mse"] = table.mse;
    out["table"] = std::move(jt);
    out["timing"] = {{"simulate_seconds", seconds_since(start)}};
    if (text) {
      std::cout << table.to_text();
    } else {
      std::cout << out.dump(2) << "\n";
    }
  }
  return 0;
}

int fail(int code, const std::string& type, const std::string& message) {
  json err;
  err["error"] = {{"exit_code", code}, {"type", type}, {"message", message}};
  std::cout << err.dump(2) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-threshold detection for nonparametric regression"};
  app.require_subcommand(1);

  DetectOptions opt;
  CLI::App* detect = app.add_subcommand(
      "detect", "Detect thresholds in a CSV dataset");
  detect->add_option("--input", opt.dataset.path, "CSV file")->required();
  detect->add_option("--y", opt.dataset.y_column, "response column")->required();
  detect->add_option("--x", opt.dataset.x_columns, "covariate column (repeatable)")
      ->required();
  detect->add_option("--q", opt.dataset.q_column, "threshold variable column")
      ->required();
  detect->add_flag("--no-header", [&opt](std::int64_t) {
    opt.dataset.has_header = false;
  }, "columns are 0-based indices instead of header names");
  detect->add_option("--c", opt.c, "bandwidth constant")
      ->check(CLI::PositiveNumber);
  detect->add_option("--delta", opt.delta, "bandwidth rate exponent")
      ->check(CLI::PositiveNumber);
  detect->add_option("--scale", opt.scale,
                     "bandwidth scale (default: sd of the covariates)")
      ->check(CLI::PositiveNumber);
  detect->add_option("--alpha", opt.alpha, "test level")
      ->check(CLI::Range(1e-9, 0.999999));
  detect->add_option("--m", opt.m, "candidate grid size")->check(CLI::PositiveNumber);
  detect->add_option("--grid-points", opt.grid_points, "search grid size")
      ->check(CLI::Range(3, 1000000));
  detect->add_option("--trim", opt.trim, "per-side search trim fraction")
      ->check(CLI::Range(0.0, 0.499999));
  detect->add_option("--min-regime-obs", opt.min_regime_obs,
                     "minimum observations per regime")
      ->check(CLI::PositiveNumber);
  detect->add_option("--max-thresholds", opt.max_thresholds,
                     "cap on detected thresholds")
      ->check(CLI::PositiveNumber);
  detect->add_option("--box-lo", opt.box_lo, "weight box lower bound (per dim)");
  detect->add_option("--box-hi", opt.box_hi, "weight box upper bound (per dim)");
  detect->add_option("--seed", opt.seed, "seed echoed into the report");
  detect->add_option("--threads", opt.threads, "worker threads (0 = auto)");
  detect->add_flag("--text,!--json", opt.text, "plain text instead of JSON");

  int cv_k = 5;
  std::vector<double> cv_alphas;
  bool cv_text = false;
  CLI::App* crit = app.add_subcommand("critical-values",
                                      "Print the critical value table");
  crit->add_option("--k", cv_k, "largest number of regimes")
      ->check(CLI::Range(1, 1000));
  crit->add_option("--alpha", cv_alphas, "levels (repeatable)")
      ->check(CLI::Range(1e-9, 0.999999));
  crit->add_flag("--text,!--json", cv_text, "plain text instead of JSON");

  npthresh::SimConfig sim;
  std::string sim_mode;
  std::vector<double> sim_box_lo, sim_box_hi;
  int sim_threads = 0;
  bool sim_text = false;
  std::int64_t sim_n = 500;
  CLI::App* simulate = app.add_subcommand("simulate",
                                          "Run a simulation experiment");
  simulate->add_option("mode", sim_mode, "experiment: size or estimation")
      ->required()
      ->check(CLI::IsMember({"size", "estimation"}));
  simulate->add_option("--n", sim_n, "sample size")->check(CLI::Range(50, 100000000));
  simulate->add_option("--reps", sim.reps, "replications")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--c", sim.c, "bandwidth constant")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--delta", sim.delta, "bandwidth rate exponent")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--m", sim.m, "candidate grid size")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--alpha", sim.alphas, "levels (repeatable)")
      ->check(CLI::Range(1e-9, 0.999999));
  simulate->add_option("--box-lo", sim_box_lo, "weight box lower bound");
  simulate->add_option("--box-hi", sim_box_hi, "weight box upper bound");
  simulate->add_option("--threads", sim_threads, "worker threads (0 = auto)");
  simulate->add_flag("--text,!--json", sim_text, "plain text instead of JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*detect) return run_detect(opt);
    if (*crit) return run_critical_values(cv_k, cv_alphas, cv_text);
    sim.n = sim_n;
    return run_simulate(sim_mode, sim, sim_box_lo, sim_box_hi, sim_threads,
                        sim_text);
  } catch (const npthresh::DataError& e) {
    return fail(kExitData, "data", e.what());
  } catch (const npthresh::DomainError& e) {
    return fail(kExitUsage, "usage", e.what());
  } catch (const npthresh::DetectionAborted& e) {
    return fail(kExitEstimation, "estimation", e.what());
  } catch (const npthresh::Error& e) {
    return fail(kExitEstimation, "estimation", e.what());
  } catch (const std::exception& e) {
    return fail(1, "internal", e.what());
  }
}
