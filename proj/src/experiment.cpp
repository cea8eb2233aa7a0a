#include "congame/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "congame/metrics.hpp"
#include "congame/rng.hpp"
#include "congame/serialize.hpp"

namespace congame {

namespace fs = std::filesystem;

std::string sweep_param_name(SweepParam p) {
  switch (p) {
    case SweepParam::none: return "none";
    case SweepParam::beta: return "beta";
    case SweepParam::alpha: return "alpha";
    case SweepParam::gamma_scale: return "gamma_scale";
    case SweepParam::sigma: return "sigma";
  }
  throw InvalidArgument("unknown sweep parameter");
}

SweepParam sweep_param_from_name(const std::string& name) {
  if (name == "none") return SweepParam::none;
  if (name == "beta") return SweepParam::beta;
  if (name == "alpha") return SweepParam::alpha;
  if (name == "gamma_scale") return SweepParam::gamma_scale;
  if (name == "sigma") return SweepParam::sigma;
  throw InvalidArgument("unknown sweep parameter '" + name +
                        "' (expected beta, alpha, gamma_scale or sigma)");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

nlohmann::json schedule_spec_to_json(const ScheduleSpec& s) {
  switch (s.kind) {
    case ScheduleSpec::Kind::constant:
      return {{"kind", "constant"}, {"value", s.value}};
    case ScheduleSpec::Kind::power_law:
      return {{"kind", "power_law"}, {"coeff", s.value}, {"exponent", s.exponent}};
    case ScheduleSpec::Kind::horizon_sqrt:
      return {{"kind", "horizon_sqrt"}, {"scale", s.value}};
    case ScheduleSpec::Kind::match_gamma:
      return {{"kind", "match_gamma"}};
    case ScheduleSpec::Kind::alpha_gamma_sq:
      return {{"kind", "alpha_gamma_sq"}, {"alpha", s.value}};
  }
  throw InvalidArgument("unknown schedule spec kind");
}

ScheduleSpec schedule_spec_from_json(const nlohmann::json& j) {
  ScheduleSpec s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    s.kind = ScheduleSpec::Kind::constant;
    s.value = j.at("value").get<double>();
  } else if (kind == "power_law") {
    s.kind = ScheduleSpec::Kind::power_law;
    s.value = j.at("coeff").get<double>();
    s.exponent = j.at("exponent").get<double>();
  } else if (kind == "horizon_sqrt") {
    s.kind = ScheduleSpec::Kind::horizon_sqrt;
    s.value = j.at("scale").get<double>();
  } else if (kind == "match_gamma") {
    s.kind = ScheduleSpec::Kind::match_gamma;
  } else if (kind == "alpha_gamma_sq") {
    s.kind = ScheduleSpec::Kind::alpha_gamma_sq;
    s.value = j.at("alpha").get<double>();
  } else {
    throw InvalidArgument("unknown schedule kind '" + kind + "'");
  }
  return s;
}

OutputFormat format_from_name(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "both") return OutputFormat::both;
  throw InvalidArgument("unknown output format '" + name + "'");
}

std::string format_name(OutputFormat f) {
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    case OutputFormat::both: return "both";
  }
  return "csv";
}

}  // namespace

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.game = quad_params_from_json(j.at("game"));
  if (j.contains("noise")) {
    const std::string kind = j["noise"].at("kind").get<std::string>();
    if (kind == "none")
      cfg.noise = NoiseModel::None();
    else if (kind == "gaussian_iid")
      cfg.noise = NoiseModel::Gaussian(j["noise"].at("sigma").get<double>());
    else
      throw InvalidArgument("experiment configs support noise kinds none and gaussian_iid");
  }
  const auto& sch = j.at("schedules");
  cfg.gamma = schedule_spec_from_json(sch.at("gamma"));
  cfg.zeta = schedule_spec_from_json(sch.at("zeta"));
  cfg.eta = schedule_spec_from_json(sch.at("eta"));
  cfg.beta = schedule_spec_from_json(sch.at("beta"));
  cfg.horizons = j.at("horizons").get<std::vector<Index>>();
  cfg.base_seed = j.value("seed", std::uint64_t(1));
  cfg.n_seeds = j.value("seeds", Index(1));
  if (j.contains("sweep")) {
    cfg.sweep = sweep_param_from_name(j["sweep"].at("param").get<std::string>());
    cfg.sweep_values = j["sweep"].at("values").get<std::vector<double>>();
  }
  cfg.out_dir = j.value("out", std::string());
  cfg.format = format_from_name(j.value("format", std::string("csv")));
  cfg.write_trajectories = j.value("write_trajectories", true);
  cfg.threads = j.value("threads", 0);
  return cfg;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["game"] = quad_params_to_json(cfg.game);
  if (cfg.noise.kind == NoiseKind::gaussian_iid)
    j["noise"] = {{"kind", "gaussian_iid"}, {"sigma", cfg.noise.sigma}};
  else
    j["noise"] = {{"kind", "none"}};
  j["schedules"] = {{"gamma", schedule_spec_to_json(cfg.gamma)},
                    {"zeta", schedule_spec_to_json(cfg.zeta)},
                    {"eta", schedule_spec_to_json(cfg.eta)},
                    {"beta", schedule_spec_to_json(cfg.beta)}};
  j["horizons"] = cfg.horizons;
  j["seed"] = cfg.base_seed;
  j["seeds"] = cfg.n_seeds;
  if (cfg.sweep != SweepParam::none)
    j["sweep"] = {{"param", sweep_param_name(cfg.sweep)}, {"values", cfg.sweep_values}};
  j["out"] = cfg.out_dir;
  j["format"] = format_name(cfg.format);
  j["write_trajectories"] = cfg.write_trajectories;
  j["threads"] = cfg.threads;
  return j;
}

ScheduleSet resolve_schedules(const ExperimentConfig& cfg, double value, Index horizon,
                              double* sigma_out) {
  if (horizon < 1) throw InvalidArgument("horizon must be at least 1");
  ScheduleSpec gs = cfg.gamma, zs = cfg.zeta, es = cfg.eta, bs = cfg.beta;
  double sigma = cfg.noise.sigma;
  switch (cfg.sweep) {
    case SweepParam::none:
      break;
    case SweepParam::beta:
      bs = {ScheduleSpec::Kind::constant, value, 0};
      break;
    case SweepParam::alpha:
      es = {ScheduleSpec::Kind::alpha_gamma_sq, value, 0};
      break;
    case SweepParam::gamma_scale:
      gs = {ScheduleSpec::Kind::horizon_sqrt, value, 0};
      break;
    case SweepParam::sigma:
      sigma = value;
      break;
  }

  auto resolve_basic = [horizon](const ScheduleSpec& s, const char* which) -> Schedule {
    switch (s.kind) {
      case ScheduleSpec::Kind::constant:
        return Schedule::Constant(s.value);
      case ScheduleSpec::Kind::power_law:
        return Schedule::PowerLaw(s.value, s.exponent);
      case ScheduleSpec::Kind::horizon_sqrt:
        return Schedule::Constant(s.value / std::sqrt(double(horizon)));
      default:
        throw InvalidArgument(std::string(which) + " cannot use this schedule kind");
    }
  };

  ScheduleSet out{Schedule::Constant(0), Schedule::Constant(0), Schedule::Constant(0),
                  Schedule::Constant(0)};
  out.gamma = resolve_basic(gs, "gamma");
  out.zeta = zs.kind == ScheduleSpec::Kind::match_gamma ? out.gamma : resolve_basic(zs, "zeta");
  if (es.kind == ScheduleSpec::Kind::alpha_gamma_sq) {
    const double a = es.value;
    if (out.gamma.is_constant())
      out.eta = Schedule::Constant(a * out.gamma.value() * out.gamma.value());
    else
      out.eta = Schedule::PowerLaw(a * out.gamma.value() * out.gamma.value(),
                                   2.0 * out.gamma.exponent());
  } else {
    out.eta = resolve_basic(es, "eta");
  }
  out.beta = resolve_basic(bs, "beta");
  if (sigma_out) *sigma_out = sigma;
  return out;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  const Index T = traj.steps();
  const Index R = traj.prices.cols();
  f << "t,anccvc";
  for (Index r = 0; r < R; ++r) f << ",price_r" << (r + 1);
  for (Index r = 0; r < R; ++r) f << ",phi_r" << (r + 1);
  f << "\n";
  const MetricSeries series = anccvc_series(traj);
  for (Index t = 0; t < T; ++t) {
    f << (t + 1) << ',' << fmt_double(series.value[size_t(t)]);
    for (Index r = 0; r < R; ++r) f << ',' << fmt_double(traj.prices(t, r));
    for (Index r = 0; r < R; ++r) f << ',' << fmt_double(traj.congestion(t, r));
    f << "\n";
  }
  if (!f) throw IoError("failed while writing " + path);
}

void write_trajectory_json(const std::string& path, const Trajectory& traj) {
  const Index T = traj.steps();
  const MetricSeries series = anccvc_series(traj);
  nlohmann::json j;
  j["t"] = series.t;
  j["anccvc"] = series.value;
  nlohmann::json price = nlohmann::json::array(), phi = nlohmann::json::array();
  for (Index t = 0; t < T; ++t) {
    price.push_back(vec_to_json(traj.prices.row(t).transpose()));
    phi.push_back(vec_to_json(traj.congestion.row(t).transpose()));
  }
  j["price"] = price;
  j["phi"] = phi;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
  if (!f) throw IoError("failed while writing " + path);
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw IoError("failed while writing " + path);
}

struct CellJob {
  double value = 0;
  Index horizon = 0;
  Index seed_index = 0;
  size_t slot = 0;
};

NoiseKind cell_noise_kind(const ExperimentConfig& cfg) {
  if (cfg.sweep == SweepParam::sigma) return NoiseKind::gaussian_iid;
  return cfg.noise.kind;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.horizons.empty()) throw InvalidArgument("need at least one horizon");
  for (Index T : cfg.horizons)
    if (T < 1) throw InvalidArgument("horizons must be positive");
  if (cfg.n_seeds < 1) throw InvalidArgument("need at least one seed");
  if (cfg.sweep != SweepParam::none && cfg.sweep_values.empty())
    throw InvalidArgument("sweep requested without values");
  if (cfg.noise.kind == NoiseKind::custom)
    throw InvalidArgument("experiments support noise kinds none and gaussian_iid");
  if (cfg.out_dir.empty()) throw InvalidArgument("no output directory configured");

  fs::create_directories(cfg.out_dir);
  const auto out_path = [&](const std::string& name) {
    return (fs::path(cfg.out_dir) / name).string();
  };

  ExperimentReport report;
  report.config = cfg;

  const GameSpec base_game = make_quadratic_game(cfg.game);
  const auto base_regs = regularizers_for(base_game);
  report.constants = compute_constants(base_game, base_regs);

  // Certified E||xi||_*^2 at sigma = 1; cells scale it by their sigma^2.
  double unit_noise = 0;
  if (cell_noise_kind(cfg) == NoiseKind::gaussian_iid) {
    GameSpec probe = base_game;
    probe.noise = NoiseModel::Gaussian(1.0);
    unit_noise = noise_second_moment_bound(probe);
  }

  const std::vector<double> values =
      cfg.sweep == SweepParam::none ? std::vector<double>{0.0} : cfg.sweep_values;

  // The dual solve is only needed when some cell satisfies the bound
  // hypotheses; skip it otherwise (it can be the slow part).
  bool any_hypotheses = false;
  for (double v : values)
    for (Index T : cfg.horizons)
      if (violation_bound_applies(resolve_schedules(cfg, v, T), T, report.constants))
        any_hypotheses = true;
  if (any_hypotheses) {
    try {
      VISolution sol = solve_constrained_vi(base_game);
      report.constants.C_tilde2 = sol.lambda_star.norm() + 1.0;
      report.vi = std::move(sol);
    } catch (const ConvergenceError& e) {
      report.vi_error = e.what();  // keep the default C_tilde2 = 1
    }
  }

  std::vector<CellJob> jobs;
  for (double v : values)
    for (Index T : cfg.horizons)
      for (Index s = 0; s < cfg.n_seeds; ++s) {
        CellJob job;
        job.value = v;
        job.horizon = T;
        job.seed_index = s;
        job.slot = jobs.size();
        jobs.push_back(job);
      }

  report.cells.resize(jobs.size());
  std::vector<std::vector<std::string>> cell_files(jobs.size());

  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::atomic<bool> abort{false};

  auto worker = [&]() {
    while (!abort.load()) {
      const size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      const CellJob& job = jobs[k];
      try {
        double sigma = 0;
        ScheduleSet sch = resolve_schedules(cfg, job.value, job.horizon, &sigma);

        GameSpec game = make_quadratic_game(cfg.game);
        if (cell_noise_kind(cfg) == NoiseKind::gaussian_iid)
          game.noise = NoiseModel::Gaussian(sigma);

        SimConfig sim;
        sim.game = std::move(game);
        sim.regularizers = regularizers_for(sim.game);
        sim.schedules = sch;
        sim.horizon = job.horizon;
        sim.seed = derive_seed(cfg.base_seed, std::uint64_t(job.seed_index));
        sim.record.scores = false;
        const Trajectory traj = run(sim);

        CellResult& r = report.cells[job.slot];
        r.value = job.value;
        r.horizon = job.horizon;
        r.seed_index = job.seed_index;
        r.seed = sim.seed;
        r.terminal_anccvc = anccvc(traj, job.horizon);
        r.tc_satisfied = true;
        for (Index tau = 0; tau < job.horizon && r.tc_satisfied; ++tau)
          r.tc_satisfied =
              trackability_check(sch.gamma.at(tau), sch.eta.at(tau), report.constants);

        GameConstants cc = report.constants;
        cc.sigma_star2 = cell_noise_kind(cfg) == NoiseKind::gaussian_iid
                             ? sigma * sigma * unit_noise
                             : 0.0;
        if (violation_bound_applies(sch, job.horizon, cc))
          r.bound_value = violation_bound(job.horizon, sch, cc);

        if (cfg.write_trajectories) {
          const std::string stem = "traj_" + sweep_param_name(cfg.sweep) + "-" +
                                   fmt_short(job.value) + "_T" + std::to_string(job.horizon) +
                                   "_seed" + std::to_string(job.seed_index);
          if (cfg.format == OutputFormat::csv || cfg.format == OutputFormat::both) {
            const std::string p = out_path(stem + ".csv");
            write_trajectory_csv(p, traj);
            cell_files[job.slot].push_back(p);
          }
          if (cfg.format == OutputFormat::json || cfg.format == OutputFormat::both) {
            const std::string p = out_path(stem + ".json");
            write_trajectory_json(p, traj);
            cell_files[job.slot].push_back(p);
          }
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  int n_threads = cfg.threads > 0 ? cfg.threads : int(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, int(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  for (auto& files : cell_files)
    for (auto& f : files) report.files_written.push_back(f);

  // Per-horizon summaries, rows ordered by (sweep value, seed index).
  const std::string param = sweep_param_name(cfg.sweep);
  for (Index T : cfg.horizons) {
    std::string csv = "sweep_param,value,seed,terminal_anccvc,tc_satisfied,bound_value\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : report.cells) {
      if (c.horizon != T) continue;
      csv += param + "," + fmt_double(c.value) + "," + std::to_string(c.seed) + "," +
             fmt_double(c.terminal_anccvc) + "," + (c.tc_satisfied ? "true" : "false") + "," +
             fmt_double(c.bound_value) + "\n";
      rows.push_back({{"sweep_param", param},
                      {"value", c.value},
                      {"seed", c.seed},
                      {"terminal_anccvc", c.terminal_anccvc},
                      {"tc_satisfied", c.tc_satisfied},
                      {"bound_value", c.bound_value}});
    }
    const std::string stem = "summary_T" + std::to_string(T);
    if (cfg.format == OutputFormat::csv || cfg.format == OutputFormat::both) {
      const std::string p = out_path(stem + ".csv");
      write_text(p, csv);
      report.files_written.push_back(p);
    }
    if (cfg.format == OutputFormat::json || cfg.format == OutputFormat::both) {
      const std::string p = out_path(stem + ".json");
      write_text(p, rows.dump(2) + "\n");
      report.files_written.push_back(p);
    }
  }

  // Decay slopes of the seed-averaged terminal metric across horizons.
  if (cfg.horizons.size() >= 2) {
    std::string csv = "sweep_param,value,slope\n";
    for (double v : values) {
      std::vector<double> hs, means;
      for (Index T : cfg.horizons) {
        CompensatedSum acc;
        Index n = 0;
        for (const auto& c : report.cells)
          if (c.horizon == T && c.value == v) {
            acc.add(c.terminal_anccvc);
            ++n;
          }
        hs.push_back(double(T));
        means.push_back(acc.value() / double(n));
      }
      double slope = std::numeric_limits<double>::quiet_NaN();
      try {
        slope = decay_fit(hs, means);
      } catch (const InvalidArgument&) {
        // zero-violation runs have no log-log slope
      }
      report.slopes.push_back({v, slope});
      csv += param + "," + fmt_double(v) + "," + fmt_double(slope) + "\n";
    }
    const std::string p = out_path("slopes.csv");
    write_text(p, csv);
    report.files_written.push_back(p);
  }

  // Constants, dual solution and the per-(value, horizon) verdicts.
  {
    nlohmann::json j;
    j["constants"] = constants_to_json(report.constants);
    j["c_tilde2_source"] = report.vi ? "dual_solution" : "default";
    j["vi"] = report.vi ? vi_solution_to_json(*report.vi) : nlohmann::json();
    if (!report.vi_error.empty()) j["vi_error"] = report.vi_error;
    nlohmann::json verdicts = nlohmann::json::array();
    for (double v : values)
      for (Index T : cfg.horizons) {
        double sigma = 0;
        ScheduleSet sch = resolve_schedules(cfg, v, T, &sigma);
        bool tc = true;
        for (Index tau = 0; tau < T && tc; ++tau)
          tc = trackability_check(sch.gamma.at(tau), sch.eta.at(tau), report.constants);
        GameConstants cc = report.constants;
        cc.sigma_star2 = cell_noise_kind(cfg) == NoiseKind::gaussian_iid
                             ? sigma * sigma * unit_noise
                             : 0.0;
        double bound = std::numeric_limits<double>::quiet_NaN();
        if (violation_bound_applies(sch, T, cc)) bound = violation_bound(T, sch, cc);
        verdicts.push_back({{"value", v},
                            {"horizon", T},
                            {"gamma0", sch.gamma.at(0)},
                            {"eta0", sch.eta.at(0)},
                            {"tc_satisfied", tc},
                            {"bound_value", bound}});
      }
    j["verdicts"] = verdicts;
    const std::string p = out_path("constants.json");
    write_text(p, j.dump(2) + "\n");
    report.files_written.push_back(p);
  }

  {
    const std::string p = out_path("config_echo.json");
    write_text(p, experiment_config_to_json(cfg).dump(2) + "\n");
    report.files_written.push_back(p);
  }

  return report;
}

std::vector<SummaryRow> summarize_directory(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("summary_T", 0) == 0 && name.size() > 4 &&
        name.substr(name.size() - 4) == ".csv")
      paths.push_back(entry.path().string());
  }
  if (paths.empty()) throw IoError("no summary_T*.csv files in " + dir);
  std::sort(paths.begin(), paths.end());

  std::vector<SummaryRow> out;
  for (const auto& p : paths) {
    const std::string fname = fs::path(p).filename().string();
    const Index horizon = std::stoll(fname.substr(9, fname.size() - 13));
    std::ifstream f(p);
    if (!f) throw IoError("cannot read " + p);
    std::string line;
    std::getline(f, line);  // header
    struct Agg {
      std::string param;
      std::vector<double> vals;
    };
    std::vector<std::pair<double, Agg>> groups;  // keep first-seen order
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cols;
      size_t start = 0;
      while (true) {
        const size_t comma = line.find(',', start);
        cols.push_back(line.substr(start, comma == std::string::npos ? comma : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (cols.size() < 4) throw IoError("malformed summary row in " + p);
      const double value = std::strtod(cols[1].c_str(), nullptr);
      const double terminal = std::strtod(cols[3].c_str(), nullptr);
      auto it = std::find_if(groups.begin(), groups.end(),
                             [&](const auto& g) { return g.first == value; });
      if (it == groups.end()) {
        groups.push_back({value, Agg{cols[0], {}}});
        it = std::prev(groups.end());
      }
      it->second.vals.push_back(terminal);
    }
    for (const auto& [value, agg] : groups) {
      SummaryRow row;
      row.sweep_param = agg.param;
      row.value = value;
      row.horizon = horizon;
      row.n_seeds = Index(agg.vals.size());
      CompensatedSum m;
      for (double v : agg.vals) m.add(v);
      row.mean_terminal = m.value() / double(agg.vals.size());
      if (agg.vals.size() > 1) {
        CompensatedSum s2;
        for (double v : agg.vals) s2.add((v - row.mean_terminal) * (v - row.mean_terminal));
        row.std_terminal = std::sqrt(s2.value() / double(agg.vals.size() - 1));
      }
      out.push_back(row);
    }
  }
  return out;
}

}  // namespace congame
