#include "cbf/cli.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

namespace cbf::cli {
namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class Level { Error = 0, Info = 1, Debug = 2 };

Level log_level() {
  static const Level lvl = [] {
    const char* env = std::getenv("CBF_FEAS_LOG");
    if (env == nullptr) return Level::Error;
    const std::string s(env);
    if (s == "debug") return Level::Debug;
    if (s == "info") return Level::Info;
    if (s != "error")
      std::cerr << "[error] unknown CBF_FEAS_LOG value '" << s
                << "', using 'error'\n";
    return Level::Error;
  }();
  return lvl;
}

void log_info(const std::string& msg) {
  if (log_level() >= Level::Info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= Level::Debug) std::cerr << "[debug] " << msg << "\n";
}

double require_number(const json& v, const std::string& key) {
  if (!v.is_number())
    throw ConfigError("config: key '" + key + "' must be a number");
  return v.get<double>();
}

const char* status_text(sim::Terminal t) {
  return t == sim::Terminal::Completed ? "completed" : "infeasible";
}

// Per-trace aggregates feeding summary.json and sweep.csv. NaN marks "no
// finite samples" and is rendered as null (JSON) or nan (CSV).
struct Aggregates {
  double first_infeasible_t;
  double min_b;
  double min_psi1;
  double max_v;
  double final_v;
};

Aggregates aggregate(const sim::Trace& trace) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Aggregates a{nan, nan, nan, nan, trace.final_state(0)};
  if (trace.terminal == sim::Terminal::Infeasible)
    a.first_infeasible_t = trace.infeasible_time;
  for (const auto& rec : trace.records) {
    if (std::isfinite(rec.obs.b) && !(a.min_b <= rec.obs.b)) a.min_b = rec.obs.b;
    if (std::isfinite(rec.obs.psi1) && !(a.min_psi1 <= rec.obs.psi1))
      a.min_psi1 = rec.obs.psi1;
    if (std::isfinite(rec.state(0)) && !(a.max_v >= rec.state(0)))
      a.max_v = rec.state(0);
  }
  return a;
}

json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json summary_object(const sim::Trace& trace) {
  const Aggregates a = aggregate(trace);
  ordered_json j;
  j["status"] = status_text(trace.terminal);
  j["first_infeasible_t"] = number_or_null(a.first_infeasible_t);
  j["min_b"] = number_or_null(a.min_b);
  j["min_psi1"] = number_or_null(a.min_psi1);
  j["max_v"] = number_or_null(a.max_v);
  j["final_v"] = number_or_null(a.final_v);
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::error_code ec;
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  out << body;
  out.flush();
  if (!out.good())
    throw ConfigError("cannot write '" + path.string() + "'");
  log_debug("wrote " + path.string() + " (" + std::to_string(body.size()) +
            " bytes)");
}

void print_summary(const sim::Trace& trace) {
  const Aggregates a = aggregate(trace);
  if (trace.terminal == sim::Terminal::Completed)
    std::cout << "status: completed\n";
  else
    std::cout << "status: infeasible at t=" << format_double(a.first_infeasible_t)
              << "\n";
  std::cout << "steps: " << trace.records.size()
            << "  final t: " << format_double(trace.final_time)
            << "  final v: " << format_double(a.final_v) << "\n"
            << "min b: " << format_double(a.min_b)
            << "  min psi1: " << format_double(a.min_psi1)
            << "  max v: " << format_double(a.max_v) << "\n"
            << "v(t): " << sparkline(trace) << "\n";
}

sim::Trace run_once(const RunConfig& cfg) {
  const auto trace = sim::run(acc::build(cfg.scenario), cfg.sim);
  if (trace.initial_set_violation)
    std::cerr << "[error] initial state violates the safe set\n";
  if (trace.state_warning_seen)
    std::cerr << "[error] ego speed went negative; model validity is lost\n";
  if (trace.compatibility_failures > 0)
    std::cerr << "[error] " << trace.compatibility_failures
              << " steps had conflicting safety/feasibility/bound rows\n";
  std::ostringstream kkt;
  kkt << "kkt over " << trace.kkt.solves
      << " solves: primal " << format_double(trace.kkt.max_primal_violation)
      << ", stationarity " << format_double(trace.kkt.max_stationarity)
      << ", complementarity " << format_double(trace.kkt.max_comp_slackness)
      << ", min multiplier " << format_double(trace.kkt.min_multiplier);
  log_debug(kkt.str());
  return trace;
}

std::vector<double> parse_list(const std::string& csv, const std::string& flag) {
  std::vector<double> out;
  std::string item;
  std::istringstream stream(csv);
  while (std::getline(stream, item, ',')) {
    const auto from = item.find_first_not_of(" \t");
    const auto to = item.find_last_not_of(" \t");
    if (from == std::string::npos)
      throw ConfigError(flag + ": empty entry in '" + csv + "'");
    item = item.substr(from, to - from + 1);
    double value = 0.0;
    const auto res =
        std::from_chars(item.data(), item.data() + item.size(), value);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError(flag + ": '" + item + "' is not a number");
    out.push_back(value);
  }
  if (out.empty())
    throw ConfigError(flag + ": needs at least one value");
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config: top level must be a JSON object");

  RunConfig cfg;
  double v0 = 6.0, z0 = 100.0;
  for (const auto& [key, value] : j.items()) {
    if (key == "mass") cfg.scenario.params.mass = require_number(value, key);
    else if (key == "grav") cfg.scenario.params.grav = require_number(value, key);
    else if (key == "f0") cfg.scenario.params.f0 = require_number(value, key);
    else if (key == "f1") cfg.scenario.params.f1 = require_number(value, key);
    else if (key == "f2") cfg.scenario.params.f2 = require_number(value, key);
    else if (key == "v_p") cfg.scenario.params.v_p = require_number(value, key);
    else if (key == "v_d") cfg.scenario.params.v_d = require_number(value, key);
    else if (key == "l0") cfg.scenario.params.l0 = require_number(value, key);
    else if (key == "c_a") cfg.scenario.params.c_a = require_number(value, key);
    else if (key == "c_d") cfg.scenario.params.c_d = require_number(value, key);
    else if (key == "p1") cfg.scenario.p1 = require_number(value, key);
    else if (key == "p2") cfg.scenario.p2 = require_number(value, key);
    else if (key == "epsilon") cfg.scenario.epsilon = require_number(value, key);
    else if (key == "p_acc") cfg.scenario.p_acc = require_number(value, key);
    else if (key == "dt") cfg.sim.dt = require_number(value, key);
    else if (key == "T") cfg.sim.horizon = require_number(value, key);
    else if (key == "substeps") {
      if (!value.is_number_integer())
        throw ConfigError("config: key 'substeps' must be an integer");
      cfg.sim.substeps = value.get<int>();
    } else if (key == "v0") v0 = require_number(value, key);
    else if (key == "z0") z0 = require_number(value, key);
    else if (key == "feasibility_on") {
      if (!value.is_boolean())
        throw ConfigError("config: key 'feasibility_on' must be a boolean");
      cfg.scenario.feasibility_on = value.get<bool>();
    } else if (key == "baseline") {
      if (!value.is_string())
        throw ConfigError("config: key 'baseline' must be a string");
      const std::string s = value.get<std::string>();
      if (s == "none") cfg.scenario.baseline = acc::Baseline::None;
      else if (s == "min_braking_distance")
        cfg.scenario.baseline = acc::Baseline::MinBrakingDistance;
      else
        throw ConfigError(
            "config: baseline must be \"none\" or \"min_braking_distance\", "
            "got '" + s + "'");
    } else if (key == "out_dir") {
      if (!value.is_string())
        throw ConfigError("config: key 'out_dir' must be a string");
      cfg.out_dir = value.get<std::string>();
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  cfg.sim.initial_state = Eigen::Vector2d(v0, z0);
  try {
    cfg.scenario.validate();
    cfg.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.good())
    throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  log_info("loaded config from " + path);
  return parse_config(body.str());
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string trace_csv(const sim::Trace& trace, bool include_timing) {
  std::string out = "t,v,z,u,delta,qp_status,b,psi1,phi,b_hF,safety_beta";
  if (include_timing) out += ",solve_us";
  out += "\n";
  for (const auto& rec : trace.records) {
    out += format_double(rec.t);
    out += ',';
    out += format_double(rec.state(0));
    out += ',';
    out += format_double(rec.state(1));
    out += ',';
    out += format_double(rec.control.size() > 0
                             ? rec.control(0)
                             : std::numeric_limits<double>::quiet_NaN());
    out += ',';
    out += format_double(rec.delta);
    out += ',';
    out += rec.qp_status == qp::Status::Optimal ? "optimal" : "infeasible";
    out += ',';
    out += format_double(rec.obs.b);
    out += ',';
    out += format_double(rec.obs.psi1);
    out += ',';
    out += format_double(rec.obs.phi);
    out += ',';
    out += format_double(rec.obs.b_hf);
    out += ',';
    out += format_double(rec.safety_beta);
    if (include_timing) {
      out += ',';
      out += std::to_string(rec.solve_us);
    }
    out += '\n';
  }
  return out;
}

std::string summary_json(const sim::Trace& trace) {
  return summary_object(trace).dump(2) + "\n";
}

std::string sparkline(const sim::Trace& trace, int width) {
  static const char* kBlocks[8] = {"▁", "▂", "▃", "▄",
                                   "▅", "▆", "▇", "█"};
  const int n = static_cast<int>(trace.records.size());
  if (n == 0) return "(empty)";
  double lo = trace.records[0].state(0), hi = lo;
  for (const auto& rec : trace.records) {
    lo = std::min(lo, rec.state(0));
    hi = std::max(hi, rec.state(0));
  }
  std::string out;
  const int cols = std::min(width, n);
  for (int i = 0; i < cols; ++i) {
    const int k = cols == 1 ? 0 : static_cast<int>(
        std::llround(static_cast<double>(i) * (n - 1) / (cols - 1)));
    const double v = trace.records[k].state(0);
    const int level =
        hi > lo ? std::min(7, static_cast<int>((v - lo) / (hi - lo) * 8.0)) : 0;
    out += kBlocks[level];
  }
  return out;
}

int cmd_run(const RunConfig& cfg, const std::string& out_dir) {
  const sim::Trace trace = run_once(cfg);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "trace.csv", trace_csv(trace, true));
  write_file(dir / "summary.json", summary_json(trace));
  print_summary(trace);
  log_info(std::string("run finished: ") + status_text(trace.terminal));
  return trace.terminal == sim::Terminal::Completed ? 0 : 2;
}

int cmd_sweep(const RunConfig& base, const std::vector<double>& p1s,
              const std::vector<double>& p2s, const std::string& out_dir,
              int workers) {
  if (p1s.empty() || p2s.empty())
    throw ConfigError("sweep: p1 and p2 lists must be nonempty");
  if (workers < 1)
    throw ConfigError("sweep: workers must be >= 1");

  struct Cell {
    double p1, p2;
    bool fea;
    std::string file;
    sim::Trace trace;
  };
  std::vector<Cell> cells;
  for (double p1 : p1s)
    for (double p2 : p2s)
      for (bool fea : {true, false})
        cells.push_back({p1, p2, fea,
                         "trace_p1_" + format_double(p1) + "_p2_" +
                             format_double(p2) + "_fea_" +
                             (fea ? "on" : "off") + ".csv",
                         {}});

  const std::filesystem::path dir(out_dir);
  std::atomic<size_t> next{0};
  std::mutex error_guard;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        Cell& cell = cells[i];
        RunConfig cfg = base;
        cfg.scenario.p1 = cell.p1;
        cfg.scenario.p2 = cell.p2;
        cfg.scenario.feasibility_on = cell.fea;
        cfg.scenario.baseline = acc::Baseline::None;
        cell.trace = run_once(cfg);
        write_file(dir / cell.file, trace_csv(cell.trace, false));
        log_info("cell p1=" + format_double(cell.p1) + " p2=" +
                 format_double(cell.p2) + " fea=" + (cell.fea ? "on" : "off") +
                 " -> " + status_text(cell.trace.terminal));
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_guard);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int thread_count =
      static_cast<int>(std::min<size_t>(workers, cells.size()));
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::string matrix =
      "p1,p2,feasibility_on,status,first_infeasible_t,min_b,max_v,final_v\n";
  int completed = 0;
  for (const Cell& cell : cells) {
    const Aggregates a = aggregate(cell.trace);
    completed += cell.trace.terminal == sim::Terminal::Completed;
    matrix += format_double(cell.p1);
    matrix += ',';
    matrix += format_double(cell.p2);
    matrix += ',';
    matrix += cell.fea ? "true" : "false";
    matrix += ',';
    matrix += status_text(cell.trace.terminal);
    matrix += ',';
    matrix += format_double(a.first_infeasible_t);
    matrix += ',';
    matrix += format_double(a.min_b);
    matrix += ',';
    matrix += format_double(a.max_v);
    matrix += ',';
    matrix += format_double(a.final_v);
    matrix += '\n';
  }
  write_file(dir / "sweep.csv", matrix);
  std::cout << "sweep: " << cells.size() << " cells, " << completed
            << " completed, " << (cells.size() - completed) << " infeasible\n"
            << "matrix: " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

int cmd_compare_braking(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.scenario.baseline != acc::Baseline::MinBrakingDistance)
    throw ConfigError(
        "compare-braking requires config key baseline = "
        "\"min_braking_distance\"");

  RunConfig guarded = cfg;
  guarded.scenario.baseline = acc::Baseline::None;
  guarded.scenario.feasibility_on = true;
  const sim::Trace guarded_trace = run_once(guarded);
  const sim::Trace braking_trace = run_once(cfg);

  const std::filesystem::path dir(out_dir);
  write_file(dir / "trace_feasibility.csv", trace_csv(guarded_trace, true));
  write_file(dir / "trace_braking.csv", trace_csv(braking_trace, true));
  ordered_json comparison;
  comparison["feasibility"] = summary_object(guarded_trace);
  comparison["braking"] = summary_object(braking_trace);
  write_file(dir / "comparison.json", comparison.dump(2) + "\n");

  std::cout << "feasibility: " << status_text(guarded_trace.terminal);
  if (guarded_trace.terminal == sim::Terminal::Infeasible)
    std::cout << " at t=" << format_double(guarded_trace.infeasible_time);
  std::cout << "\nbraking:     " << status_text(braking_trace.terminal);
  if (braking_trace.terminal == sim::Terminal::Infeasible)
    std::cout << " at t=" << format_double(braking_trace.infeasible_time);
  std::cout << "\n";
  return 0;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"point-wise QP safety filter: simulate, sweep, compare"};
  app.require_subcommand(1);
  std::string config_path, out, p1_csv, p2_csv;
  int workers = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")
        ->required();
    sub->add_option("--out", out,
                    "output directory (default: config key out_dir)");
  };
  CLI::App* run = app.add_subcommand("run", "simulate one scenario");
  add_common(run);
  CLI::App* sweep =
      app.add_subcommand("sweep", "p1 x p2 x {feasibility on/off} grid");
  add_common(sweep);
  sweep->add_option("--p1", p1_csv, "comma-separated p1 values")->required();
  sweep->add_option("--p2", p2_csv, "comma-separated p2 values")->required();
  sweep->add_option("--workers", workers, "max concurrent cells");
  CLI::App* compare = app.add_subcommand(
      "compare-braking", "guarded run vs minimum-braking-distance baseline");
  add_common(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = load_config(config_path);
    const std::string out_dir = !out.empty() ? out : cfg.out_dir.value_or("");
    if (out_dir.empty())
      throw ConfigError(
          "an output directory is required: pass --out or set config key "
          "'out_dir'");
    if (run->parsed()) return cmd_run(cfg, out_dir);
    if (sweep->parsed()) {
      if (workers == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        workers = hw == 0 ? 1 : static_cast<int>(hw);
      }
      return cmd_sweep(cfg, parse_list(p1_csv, "--p1"),
                       parse_list(p2_csv, "--p2"), out_dir, workers);
    }
    return cmd_compare_braking(cfg, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "[error] " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cbf::cli
