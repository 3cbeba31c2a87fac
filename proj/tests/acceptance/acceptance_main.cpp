// Acceptance suite: one line per criterion, exit code = number of failures.
// Each criterion re-derives its expectation from first principles (library
// calls, brute-force oracles, byte comparisons) rather than trusting the
// code paths it certifies.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbf/acc.hpp"
#include "cbf/cli.hpp"
#include "cbf/feasibility.hpp"
#include "cbf/qp.hpp"
#include "cbf/sim.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return cbf::cli::format_double(v); }

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string details;
};

cbf::acc::Scenario scenario(double p1, double p2, bool fea,
                            cbf::acc::Baseline baseline = cbf::acc::Baseline::None) {
  cbf::acc::Scenario s;
  s.p1 = p1;
  s.p2 = p2;
  s.feasibility_on = fea;
  s.baseline = baseline;
  return s;
}

cbf::sim::Trace simulate(const cbf::acc::Scenario& s) {
  cbf::sim::Config c;
  c.initial_state = Eigen::Vector2d(6.0, 100.0);
  return cbf::sim::run(cbf::acc::build(s), c);
}

struct TraceStats {
  double min_b = std::numeric_limits<double>::infinity();
  double min_psi1 = std::numeric_limits<double>::infinity();
  double max_v = -std::numeric_limits<double>::infinity();
  double closest_to_vd = std::numeric_limits<double>::infinity();
};

TraceStats stats_of(const cbf::sim::Trace& trace) {
  TraceStats st;
  for (const auto& rec : trace.records) {
    st.min_b = std::min(st.min_b, rec.obs.b);
    st.min_psi1 = std::min(st.min_psi1, rec.obs.psi1);
    st.max_v = std::max(st.max_v, rec.state(0));
    st.closest_to_vd = std::min(st.closest_to_vd, std::abs(rec.state(0) - 24.0));
  }
  return st;
}

bool trace_kkt_clean(const cbf::sim::Trace& trace) {
  return trace.kkt.max_primal_violation <= cbf::qp::kFeasTol &&
         trace.kkt.max_stationarity <= cbf::qp::kStatTol &&
         trace.kkt.max_comp_slackness <= cbf::qp::kCompTol &&
         trace.kkt.min_multiplier >= -cbf::qp::kMultTol;
}

// Random QP instances with decidable status: feasible ones carry an on-grid
// interior point with fat margins, infeasible ones an opposing row pair with
// a fixed gap. The dense grid is centered on that interior point.
struct RandomQp {
  cbf::qp::Problem problem;
  Eigen::VectorXd w0;  // strictly feasible unless contradictory is set
  bool contradictory;
};

RandomQp random_qp(std::mt19937& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  std::uniform_real_distribution<double> margin(0.3, 2.5);
  std::uniform_real_distribution<double> chance(0.0, 1.0);

  RandomQp out;
  const int n = 1 + static_cast<int>(rng() & 1u);
  Eigen::MatrixXd L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) L(i, j) = unit(rng);
  out.problem.hessian =
      L * L.transpose() + 0.3 * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd w_target(n);
  for (int i = 0; i < n; ++i) w_target(i) = box(rng);
  out.problem.linear = -out.problem.hessian * w_target;

  out.w0 = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) out.w0(i) = box(rng);
  out.contradictory = chance(rng) < 0.2;

  const int base_rows = static_cast<int>(rng() % (out.contradictory ? 5u : 7u));
  const int rows = base_rows + (out.contradictory ? 2 : 0);
  out.problem.rows = Eigen::MatrixXd(rows, n);
  out.problem.bounds = Eigen::VectorXd(rows);
  for (int i = 0; i < base_rows; ++i) {
    Eigen::RowVectorXd a(n);
    do {
      for (int j = 0; j < n; ++j) a(j) = unit(rng);
    } while (a.cwiseAbs().maxCoeff() < 0.1);
    out.problem.rows.row(i) = a;
    out.problem.bounds(i) = a.dot(out.w0) + margin(rng);
  }
  if (out.contradictory) {
    Eigen::RowVectorXd a(n);
    do {
      for (int j = 0; j < n; ++j) a(j) = unit(rng);
    } while (a.cwiseAbs().maxCoeff() < 0.3);
    out.problem.rows.row(base_rows) = a;
    out.problem.bounds(base_rows) = a.dot(out.w0) + 0.1;
    out.problem.rows.row(base_rows + 1) = -a;
    out.problem.bounds(base_rows + 1) = -a.dot(out.w0) - 0.6;
  }
  return out;
}

struct GridResult {
  bool feasible = false;
  Eigen::VectorXd argmin;
  double objective = std::numeric_limits<double>::infinity();
  double step = 0.0;
};

GridResult grid_solve(const RandomQp& inst) {
  const auto& p = inst.problem;
  const int n = p.num_vars();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.hessian);
  const double kappa =
      eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
  const Eigen::VectorXd w_star = -p.hessian.ldlt().solve(p.linear);
  const double reach = (inst.w0 - w_star).norm();
  const double radius = (std::sqrt(kappa) + 1.2) * std::max(1.0, reach) + 1.0;
  const int half = 150;
  GridResult g;
  g.step = radius / half;

  const auto consider = [&](const Eigen::VectorXd& w) {
    if (((p.rows * w - p.bounds).array() > 1e-12).any()) return;
    const double obj = 0.5 * w.dot(p.hessian * w) + p.linear.dot(w);
    if (obj < g.objective) {
      g.objective = obj;
      g.argmin = w;
      g.feasible = true;
    }
  };

  Eigen::VectorXd w(n);
  if (n == 1) {
    for (int i = -half; i <= half; ++i) {
      w(0) = inst.w0(0) + g.step * i;
      consider(w);
    }
  } else {
    for (int i = -half; i <= half; ++i)
      for (int j = -half; j <= half; ++j) {
        w(0) = inst.w0(0) + g.step * i;
        w(1) = inst.w0(1) + g.step * j;
        consider(w);
      }
  }
  return g;
}

}  // namespace

int main() {
  std::vector<Outcome> outcomes;

  // ---- criterion 1: infeasibility onset without the feasibility row ----
  {
    const auto start = Clock::now();
    const auto trace = simulate(scenario(1.0, 2.0, false));
    const double elapsed = seconds_since(start);
    const bool infeasible = trace.terminal == cbf::sim::Terminal::Infeasible;
    const double death_v =
        infeasible ? trace.records.back().state(0)
                   : std::numeric_limits<double>::quiet_NaN();
    const bool in_window = death_v >= 19.776 - 0.3 && death_v <= 19.776 + 0.3;
    outcomes.push_back(
        {1, "infeasibility onset", infeasible && in_window && elapsed < 1.0,
         std::string(infeasible ? "infeasible" : "completed") + " at t=" +
             fmt(infeasible ? trace.infeasible_time : trace.final_time) +
             ", v=" + fmt(death_v) + " (required window [19.476, 20.076]), " +
             fmt(elapsed) + " s"});
  }

  // ---- criteria 2-4: guarded sweep, speed bound, desired-speed attainment --
  std::map<std::pair<double, double>, cbf::sim::Trace> guarded;
  {
    const double p1s[] = {0.5, 1.0, 2.0};
    const double p2s[] = {1.0, 2.0, 3.0};
    const auto start = Clock::now();
    int completed = 0;
    double worst_b = std::numeric_limits<double>::infinity();
    double worst_psi1 = std::numeric_limits<double>::infinity();
    double worst_speed_margin = -std::numeric_limits<double>::infinity();
    for (double p1 : p1s)
      for (double p2 : p2s) {
        const auto s = scenario(p1, p2, true);
        auto trace = simulate(s);
        const TraceStats st = stats_of(trace);
        completed += trace.terminal == cbf::sim::Terminal::Completed;
        worst_b = std::min(worst_b, st.min_b);
        worst_psi1 = std::min(worst_psi1, st.min_psi1);
        worst_speed_margin = std::max(
            worst_speed_margin, st.max_v - cbf::acc::speed_bound(s));
        guarded.emplace(std::make_pair(p1, p2), std::move(trace));
      }
    const double elapsed = seconds_since(start);
    outcomes.push_back(
        {2, "guaranteed feasibility sweep",
         completed == 9 && worst_b >= -1e-3 && worst_psi1 >= -1e-3 &&
             elapsed < 10.0,
         std::to_string(completed) + "/9 completed, worst min_b=" +
             fmt(worst_b) + ", worst min_psi1=" + fmt(worst_psi1) + ", " +
             fmt(elapsed) + " s"});
    outcomes.push_back({3, "speed-bound invariance",
                        worst_speed_margin <= 1e-3,
                        "worst max_v minus bound = " + fmt(worst_speed_margin) +
                            " (allowed 0.001)"});
    const TraceStats st = stats_of(guarded.at({0.5, 1.0}));
    outcomes.push_back({4, "desired-speed attainment",
                        st.closest_to_vd <= 0.1,
                        "min |v - 24| = " + fmt(st.closest_to_vd) +
                            " (allowed 0.1)"});
  }

  // ---- criterion 5: braking baseline conflicts, guarded run does not ----
  cbf::sim::Trace baseline_trace;
  {
    const auto& phi_trace = guarded.at({0.5, 1.0});
    baseline_trace = simulate(
        scenario(0.5, 1.0, true, cbf::acc::Baseline::MinBrakingDistance));
    const bool phi_ok = phi_trace.terminal == cbf::sim::Terminal::Completed;
    const bool baseline_dead =
        baseline_trace.terminal == cbf::sim::Terminal::Infeasible &&
        baseline_trace.infeasible_time < 30.0;
    outcomes.push_back(
        {5, "baseline comparison", phi_ok && baseline_dead,
         std::string("guarded run ") + (phi_ok ? "completed" : "failed") +
             ", braking baseline " +
             (baseline_trace.terminal == cbf::sim::Terminal::Infeasible
                  ? "infeasible at t=" + fmt(baseline_trace.infeasible_time)
                  : "completed")});
  }

  // ---- criteria 6-7: solver vs dense grid, KKT residuals everywhere ----
  {
    const auto start = Clock::now();
    std::mt19937 rng(20240817u);
    int status_mismatches = 0;
    int gap_violations = 0;
    int kkt_violations = 0;
    double worst_gap_ratio = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const RandomQp inst = random_qp(rng);
      const auto res = cbf::qp::solve(inst.problem);
      const GridResult g = grid_solve(inst);
      const bool solver_ok = res.status == cbf::qp::Status::Optimal;
      if (solver_ok != g.feasible) {
        ++status_mismatches;
        continue;
      }
      if (solver_ok) {
        const double grad_inf =
            (inst.problem.hessian * g.argmin + inst.problem.linear)
                .cwiseAbs()
                .maxCoeff();
        const double bound = 2.0 * g.step * grad_inf + 1e-12;
        const double gap = std::abs(res.objective - g.objective);
        if (gap > bound) ++gap_violations;
        worst_gap_ratio = std::max(worst_gap_ratio, gap / bound);
        if (!cbf::qp::kkt_report(inst.problem, res).ok()) ++kkt_violations;
      }
    }
    const double elapsed = seconds_since(start);
    outcomes.push_back(
        {6, "qp oracle equivalence",
         status_mismatches == 0 && gap_violations == 0 && elapsed < 30.0,
         "1000 instances, status mismatches=" +
             std::to_string(status_mismatches) + ", objective-gap violations=" +
             std::to_string(gap_violations) + " (worst gap/bound " +
             fmt(worst_gap_ratio) + "), " + fmt(elapsed) + " s"});

    int dirty_traces = 0;
    long solves = 0;
    const auto tally = [&](const cbf::sim::Trace& trace) {
      solves += trace.kkt.solves;
      dirty_traces += !trace_kkt_clean(trace);
    };
    tally(simulate(scenario(1.0, 2.0, false)));
    for (const auto& [key, trace] : guarded) tally(trace);
    tally(baseline_trace);
    outcomes.push_back(
        {7, "kkt residuals",
         kkt_violations == 0 && dirty_traces == 0,
         std::to_string(solves) +
             " closed-loop solves + 1000 random instances, violations=" +
             std::to_string(kkt_violations + dirty_traces)});
  }

  // ---- criterion 8: reformulation identity on random states ----
  {
    std::mt19937 rng(904823u);
    std::uniform_real_distribution<double> vel(-5.0, 30.0);
    std::uniform_real_distribution<double> gap(0.0, 300.0);
    std::uniform_real_distribution<double> slope(0.1, 3.0);
    const cbf::AccParams params;
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double p1 = slope(rng), p2 = slope(rng);
      const auto s = scenario(p1, p2, true);
      const Eigen::VectorXd x = Eigen::Vector2d(vel(rng), gap(rng));
      const double beta = cbf::hocbf_row(cbf::acc::gap_barrier(s), x).bound;
      const double phi = cbf::acc::phi_spec(s).value(x);
      const double kk = p1 + p2;
      const double gamma = p1 * p2 / (p1 + p2);
      const double rhs = cbf::resistance_force(params, x(0)) / params.mass +
                         (kk + gamma) * (params.v_p - x(0)) +
                         kk * gamma * (x(1) - params.l0) +
                         params.c_d * params.grav;
      const double err =
          std::abs(beta + phi - rhs) / std::max(1.0, std::abs(beta));
      worst = std::max(worst, err);
    }
    outcomes.push_back({8, "reformulation identity", worst <= 1e-12,
                        "worst scaled error " + fmt(worst) +
                            " over 10000 states (allowed 1e-12)"});
  }

  // ---- criterion 9: sweep reruns are byte-identical ----
  {
    const fs::path root =
        fs::temp_directory_path() / "cbffeas_acceptance_sweep";
    fs::remove_all(root);
    cbf::cli::RunConfig base = cbf::cli::parse_config("{}");
    const std::vector<double> p1s{0.5, 1.0, 2.0};
    const std::vector<double> p2s{1.0, 2.0, 3.0};

    std::ostringstream sink;
    auto* cout_buf = std::cout.rdbuf(sink.rdbuf());
    int rc_a = -1, rc_b = -1;
    std::string error;
    try {
      rc_a = cbf::cli::cmd_sweep(base, p1s, p2s, (root / "a").string(), 2);
      rc_b = cbf::cli::cmd_sweep(base, p1s, p2s, (root / "b").string(), 2);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::cout.rdbuf(cout_buf);

    int files = 0, mismatches = 0;
    if (error.empty()) {
      for (const auto& entry : fs::directory_iterator(root / "a")) {
        ++files;
        const auto read = [](const fs::path& p) {
          std::ifstream in(p, std::ios::binary);
          std::ostringstream body;
          body << in.rdbuf();
          return body.str();
        };
        const fs::path twin = root / "b" / entry.path().filename();
        if (!fs::exists(twin) || read(entry.path()) != read(twin))
          ++mismatches;
      }
    }
    const bool pass = error.empty() && rc_a == 0 && rc_b == 0 && files == 19 &&
                      mismatches == 0;
    outcomes.push_back(
        {9, "sweep determinism", pass,
         error.empty()
             ? std::to_string(files) + " files compared, " +
                   std::to_string(mismatches) + " mismatches"
             : "sweep failed: " + error});
  }

  int failures = 0;
  for (const auto& o : outcomes) {
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", o.id,
                o.name.c_str(), o.details.c_str());
  }
  std::printf("%d/%d criteria passed\n",
              static_cast<int>(outcomes.size()) - failures,
              static_cast<int>(outcomes.size()));
  return failures;
}
