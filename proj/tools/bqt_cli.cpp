// Command-line front end: single error computations (JSON out), parameter
// sweeps (CSV out), and the verification suite.

#include "bqt/json_io.hpp"
#include "bqt/protocols.hpp"
#include "bqt/verify.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace {

using namespace bqt;

sdp::SolverOptions solver_options_from_env(sdp::SolverOptions base) {
  const char* env = std::getenv("BQT_SOLVER_OPTS");
  if (!env) return base;
  std::stringstream ss(env);
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    std::string key = kv.substr(0, eq);
    double val = std::atof(kv.c_str() + eq + 1);
    if (key == "feas_tol") base.feas_tol = val;
    else if (key == "gap_tol") base.gap_tol = val;
    else if (key == "max_iters") base.max_iters = static_cast<int>(val);
    else if (key == "verbosity") base.verbosity = static_cast<int>(val);
  }
  return base;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct ComputeArgs {
  std::string resource = "none";
  double fid = 1.0, p = 0.0, gamma = 0.0, noise = 0.0;
  int dA = 2, d = 2;
  std::string method = "sdp";
  std::string file;
  std::string out;
};

ResourceState make_resource(const ComputeArgs& a) {
  if (a.resource == "none") return ResourceState::none();
  if (a.resource == "isotropic") return ResourceState::isotropic(a.fid, a.dA);
  if (a.resource == "werner") return ResourceState::werner(a.p, a.dA);
  if (a.resource == "gadc") return ResourceState::gadc_bell(a.gamma, a.noise);
  if (a.resource == "custom") {
    if (a.file.empty()) throw std::invalid_argument("custom resource needs --file");
    return load_resource_state(a.file);
  }
  throw std::invalid_argument("unknown resource kind " + a.resource);
}

// analytic / LP closed forms exist only for the named families
bool has_closed_form(const std::string& kind) {
  return kind == "none" || kind == "isotropic" || kind == "werner" || kind == "gadc";
}

double closed_form_value(const ComputeArgs& a) {
  if (a.resource == "none") return no_resource_error(a.d);
  if (a.resource == "isotropic") return isotropic_error(a.fid, a.dA, a.d);
  if (a.resource == "werner") return werner_error(a.p, a.dA, a.d);
  if (a.resource == "gadc") {
    if (a.d != 2) throw std::invalid_argument("gadc closed form requires --d 2");
    return gadc_error(a.gamma, a.noise);
  }
  throw std::invalid_argument("no closed form for resource " + a.resource);
}

double lp_value(const ComputeArgs& a, const sdp::SolverOptions& opts) {
  sdp::LpProblem lp;
  if (a.resource == "none") lp = build_no_resource_lp(a.d);
  else if (a.resource == "isotropic") lp = build_isotropic_lp(a.fid, a.dA, a.d);
  else if (a.resource == "werner") lp = build_werner_lp(a.p, a.dA, a.d);
  else if (a.resource == "gadc") {
    // twirling reduces the GADC state to an isotropic one without changing
    // the simulation error
    if (a.d != 2) throw std::invalid_argument("gadc LP reduction requires --d 2");
    lp = build_isotropic_lp(gadc_overlap(a.gamma, a.noise), 4, 2);
  } else {
    throw std::invalid_argument("no LP reduction for resource " + a.resource);
  }
  auto sol = sdp::solve_lp(lp, opts);
  if (!sol.optimal()) throw std::runtime_error("LP solve did not reach optimality");
  return 1.0 - sol.primal_value;
}

int cmd_compute(const ComputeArgs& a, const sdp::SolverOptions& opts) {
  json out = json::array();
  bool solver_trouble = false;
  auto want = [&](const char* m) { return a.method == m || a.method == "all"; };

  if (want("analytic")) {
    if (!has_closed_form(a.resource))
      throw std::invalid_argument("analytic method unavailable for this resource");
    json j{{"method", "analytic"}, {"value", closed_form_value(a)}, {"gap", 0.0},
           {"status", "optimal"}};
    out.push_back(std::move(j));
  }
  if (want("lp")) {
    if (!has_closed_form(a.resource))
      throw std::invalid_argument("lp method unavailable for this resource");
    json j{{"method", "lp"}, {"value", lp_value(a, opts)}, {"gap", 0.0},
           {"status", "optimal"}};
    out.push_back(std::move(j));
  }
  if (want("sdp")) {
    ErrorReport rep = eppt_swap(make_resource(a), a.d, opts);
    if (!rep.optimal()) solver_trouble = true;
    json j = error_report_to_json(rep);
    j.erase("certificate");  // keep single-computation output compact
    out.push_back(std::move(j));
  }
  if (out.empty()) throw std::invalid_argument("unknown method " + a.method);

  json doc{{"resource", make_resource(a).describe()}, {"d", a.d}, {"results", std::move(out)}};
  if (a.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::ofstream f(a.out);
    if (!f) throw std::runtime_error("cannot write " + a.out);
    f << doc.dump(2) << "\n";
  }
  return solver_trouble ? 3 : 0;
}

struct Range {
  double start = 0, stop = 0;
  int steps = 1;
  double at(int i) const {
    return steps <= 1 ? start : start + (stop - start) * i / double(steps - 1);
  }
};

struct SweepRow {
  std::vector<double> params;
  std::string method;
  double value = 0, gap = 0;
};

int cmd_sweep(const std::string& kind, const Range& r1, const Range& r2, std::vector<int> dA_list,
              int d, const std::string& methods, const std::string& out_path, int jobs,
              const sdp::SolverOptions& opts) {
  std::vector<std::string> header;
  struct Point {
    std::vector<double> params;
  };
  std::vector<Point> grid;

  if (kind == "none") {
    header = {"d"};
    for (int i = 0; i < r1.steps; ++i) grid.push_back({{r1.at(i)}});
  } else if (kind == "isotropic" || kind == "werner") {
    header = {kind == "isotropic" ? "F" : "p", "dA"};
    for (int i = 0; i < r1.steps; ++i)
      for (int da : dA_list) grid.push_back({{r1.at(i), double(da)}});
  } else if (kind == "gadc") {
    header = {"gamma", "N"};
    for (int i = 0; i < r1.steps; ++i)
      for (int j = 0; j < r2.steps; ++j) grid.push_back({{r1.at(i), r2.at(j)}});
  } else if (kind == "kpf16") {
    header = {"p1", "p2"};
    for (int i = 0; i < r1.steps; ++i)
      for (int j = 0; j < r2.steps; ++j) grid.push_back({{r1.at(i), r2.at(j)}});
  } else {
    throw std::invalid_argument("unknown sweep kind " + kind);
  }

  std::vector<std::string> method_list;
  if (methods == "all") method_list = {"analytic", "lp", "sdp"};
  else {
    std::stringstream ss(methods);
    std::string tok;
    while (std::getline(ss, tok, ',')) method_list.push_back(tok);
  }
  if (kind == "kpf16") method_list = {"sdp"};  // diamond-distance landscape

  auto eval_point = [&](const Point& pt) {
    std::vector<SweepRow> rows;
    for (const auto& method : method_list) {
      SweepRow row;
      row.params = pt.params;
      row.method = method;
      if (kind == "kpf16") {
        Kpf16Params kp{pt.params[0], pt.params[1]};
        row.value = kpf16_error(kp, opts);
        row.gap = 0.0;
      } else {
        ComputeArgs a;
        a.resource = kind;
        a.d = (kind == "none") ? int(pt.params[0] + 0.5) : d;
        if (kind == "isotropic") {
          a.fid = pt.params[0];
          a.dA = int(pt.params[1] + 0.5);
        } else if (kind == "werner") {
          a.p = pt.params[0];
          a.dA = int(pt.params[1] + 0.5);
        } else if (kind == "gadc") {
          a.gamma = pt.params[0];
          a.noise = pt.params[1];
        }
        if (method == "analytic") row.value = closed_form_value(a);
        else if (method == "lp") row.value = lp_value(a, opts);
        else {
          ErrorReport rep = eppt_swap(make_resource(a), a.d, opts);
          row.value = rep.value;
          row.gap = rep.gap;
        }
      }
      rows.push_back(std::move(row));
    }
    return rows;
  };

  if (jobs < 1) jobs = static_cast<int>(std::thread::hardware_concurrency());
  if (jobs < 1) jobs = 1;
  std::vector<SweepRow> all;
  std::mutex mtx;
  std::atomic<std::size_t> next{0};
  std::vector<std::future<void>> workers;
  for (int w = 0; w < jobs; ++w)
    workers.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= grid.size()) return;
        auto rows = eval_point(grid[i]);
        std::lock_guard<std::mutex> lk(mtx);
        for (auto& r : rows) all.push_back(std::move(r));
      }
    }));
  for (auto& w : workers) w.get();

  std::sort(all.begin(), all.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.params != b.params) return a.params < b.params;
    return a.method < b.method;
  });

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    os = &file;
  }
  for (const auto& h : header) *os << h << ",";
  *os << "method,value,gap\n";
  for (const auto& row : all) {
    for (double p : row.params) *os << fmt12(p) << ",";
    *os << row.method << "," << fmt12(row.value) << "," << fmt12(row.gap) << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& only, const sdp::SolverOptions& opts) {
  auto results = verify::run_checks(opts, only);
  if (results.empty()) {
    std::cerr << "no check named '" << only << "'\n";
    return 2;
  }
  json summary = json::array();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("%-26s %s  (%.1fs) %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.seconds,
                r.detail.c_str());
    std::fflush(stdout);
    summary.push_back(json{{"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                           {"seconds", r.seconds}});
    if (!r.pass) ++failures;
  }
  std::cout << json{{"checks", std::move(summary)}, {"failures", failures}}.dump() << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation error of bidirectional (controlled) quantum teleportation"};
  app.require_subcommand(1);

  sdp::SolverOptions opts = bqt::detail::tight_opts();
  double feas_tol = opts.feas_tol, gap_tol = opts.gap_tol;

  ComputeArgs cargs;
  auto* compute = app.add_subcommand("compute", "compute one simulation error");
  compute->add_option("--resource", cargs.resource, "none|isotropic|werner|gadc|custom");
  compute->add_option("--F", cargs.fid, "isotropic fidelity");
  compute->add_option("--p", cargs.p, "Werner parameter");
  compute->add_option("--gamma", cargs.gamma, "GADC damping");
  compute->add_option("--N", cargs.noise, "GADC noise");
  compute->add_option("--dA", cargs.dA, "resource local dimension");
  compute->add_option("--d", cargs.d, "swap channel dimension");
  compute->add_option("--method", cargs.method, "analytic|lp|sdp|all");
  compute->add_option("--file", cargs.file, "custom resource state (JSON)");
  compute->add_option("--out", cargs.out, "write JSON here instead of stdout");

  std::string sweep_kind = "none", sweep_methods = "analytic", sweep_out;
  std::vector<double> f_range, p_range, g_range, n_range, d_range, p1_range, p2_range;
  std::vector<int> dA_list{2};
  int sweep_d = 2, jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "sweep a parameter grid to CSV");
  sweep->add_option("--kind", sweep_kind, "none|isotropic|werner|gadc|kpf16");
  sweep->add_option("--methods", sweep_methods, "comma list of analytic,lp,sdp or all");
  sweep->add_option("--out", sweep_out, "CSV output path (default stdout)");
  sweep->add_option("--F-range", f_range, "start stop steps")->expected(3);
  sweep->add_option("--p-range", p_range, "start stop steps")->expected(3);
  sweep->add_option("--gamma-range", g_range, "start stop steps")->expected(3);
  sweep->add_option("--N-range", n_range, "start stop steps")->expected(3);
  sweep->add_option("--p1-range", p1_range, "start stop steps")->expected(3);
  sweep->add_option("--p2-range", p2_range, "start stop steps")->expected(3);
  sweep->add_option("--d-range", d_range, "start stop steps (kind=none)")->expected(3);
  sweep->add_option("--dA-list", dA_list, "resource dimensions");
  sweep->add_option("--d", sweep_d, "swap channel dimension");
  sweep->add_option("--jobs", jobs, "parallel grid workers (default: cores)");

  std::string only;
  auto* verify_cmd = app.add_subcommand("verify", "run the verification suite");
  verify_cmd->add_option("--only", only, "run a single named check");

  app.add_option("--feas-tol", feas_tol, "solver feasibility tolerance");
  app.add_option("--gap-tol", gap_tol, "solver duality-gap tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  opts.feas_tol = feas_tol;
  opts.gap_tol = gap_tol;
  opts = solver_options_from_env(opts);

  try {
    if (*compute) return cmd_compute(cargs, opts);
    if (*sweep) {
      auto mk = [](const std::vector<double>& v, Range dflt) {
        return v.size() == 3 ? Range{v[0], v[1], int(v[2] + 0.5)} : dflt;
      };
      Range r1, r2;
      if (sweep_kind == "none") r1 = mk(d_range, {2, 6, 5});
      else if (sweep_kind == "isotropic") r1 = mk(f_range, {0, 1, 5});
      else if (sweep_kind == "werner") r1 = mk(p_range, {0, 1, 5});
      else if (sweep_kind == "gadc") {
        r1 = mk(g_range, {0, 1, 5});
        r2 = mk(n_range, {0, 1, 5});
      } else if (sweep_kind == "kpf16") {
        r1 = mk(p1_range, {0, 1, 5});
        r2 = mk(p2_range, {0, 1, 5});
      }
      return cmd_sweep(sweep_kind, r1, r2, dA_list, sweep_d, sweep_methods, sweep_out, jobs,
                       opts);
    }
    if (*verify_cmd) return cmd_verify(only, opts);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
