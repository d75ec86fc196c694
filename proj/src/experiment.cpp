#include "mag/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "mag/analysis.hpp"
#include "mag/minimizer.hpp"
#include "mag/oracle.hpp"
#include "mag/sticky.hpp"

namespace mag {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string join_list(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

std::vector<std::size_t> one_based(const std::vector<std::size_t>& m) {
  std::vector<std::size_t> out;
  for (auto i : m) out.push_back(i + 1);
  return out;
}

struct Results {
  std::vector<std::pair<std::string, std::string>> entries;
  void add(const std::string& k, const std::string& v) { entries.emplace_back(k, v); }
  void add(const std::string& k, double v) { add(k, num(v)); }
};

std::string manifest_text(const char* status, const Scenario* s, const std::vector<std::string>& overrides,
                          const Results& r, const std::vector<OutputFile>& files) {
  std::string m = fmt::format("status = {}\n", status);
  m += fmt::format("overrides = {}\n", join_list(overrides));
  if (s) m += "\n[scenario]\n" + to_text(*s);
  if (!r.entries.empty()) {
    m += "\n[results]\n";
    for (auto& [k, v] : r.entries) m += fmt::format("{} = {}\n", k, v);
  }
  if (!files.empty()) {
    m += "\n[outputs]\n";
    for (auto& f : files) m += fmt::format("{} = sha256:{}\n", f.name, sha256_hex(f.content));
  }
  return m;
}

ActionSpec action_spec(const Scenario& s, double eps) {
  ActionSpec a;
  a.kind = s.functional;
  a.eps = eps;
  a.weight = s.weight;
  a.start = s.start;
  a.end = s.end;
  a.source = s.source_cloud();
  a.target = s.target_cloud();
  a.endpoint_mode = s.endpoint_mode;
  a.lattice = s.lattice_points();
  a.endpoint_tol = s.endpoint_tol;
  a.partition_tol = s.cluster_tol;
  return s.endpoint_mode == EndpointMode::UpToPermutation ? resolve_endpoints(a) : a;
}

bool sorted_line(const Cloud& c) {
  for (std::size_t i = 1; i < c.count(); ++i)
    if (c[i] < c[i - 1]) return false;
  return true;
}

// Exact reference for the theta-gauge companion functional when the 1-d enumeration applies.
std::optional<OracleResult> oracle_for(const Scenario& s, const ActionSpec& spec) {
  if (s.functional != ActionKind::LambdaEps || s.dim != 1 || spec.lattice.count() > 3 ||
      !spec.lattice.strictly_ordered() || !sorted_line(spec.source) || !sorted_line(spec.target))
    return std::nullopt;
  return oracle_minimizer_1d(spec.lattice, spec.source, spec.target, s.start, s.end, s.grid);
}

std::string summary_header() { return "eps,min_value,limit_value,oracle_value,sup_distance,grad_norm,iterations,converged\n"; }

std::string summary_row(const SweepEntry& e, const std::optional<OracleResult>& o) {
  return fmt::format("{},{},{},{},{},{},{},{}\n", num(e.eps), num(e.report.value), num(e.limit_value),
                     o ? num(o->value) : "", o ? num(sup_distance(e.report.final_traj, o->trajectory)) : "",
                     num(e.report.grad_norm), e.report.iterations, e.report.converged ? 1 : 0);
}

void run_descent(const Scenario& s, const std::vector<double>& schedule, bool sweep, std::vector<OutputFile>& files,
                 Results& r) {
  const ActionSpec base = action_spec(s, schedule.front());
  const Trajectory init = straight_line(s.gauge, s.start, s.end, s.grid, base.source, base.target);
  SolveOptions opts;
  opts.grad_tol = s.grad_tol;
  opts.max_iter = s.max_iter;
  std::vector<SweepEntry> entries = continuation_sweep(base, schedule, init, opts);
  std::stable_sort(entries.begin(), entries.end(), [](const SweepEntry& x, const SweepEntry& y) { return x.eps > y.eps; });
  auto oracle = oracle_for(s, base);

  std::string summary = summary_header();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    summary += summary_row(entries[k], oracle);
    files.push_back({sweep ? fmt::format("trajectory_eps_{}.csv", k) : "trajectory.csv",
                     trajectory_csv(entries[k].report.final_traj)});
  }
  files.push_back({"summary.csv", summary});
  if (oracle) {
    files.push_back({"oracle.csv", trajectory_csv(oracle->trajectory)});
    r.add("oracle_value", oracle->value);
  }
  const SweepEntry& last = entries.back();
  r.add("final_eps", last.eps);
  r.add("final_value", last.report.value);
  r.add("final_limit_value", last.limit_value);
  r.add("all_converged", std::all_of(entries.begin(), entries.end(), [](auto& e) { return e.report.converged; })
                             ? std::string("true")
                             : std::string("false"));
}

void run_sticky(const Scenario& s, std::vector<OutputFile>& files, Results& r) {
  const Lattice a = s.lattice_points();
  StickyRun run = simulate_sticky(a, s.source_cloud(), s.velocity_cloud(), s.start, s.end, s.grid);
  std::string events;
  for (const MergeEvent& e : run.events) {
    Json j;
    j["time"] = e.time;
    j["position"] = e.position;
    j["members"] = one_based(e.members);
    j["incoming"] = e.incoming;
    j["masses"] = e.masses;
    j["velocity"] = e.velocity;
    j["kinetic_loss"] = e.kinetic_loss;
    j["energy_jump"] = merge_energy_jump(e, a);
    events += j.dump() + "\n";
  }
  files.push_back({"trajectory.csv", trajectory_csv(run.trajectory)});
  files.push_back({"events.jsonl", events});
  r.add("events", std::to_string(run.events.size()));
  r.add("momentum_residual", momentum_residual(run.trajectory, a));
}

void run_heatwave(const Scenario& s, std::vector<OutputFile>& files, Results& r) {
  const Lattice a = s.lattice_points();
  const Cloud x0 = s.source_cloud();
  Trajectory comp = integrate_companion(x0, s.start, s.end, s.grid, s.eps, a);
  files.push_back({"companion.csv", trajectory_csv(comp)});
  NoiseSpec noise{s.noise_eta, s.noise_alpha, s.seed, s.grid};
  for (std::size_t k = 0; k < s.samples; ++k)
    files.push_back({fmt::format("sample_{}.csv", k), trajectory_csv(sample_sde(x0, s.start, s.end, noise, s.eps, a, k))});
  std::vector<std::string> end;
  for (double v : comp.state(s.grid).to_vector()) end.push_back(num(v));
  r.add("companion_end", join_list(end));
}

const char* kind_name(ShockKind k) {
  switch (k) {
    case ShockKind::Merge: return "merge";
    case ShockKind::Split: return "split";
    case ShockKind::Regroup: return "regroup";
  }
  return "?";
}

void run_check(const Scenario& s, std::vector<OutputFile>& files, Results& r) {
  const Lattice a = s.lattice_points();
  OracleResult o = oracle_minimizer_1d(a, s.source_cloud(), s.target_cloud(), s.start, s.end, s.grid);
  EnergyProfile e = energy_profile(o.trajectory, a, s.cluster_tol);
  std::string shocks;
  std::size_t passed = 0, checked = 0;
  for (const ShockRecord& sh : detect_shocks(o.trajectory, s.cluster_tol)) {
    Json j;
    j["time"] = sh.time;
    j["location"] = sh.location;
    j["members"] = one_based(sh.members);
    j["kind"] = kind_name(sh.kind);
    j["isolated"] = sh.isolated;
    if (sh.isolated) {
      JumpCheck c = check_velocity_jump(o.trajectory, sh, a);
      j["jump"] = c.jump;
      j["alpha"] = c.alpha;
      j["inconclusive"] = c.inconclusive;
      j["pass"] = c.pass;
      if (!c.inconclusive) {
        ++checked;
        passed += c.pass ? 1 : 0;
      }
    }
    shocks += j.dump() + "\n";
  }
  double stuck = 0;
  for (const Interval& iv : stuck_intervals(o.trajectory, s.cluster_tol)) stuck += iv.end - iv.begin;
  files.push_back({"oracle.csv", trajectory_csv(o.trajectory)});
  files.push_back({"shocks.jsonl", shocks});
  r.add("oracle_value", o.value);
  r.add("energy_max_deviation", e.max_deviation);
  r.add("energy_median", e.median);
  r.add("momentum_residual", momentum_residual(o.trajectory, a));
  r.add("max_spread", max_spread(o.trajectory));
  r.add("stuck_fraction", stuck / (s.end - s.start));
  r.add("jump_checks_passed", fmt::format("{}/{}", passed, checked));
}

}  // namespace

const OutputFile* Bundle::find(std::string_view name) const {
  for (const OutputFile& f : files)
    if (f.name == name) return &f;
  return nullptr;
}

Bundle run_experiment(const Scenario& s, const std::vector<std::string>& overrides) {
  validate(s);
  Bundle b;
  Results r;
  switch (s.experiment) {
    case ExperimentKind::Minimize: run_descent(s, {s.eps}, false, b.files, r); break;
    case ExperimentKind::GammaSweep: run_descent(s, s.schedule, true, b.files, r); break;
    case ExperimentKind::Sticky: run_sticky(s, b.files, r); break;
    case ExperimentKind::Heatwave: run_heatwave(s, b.files, r); break;
    case ExperimentKind::CheckInvariants: run_check(s, b.files, r); break;
  }
  b.files.push_back({"scenario.txt", to_text(s)});
  b.files.push_back({"manifest.txt", manifest_text("ok", &s, overrides, r, b.files)});
  return b;
}

Bundle failure_bundle(const Scenario* s, const std::string& error, const std::vector<std::string>& overrides) {
  Results r;
  std::string one_line = error;
  std::replace(one_line.begin(), one_line.end(), '\n', ' ');
  r.add("error", one_line);
  return {{{"manifest.txt", manifest_text("failed", s, overrides, r, {})}}};
}

std::vector<std::filesystem::path> write_outputs(const Bundle& b, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", out_dir.string(), ec.message()));
  std::vector<std::filesystem::path> paths;
  for (const OutputFile& f : b.files) {
    std::filesystem::path p = out_dir / f.name;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << f.content;
    out.close();
    if (!out) throw std::runtime_error("write failed: " + p.string());
    paths.push_back(p);
  }
  return paths;
}

std::string trajectory_csv(const Trajectory& traj) {
  const std::size_t n = traj.count(), d = traj.dim();
  std::string out = traj.gauge() == Gauge::Theta ? "theta" : "t";
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t c = 1; c <= d; ++c) out += d == 1 ? fmt::format(",z_{}", i) : fmt::format(",z_{}.{}", i, c);
  out += '\n';
  for (std::size_t k = 0; k <= traj.steps(); ++k) {
    out += num(traj.time(k));
    for (Eigen::Index j = 0; j < traj.data().cols(); ++j)
      out += "," + num(traj.data()(static_cast<Eigen::Index>(k), j));
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::size_t pos = 0, line = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view l(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line;
    std::vector<std::string_view> cells;
    for (std::size_t b = 0;;) {
      std::size_t c = l.find(',', b);
      cells.push_back(l.substr(b, c == std::string_view::npos ? std::string_view::npos : c - b));
      if (c == std::string_view::npos) break;
      b = c + 1;
    }
    if (line == 1) {
      for (auto c : cells) header.emplace_back(c);
      continue;
    }
    if (cells.size() != header.size()) throw ValidationError(fmt::format("csv line {}: wrong column count", line));
    std::vector<double> row;
    for (auto c : cells) {
      double v = 0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw ValidationError(fmt::format("csv line {}: malformed number '{}'", line, c));
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (header.size() < 2 || rows.size() < 2) throw ValidationError("csv: need a header and at least two rows");
  if (header[0] != "theta" && header[0] != "t") throw ValidationError("csv: first column must be theta or t");
  const std::size_t cols = header.size() - 1;
  std::size_t d = 1;
  if (auto dot = header.back().find('.'); dot != std::string::npos) d = std::stoul(header.back().substr(dot + 1));
  if (cols % d) throw ValidationError("csv: inconsistent header");
  Trajectory tr(header[0] == "theta" ? Gauge::Theta : Gauge::Time, rows.front()[0], rows.back()[0], rows.size() - 1,
                cols / d, d);
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t j = 0; j < cols; ++j)
      tr.data()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[k][j + 1];
  tr.sync_endpoints();
  return tr;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

}  // namespace mag
