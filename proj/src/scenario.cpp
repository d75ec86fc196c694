#include "mag/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace mag {

namespace {

constexpr ExperimentKind kExperiments[] = {ExperimentKind::Minimize, ExperimentKind::GammaSweep, ExperimentKind::Sticky,
                                           ExperimentKind::Heatwave, ExperimentKind::CheckInvariants};

struct Token {
  std::string_view text;
  std::size_t line, column;
  const std::string* origin;

  [[noreturn]] void fail(const std::string& what, std::size_t offset = 0) const {
    throw ParseError(*origin, line, column + offset, what);
  }
};

std::string_view trim(std::string_view s, std::size_t* lead = nullptr) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  if (lead) *lead = b;
  return s.substr(b, e - b);
}

double read_double(const Token& t) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (t.text.empty()) t.fail("expected a number");
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    t.fail("malformed number '" + std::string(t.text) + "'", static_cast<std::size_t>(ptr - t.text.data()));
  if (!std::isfinite(v)) t.fail("non-finite number '" + std::string(t.text) + "'");
  return v;
}

std::uint64_t read_u64(const Token& t) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (t.text.empty()) t.fail("expected a non-negative integer");
  if (ec != std::errc() || ptr != t.text.data() + t.text.size())
    t.fail("malformed integer '" + std::string(t.text) + "'", static_cast<std::size_t>(ptr - t.text.data()));
  return v;
}

std::size_t read_size(const Token& t) { return static_cast<std::size_t>(read_u64(t)); }

std::vector<double> read_list(const Token& t) {
  std::vector<double> out;
  if (t.text.empty()) return out;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = t.text.find(',', pos);
    std::string_view raw = t.text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    std::size_t lead = 0;
    std::string_view item = trim(raw, &lead);
    out.push_back(read_double({item, t.line, t.column + pos + lead, t.origin}));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <class E>
E read_enum(const Token& t, std::initializer_list<std::pair<const char*, E>> names) {
  std::string opts;
  for (auto& [n, e] : names) {
    if (t.text == n) return e;
    opts += opts.empty() ? n : std::string(", ") + n;
  }
  t.fail("unknown value '" + std::string(t.text) + "' (expected one of " + opts + ")");
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string list(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s;
}

struct Field {
  const char* key;
  std::function<void(Scenario&, const Token&)> read;
  std::function<std::string(const Scenario&)> write;
};

const std::vector<Field>& fields() {
  using S = Scenario;
  static const std::vector<Field> f = {
      {"name",
       [](S& s, const Token& t) {
         if (t.text.empty()) t.fail("empty name");
         for (std::size_t i = 0; i < t.text.size(); ++i) {
           char c = t.text[i];
           if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
             t.fail("name may only contain letters, digits, '_', '-' and '.'", i);
         }
         s.name = t.text;
       },
       [](const S& s) { return s.name; }},
      {"experiment",
       [](S& s, const Token& t) {
         try {
           s.experiment = experiment_kind_from_string(std::string(t.text));
         } catch (const ValidationError& e) {
           t.fail(e.what());
         }
       },
       [](const S& s) { return std::string(to_string(s.experiment)); }},
      {"dim", [](S& s, const Token& t) { s.dim = read_size(t); }, [](const S& s) { return std::to_string(s.dim); }},
      {"lattice", [](S& s, const Token& t) { s.lattice = read_list(t); }, [](const S& s) { return list(s.lattice); }},
      {"source", [](S& s, const Token& t) { s.source = read_list(t); }, [](const S& s) { return list(s.source); }},
      {"target", [](S& s, const Token& t) { s.target = read_list(t); }, [](const S& s) { return list(s.target); }},
      {"velocity", [](S& s, const Token& t) { s.velocity = read_list(t); },
       [](const S& s) { return list(s.velocity); }},
      {"gauge", [](S& s, const Token& t) { s.gauge = read_enum<Gauge>(t, {{"theta", Gauge::Theta}, {"t", Gauge::Time}}); },
       [](const S& s) { return std::string(s.gauge == Gauge::Theta ? "theta" : "t"); }},
      {"start", [](S& s, const Token& t) { s.start = read_double(t); }, [](const S& s) { return num(s.start); }},
      {"end", [](S& s, const Token& t) { s.end = read_double(t); }, [](const S& s) { return num(s.end); }},
      {"functional",
       [](S& s, const Token& t) {
         try {
           s.functional = action_kind_from_string(std::string(t.text));
         } catch (const ValidationError& e) {
           t.fail(e.what());
         }
       },
       [](const S& s) { return std::string(to_string(s.functional)); }},
      {"weight",
       [](S& s, const Token& t) {
         s.weight = read_enum<WeightKind>(t, {{"linear", WeightKind::Linear}, {"unit", WeightKind::Unit}});
       },
       [](const S& s) { return std::string(s.weight == WeightKind::Linear ? "linear" : "unit"); }},
      {"endpoint_mode",
       [](S& s, const Token& t) {
         s.endpoint_mode = read_enum<EndpointMode>(t, {{"fixed", EndpointMode::Fixed}, {"permutation", EndpointMode::UpToPermutation}});
       },
       [](const S& s) { return std::string(s.endpoint_mode == EndpointMode::Fixed ? "fixed" : "permutation"); }},
      {"eps", [](S& s, const Token& t) { s.eps = read_double(t); }, [](const S& s) { return num(s.eps); }},
      {"schedule", [](S& s, const Token& t) { s.schedule = read_list(t); },
       [](const S& s) { return list(s.schedule); }},
      {"grid", [](S& s, const Token& t) { s.grid = read_size(t); }, [](const S& s) { return std::to_string(s.grid); }},
      {"grad_tol", [](S& s, const Token& t) { s.grad_tol = read_double(t); },
       [](const S& s) { return num(s.grad_tol); }},
      {"max_iter", [](S& s, const Token& t) { s.max_iter = read_size(t); },
       [](const S& s) { return std::to_string(s.max_iter); }},
      {"cluster_tol", [](S& s, const Token& t) { s.cluster_tol = read_double(t); },
       [](const S& s) { return num(s.cluster_tol); }},
      {"endpoint_tol", [](S& s, const Token& t) { s.endpoint_tol = read_double(t); },
       [](const S& s) { return num(s.endpoint_tol); }},
      {"noise_eta", [](S& s, const Token& t) { s.noise_eta = read_double(t); },
       [](const S& s) { return num(s.noise_eta); }},
      {"noise_alpha",
       [](S& s, const Token& t) {
         s.noise_alpha = read_enum<NoiseProfile>(t, {{"inv_sqrt", NoiseProfile::InvSqrt}, {"unit", NoiseProfile::Unit}});
       },
       [](const S& s) { return std::string(s.noise_alpha == NoiseProfile::InvSqrt ? "inv_sqrt" : "unit"); }},
      {"samples", [](S& s, const Token& t) { s.samples = read_size(t); },
       [](const S& s) { return std::to_string(s.samples); }},
      {"seed", [](S& s, const Token& t) { s.seed = read_u64(t); }, [](const S& s) { return std::to_string(s.seed); }},
  };
  return f;
}

[[noreturn]] void bad(const char* field, const std::string& why) {
  throw ValidationError(fmt::format("scenario field '{}': {}", field, why));
}

Cloud make_cloud(const std::vector<double>& v, std::size_t dim) {
  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  return Cloud(v.size() / dim, dim, c);
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Minimize: return "minimize";
    case ExperimentKind::GammaSweep: return "gamma-sweep";
    case ExperimentKind::Sticky: return "sticky";
    case ExperimentKind::Heatwave: return "heatwave";
    case ExperimentKind::CheckInvariants: return "check-invariants";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : kExperiments)
    if (s == to_string(k)) return k;
  throw ValidationError("unknown experiment \"" + s + "\"");
}

Lattice Scenario::lattice_points() const { return Lattice(make_cloud(lattice, dim)); }
Cloud Scenario::source_cloud() const { return make_cloud(source, dim); }
Cloud Scenario::target_cloud() const { return make_cloud(target, dim); }
Cloud Scenario::velocity_cloud() const { return make_cloud(velocity, dim); }

ParseError::ParseError(const std::string& origin, std::size_t line, std::size_t column, const std::string& what)
    : ValidationError(fmt::format("{}:{}:{}: {}", origin, line, column, what)), line_(line), column_(column) {}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  Scenario s;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view l = raw;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    std::size_t lead = 0;
    std::string_view body = trim(l, &lead);
    if (body.empty()) continue;
    std::size_t eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(origin, line, lead + body.size() + 1, "expected '='");
    std::string key(trim(body.substr(0, eq)));
    if (key.empty()) throw ParseError(origin, line, lead + 1, "missing key before '='");
    auto it = std::find_if(fields().begin(), fields().end(), [&](const Field& f) { return key == f.key; });
    if (it == fields().end()) throw ParseError(origin, line, lead + 1, "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ParseError(origin, line, lead + 1, "duplicate key '" + key + "'");
    std::size_t vlead = 0;
    std::string_view value = trim(body.substr(eq + 1), &vlead);
    it->read(s, Token{value, line, lead + eq + 1 + vlead + 1, &origin});
  }
  for (const char* req : {"lattice", "source"})
    if (!seen.count(req)) throw ValidationError(fmt::format("{}: missing required key '{}'", origin, req));
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

void validate(const Scenario& s) {
  const bool t_gauge = s.gauge == Gauge::Time;
  if (s.dim < 1) bad("dim", "must be at least 1");
  if (s.lattice.empty()) bad("lattice", "must not be empty");
  if (s.lattice.size() % s.dim) bad("lattice", "length is not a multiple of dim");
  const std::size_t n = s.lattice.size() / s.dim, len = n * s.dim;
  if (s.source.size() != len) bad("source", fmt::format("expected {} numbers", len));
  if (!(s.end > s.start)) bad("end", "must exceed start");
  if (t_gauge && !(s.start > 0)) bad("start", "heat kernel requires t>0");
  if (!(s.eps > 0)) bad("eps", "must be positive");
  if (s.schedule.empty()) bad("schedule", "must not be empty");
  for (std::size_t i = 0; i < s.schedule.size(); ++i) {
    if (!(s.schedule[i] > 0)) bad("schedule", "entries must be positive");
    if (i && !(s.schedule[i] < s.schedule[i - 1])) bad("schedule", "must be strictly decreasing");
  }
  if (s.grid < 1) bad("grid", "must be at least 1");
  if (!(s.grad_tol > 0)) bad("grad_tol", "must be positive");
  if (s.max_iter < 1) bad("max_iter", "must be at least 1");
  if (!(s.cluster_tol >= 0)) bad("cluster_tol", "must be non-negative");
  if (!(s.endpoint_tol >= 0)) bad("endpoint_tol", "must be non-negative");
  if (!(s.noise_eta >= 0)) bad("noise_eta", "must be non-negative");
  if (s.samples < 1) bad("samples", "must be at least 1");

  const Lattice a = s.lattice_points();
  auto need_line = [&](const char* what) {
    if (s.dim != 1) bad("dim", fmt::format("{} needs dim = 1", what));
    if (!a.strictly_ordered()) bad("lattice", fmt::format("{} needs a strictly increasing lattice", what));
  };
  switch (s.experiment) {
    case ExperimentKind::Minimize:
    case ExperimentKind::GammaSweep:
      if (!is_smooth(s.functional)) bad("functional", "must be one of L_eps, K_eps, Lambda_eps");
      if (gauge_of(s.functional) != s.gauge)
        bad("gauge", fmt::format("{} lives in the {} gauge", to_string(s.functional),
                                 gauge_of(s.functional) == Gauge::Time ? "t" : "theta"));
      if (s.target.size() != len) bad("target", fmt::format("expected {} numbers", len));
      break;
    case ExperimentKind::Sticky:
      need_line("sticky");
      if (t_gauge) bad("gauge", "sticky runs in the theta gauge");
      if (s.velocity.size() != n) bad("velocity", fmt::format("expected {} numbers", n));
      for (std::size_t i = 1; i < n; ++i)
        if (s.source[i] < s.source[i - 1]) bad("source", "sticky needs non-decreasing positions");
      break;
    case ExperimentKind::Heatwave:
      if (!t_gauge) bad("gauge", "heatwave runs in the t gauge");
      break;
    case ExperimentKind::CheckInvariants:
      need_line("check-invariants");
      if (t_gauge) bad("gauge", "check-invariants runs in the theta gauge");
      if (n > 3) bad("lattice", "check-invariants supports at most 3 particles");
      if (s.target.size() != len) bad("target", fmt::format("expected {} numbers", len));
      break;
  }
}

std::string to_text(const Scenario& s) {
  std::string out;
  for (const Field& f : fields()) out += fmt::format("{} = {}\n", f.key, f.write(s));
  return out;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write scenario file " + path.string());
  out << to_text(s);
  if (!out) throw ValidationError("write failed for " + path.string());
}

}  // namespace mag
