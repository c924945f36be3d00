#include "vpme/reports.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vpme/error.hpp"
#include "vpme/measures.hpp"
#include "vpme/ot_solvers.hpp"

#ifndef VPME_VERSION
#define VPME_VERSION "unversioned"
#endif

namespace vpme {

using nlohmann::ordered_json;

namespace {

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

ordered_json numbers(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

std::vector<std::pair<std::string, double>> solver_tolerances(const MetricSpec& metric) {
  const NewtonOptions newton;
  const AuctionOptions auction;
  const SinkhornOptions sinkhorn;
  return {{"newton_residual", newton.tolerance},
          {"auction_relative_tolerance", auction.relative_tolerance},
          {"sinkhorn_regularization", sinkhorn.reg},
          {"sinkhorn_marginal_tolerance", sinkhorn.tolerance},
          {"exact_assignment_max_size", static_cast<double>(kExactSizeLimit)},
          {"metric_p", static_cast<double>(metric.p)},
          {"metric_lambda", metric.lambda}};
}

ReportMeta base_meta(const ExperimentConfig& cfg) {
  ReportMeta m;
  m.experiment = to_string(cfg.kind);
  m.config_hash = hex_hash(cfg.hash());
  m.config = cfg.canonical();
  m.code_version = code_version();
  m.seeds = cfg.seeds;
  m.tolerances = solver_tolerances(cfg.metric);
  m.override_regime = cfg.override_regime;
  m.regime_notes = cfg.regime_notes;
  return m;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, p, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + p.string() + ": " + ec.message());
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_header(const std::string_view* begin, std::size_t count) {
  std::string s;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) s += ',';
    s += begin[i];
  }
  return s + '\n';
}

std::size_t csv_field_count(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  std::size_t n = 1;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    else if (ch == ',' && !quoted) ++n;
  }
  return n;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream os;
  os << csv_header(kConvergenceColumns);
  for (const auto& row : t.rows) {
    const auto emit = [&](double time, double dist) {
      os << t.experiment << ',' << format_double(row.sweep_value) << ',' << row.seed << ',' << format_double(time)
         << ',' << format_double(dist) << ',' << format_double(row.sup_distance) << ',' << format_double(row.aux)
         << ',' << (row.complete ? 1 : 0) << ',' << csv_text(row.note) << '\n';
    };
    if (row.distances.empty()) emit(std::nan(""), std::nan(""));
    for (std::size_t s = 0; s < row.distances.size(); ++s)
      emit(s < t.times.size() ? t.times[s] : std::nan(""), row.distances[s]);
  }
  return os.str();
}

std::string tail_csv(const TailTable& t) {
  std::ostringstream os;
  os << csv_header(kTailColumns);
  for (const auto& p : t.points)
    os << p.dim << ',' << p.n << ',' << format_double(p.x) << ',' << format_double(p.empirical) << ','
       << format_double(p.std_error) << ',' << format_double(p.a) << ',' << format_double(p.b) << ','
       << format_double(p.bound) << ',' << (p.dominated ? 1 : 0) << '\n';
  return os.str();
}

std::string simulation_csv(const RunRecord& r) {
  std::ostringstream os;
  os << csv_header(kSimulationColumns);
  const double e0 = r.snapshots.empty() ? 0.0 : r.snapshots.front().energy.total;
  for (const auto& s : r.snapshots) {
    const double drift = e0 != 0.0 ? std::abs(s.energy.total - e0) / std::abs(e0) : 0.0;
    os << format_double(s.time) << ',' << format_double(s.energy.kinetic) << ',' << format_double(s.energy.field)
       << ',' << format_double(s.energy.thermal) << ',' << format_double(s.energy.total) << ','
       << format_double(drift) << ',' << format_double(s.support_radius) << ',' << format_double(s.max_density)
       << ',' << s.newton_iters << '\n';
  }
  return os.str();
}

std::string poisson_csv(const std::vector<PoissonCheckRow>& rows) {
  std::ostringstream os;
  os << csv_header(kPoissonColumns);
  for (const auto& r : rows)
    os << format_double(r.epsilon) << ',' << format_double(r.max_error) << ',' << format_double(r.neutrality_error)
       << ',' << format_double(r.full_residual) << ',' << format_double(r.hat_residual) << ',' << r.newton_iters
       << '\n';
  return os.str();
}

std::string hex_hash(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return s;
}

std::string code_version() { return VPME_VERSION; }

ReportMeta make_meta(const ExperimentConfig& cfg, const ConvergenceTable& t) {
  ReportMeta m = base_meta(cfg);
  m.columns.assign(kConvergenceColumns.begin(), kConvergenceColumns.end());
  ordered_json s;
  s["reference"] = t.reference;
  s["times"] = numbers(t.times);
  s["sweep_values"] = numbers(t.sweep_values);
  s["median_sup_distance"] = numbers(t.medians);
  s["loglog_slope"] = number(t.slope);
  s["slope_band"] = {number(t.slope_lo), number(t.slope_hi)};
  ordered_json incomplete = ordered_json::array();
  for (const auto& row : t.rows)
    if (!row.complete) incomplete.push_back({{"sweep_value", number(row.sweep_value)}, {"seed", row.seed}});
  s["incomplete_rows"] = incomplete;
  if (!t.compliance.empty()) {
    ordered_json c = ordered_json::array();
    for (const auto& r : t.compliance)
      c.push_back({{"epsilon", r.epsilon},
                   {"r", r.r},
                   {"required_log3", number(r.required_log3)},
                   {"actual_log3", number(r.actual_log3)},
                   {"r_max", r.r_max},
                   {"status", r.status}});
    s["compliance"] = c;
  }
  m.summary = s.dump();
  return m;
}

ReportMeta make_meta(const ExperimentConfig& cfg, const TailTable& t) {
  ReportMeta m = base_meta(cfg);
  m.columns.assign(kTailColumns.begin(), kTailColumns.end());
  ordered_json fits = ordered_json::array();
  for (const auto& f : t.fits) {
    ordered_json n = ordered_json::array();
    for (auto v : f.n_values) n.push_back(v);
    fits.push_back({{"dim", f.dim},
                    {"c", f.c},
                    {"C", f.C},
                    {"dominates_all", f.dominates_all},
                    {"informative", f.informative},
                    {"n", n},
                    {"median_w2_squared", numbers(f.medians)},
                    {"median_slope", number(f.median_slope)},
                    {"quadrature_floor", numbers(f.r_quad)}});
  }
  ordered_json s;
  s["fits"] = fits;
  m.summary = s.dump();
  return m;
}

ReportMeta make_meta(const SimulationConfig& cfg, const RunRecord& r) {
  ReportMeta m;
  m.experiment = "simulate";
  m.config_hash = hex_hash(cfg.hash());
  m.config = cfg.canonical();
  m.code_version = code_version();
  m.seeds = {cfg.seed};
  m.tolerances = {{"newton_residual", cfg.newton.tolerance}};
  m.columns.assign(kSimulationColumns.begin(), kSimulationColumns.end());
  ordered_json s;
  s["dt"] = r.dt;
  s["steps"] = r.steps;
  s["complete"] = r.complete;
  s["error"] = r.error;
  s["max_relative_energy_drift"] = number(r.max_relative_energy_drift);
  m.summary = s.dump();
  return m;
}

std::string to_json(const ReportMeta& m) {
  ordered_json j;
  j["experiment"] = m.experiment;
  j["config_hash"] = m.config_hash;
  j["config"] = m.config;
  j["code_version"] = m.code_version;
  j["seeds"] = m.seeds;
  ordered_json tol = ordered_json::object();
  for (const auto& [k, v] : m.tolerances) tol[k] = v;
  j["tolerances"] = tol;
  j["override_regime"] = m.override_regime;
  j["regime_notes"] = m.regime_notes;
  j["columns"] = m.columns;
  j["summary"] = m.summary.empty() ? ordered_json::object() : ordered_json::parse(m.summary);
  return j.dump(2) + "\n";
}

ReportMeta parse_meta(const std::string& text) {
  try {
    const auto j = ordered_json::parse(text);
    ReportMeta m;
    m.experiment = j.at("experiment").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& [k, v] : j.at("tolerances").items()) m.tolerances.emplace_back(k, v.get<double>());
    m.override_regime = j.at("override_regime").get<bool>();
    m.regime_notes = j.at("regime_notes").get<std::vector<std::string>>();
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.summary = j.at("summary").dump();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report metadata: ") + e.what());
  }
}

ReportMeta read_meta(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_meta(ss.str());
}

std::string timing_json(const ConvergenceTable& t) {
  ordered_json j;
  j["reference_runtime_s"] = t.reference_runtime_s;
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"sweep_value", number(r.sweep_value)}, {"seed", r.seed}, {"runtime_s", r.runtime_s}});
  j["rows"] = rows;
  return j.dump(2) + "\n";
}

std::string timing_json(const TailTable& t) {
  ordered_json j;
  j["runtime_s"] = t.runtime_s;
  return j.dump(2) + "\n";
}

std::filesystem::path report_dir(const std::filesystem::path& out, const ReportMeta& m) {
  return out / m.experiment / m.config_hash;
}

ReportPaths write_report(const std::filesystem::path& out, const ReportMeta& meta, const std::string& csv,
                         const std::string& timing) {
  ReportPaths p;
  p.dir = report_dir(out, meta);
  std::error_code ec;
  std::filesystem::create_directories(p.dir, ec);
  if (ec) throw IoError("cannot create " + p.dir.string() + ": " + ec.message());
  p.results = p.dir / "results.csv";
  p.meta = p.dir / "meta.json";
  write_file(p.results, csv);
  write_file(p.meta, to_json(meta));
  if (!timing.empty()) {
    p.timing = p.dir / "timing.json";
    write_file(p.timing, timing);
  }
  return p;
}

}  // namespace vpme
