#ifndef QWALK_SCAN_HPP
#define QWALK_SCAN_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qwalk/config.hpp"
#include "qwalk/parallel.hpp"
#include "qwalk/spectrum.hpp"
#include "qwalk/symmetry.hpp"
#include "qwalk/topology.hpp"

namespace qwalk {

inline constexpr int schema_version = 1;

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Artifact {
  std::string suffix;  // appended to the output stem; empty for a single run
  std::string content;
};

/// Shortest decimal that reads back to the same double.
inline std::string fmt(double x)
{
  if (x == 0) return "0";  // no "-0"
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

namespace detail {

struct Run {
  int T = 0;  // 0 when T is the swept parameter
  std::string suffix;
};

inline std::vector<Run> runs(const SweepConfig& c)
{
  if (c.sweep && c.sweep->symbol == "T") return {{0, ""}};
  std::vector<Run> r;
  for (int t : c.steps) r.push_back({t, c.steps.size() > 1 ? "_T" + std::to_string(t) : ""});
  return r;
}

inline std::vector<ProtocolSpec> specs_for(const SweepConfig& c, const std::vector<double>& values, int T)
{
  std::vector<ProtocolSpec> s;
  s.reserve(values.size());
  for (double v : values) s.push_back(resolve_protocol(c, v, T));
  return s;
}

inline double mesh_coord(int n, int i) { return -pi + 2 * pi * i / n; }

}  // namespace detail

// ---------------------------------------------------------------------------
// bands

inline std::vector<Artifact> cmd_bands(const SweepConfig& c)
{
  validate_config(c);
  const auto values = sweep_values(c);
  std::vector<Artifact> out;
  for (const auto& run : detail::runs(c)) {
    const auto specs = detail::specs_for(c, values, run.T);
    const int D = specs[0].dimension;
    if (specs[0].bands() != 2) throw UsageError("bands needs a two-band protocol; " + c.protocol + " is doubled");
    const int n = c.grid;
    std::string text = "sweep_param";
    for (int a = 0; a < D; ++a) text += ",k" + std::to_string(a + 1);
    text += ",e_plus";
    for (int a = 0; a < D; ++a) text += ",v_k" + std::to_string(a + 1);
    text += ",status\n";
    // one task per (sweep value, k1) slice, rows inside a slice in lexicographic k order
    const std::size_t tasks = values.size() * static_cast<std::size_t>(n);
    const std::size_t inner = grid_points(D - 1, n);
    const auto chunks = parallel_map<std::string>(tasks, c.workers, [&](std::size_t t) {
      const std::size_t vi = t / n;
      const int i1 = static_cast<int>(t % n);
      const ProtocolSpec& s = specs[vi];
      const std::string head = fmt(values[vi]) + ",";
      std::string rows;
      for (std::size_t r = 0; r < inner; ++r) {
        Momentum k;
        k.n = D;
        k[0] = detail::mesh_coord(n, i1);
        std::size_t rest = r;
        for (int a = D - 1; a >= 1; --a) {
          k[a] = detail::mesh_coord(n, static_cast<int>(rest % n));
          rest /= n;
        }
        const BandPoint bp = band_point(s, k);
        rows += head;
        for (int a = 0; a < D; ++a) rows += fmt(k[a]) + ",";
        rows += fmt(bp.e_plus);
        std::vector<std::optional<double>> v;
        bool ill = false;
        for (int a = 0; a < D; ++a) {
          v.push_back(bp.gapless ? std::nullopt : group_velocity_numeric(s, k, a));
          ill = ill || !v.back();
        }
        for (const auto& x : v) rows += "," + (x && !ill ? fmt(*x) : std::string());
        rows += bp.gapless ? ",gapless\n" : (ill ? ",ill_defined_velocity\n" : ",gapped\n");
      }
      return rows;
    });
    for (const auto& ch : chunks) text += ch;
    out.push_back({run.suffix, text});
  }
  return out;
}

// ---------------------------------------------------------------------------
// invariants

inline std::vector<Artifact> cmd_invariant(const SweepConfig& c)
{
  validate_config(c);
  const auto values = sweep_values(c);
  std::vector<Artifact> out;
  for (const auto& run : detail::runs(c)) {
    const auto specs = detail::specs_for(c, values, run.T);
    if (specs[0].bands() != 2 || specs[0].dimension == 3)
      throw UsageError("invariants are computed for 1D and 2D two-band protocols, not " + c.protocol);
    const auto pts = parallel_map<TracePoint>(values.size(), c.workers, [&](std::size_t i) {
      try {
        return trace_point(specs[i], c.grid);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    });
    std::string text = "sweep_param,invariant,raw,status\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
      text += fmt(values[i]) + ",";
      if (pts[i].gapped)
        text += std::to_string(*pts[i].invariant) + "," + fmt(pts[i].raw) + ",ok\n";
      else
        text += ",,boundary\n";
    }
    out.push_back({run.suffix, text});
  }
  return out;
}

// ---------------------------------------------------------------------------
// symmetry

inline nlohmann::ordered_json entry_json(const SymmetryEntry& e)
{
  nlohmann::ordered_json j;
  j["present"] = e.present;
  j["square"] = e.present ? e.square : 0;
  j["residual"] = e.residual;
  if (e.residual_noflip >= 0) j["residual_noflip"] = e.residual_noflip;
  j["operator"] = e.op;
  return j;
}

inline nlohmann::ordered_json report_json(const SymmetryReport& r)
{
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["dimension"] = r.dimension;
  j["P"] = r.phs.present ? r.phs.square : 0;
  j["T"] = r.trs.present ? r.trs.square : 0;
  j["C"] = r.chs.present ? 1 : 0;
  j["family"] = r.az_family;
  j["invariant"] = r.invariant_group;
  j["phs"] = entry_json(r.phs);
  j["trs"] = entry_json(r.trs);
  j["chs"] = entry_json(r.chs);
  return j;
}

struct SymmetryOptions {
  std::vector<std::string> ids{"all"};
  std::map<std::string, std::string> angles;  // overrides of the catalog angles
  int T = catalog_steps;
  int grid = symmetry_grid;
  std::optional<std::string> phi;
  int workers = 1;
};

inline std::vector<SymmetryReport> run_symmetry(const SymmetryOptions& o)
{
  std::vector<std::string> ids;
  for (const auto& id : o.ids) {
    if (id == "all") {
      const auto all = registry_ids();
      ids.insert(ids.end(), all.begin(), all.end());
      continue;
    }
    try {
      registry_lookup(id);
    } catch (const LookupError& e) {
      throw UsageError(e.what());
    }
    ids.push_back(id);
  }
  if (o.grid < 8) throw UsageError("grid must be at least 8");
  if (o.T < 1) throw UsageError("step number must be >= 1");
  std::map<std::string, double> vars{{"T", static_cast<double>(o.T)}};
  AngleMap base = catalog_angles();
  for (const auto& [name, e] : o.angles) {
    if (!is_angle_name(name)) throw UsageError("unknown angle '" + name + "'");
    try {
      base[angle_from_name(name)] = eval_expr(e, vars);
    } catch (const ExprError& err) {
      throw UsageError(err.what());
    }
  }
  double phi = pi / 2;
  if (o.phi) {
    try {
      phi = eval_expr(*o.phi, vars);
    } catch (const ExprError& err) {
      throw UsageError(err.what());
    }
  }
  return parallel_map<SymmetryReport>(ids.size(), o.workers, [&](std::size_t i) {
    ProtocolSpec s = make_protocol(ids[i], base, o.T);
    s.phi = phi;
    try {
      return classify(s, o.grid);
    } catch (const std::runtime_error& e) {
      throw NumericalError(ids[i] + ": " + e.what());
    }
  });
}

inline std::string cmd_symmetry(const SymmetryOptions& o)
{
  nlohmann::ordered_json j;
  j["schema_version"] = schema_version;
  j["T"] = o.T;
  j["grid"] = o.grid;
  j["reports"] = nlohmann::ordered_json::array();
  for (const auto& r : run_symmetry(o)) j["reports"].push_back(report_json(r));
  return j.dump(2) + "\n";
}

/// Differences between emitted reports and a golden table; empty when every row matches.
inline std::vector<std::string> golden_diff(const std::string& reports_json, const std::string& golden_json)
{
  const auto rep = nlohmann::json::parse(reports_json);
  const auto gold = nlohmann::json::parse(golden_json);
  std::vector<std::string> diffs;
  std::map<std::string, nlohmann::json> want;
  for (const auto& row : gold.at("rows")) want[row.at("id").get<std::string>()] = row;
  for (const auto& r : rep.at("reports")) {
    const auto id = r.at("id").get<std::string>();
    const auto it = want.find(id);
    if (it == want.end()) {
      diffs.push_back(id + ": not in golden table");
      continue;
    }
    for (const char* key : {"P", "T", "C", "family", "invariant"})
      if (r.at(key) != it->second.at(key))
        diffs.push_back(id + ": " + key + " = " + r.at(key).dump() + ", expected " + it->second.at(key).dump());
  }
  return diffs;
}

// ---------------------------------------------------------------------------
// gap classification

struct SweepEvent {
  double value = 0;
  std::vector<GapPoint> gaps;
  BoundaryClassification cls;
};

namespace detail {

template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b)
{
  const double g = (std::sqrt(5.0) - 1) / 2;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double bx = x1, bf = f1;
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
      if (f1 < bf) bx = x1, bf = f1;
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
      if (f2 < bf) bx = x2, bf = f2;
    }
  }
  return {bx, bf};
}

inline std::vector<std::size_t> local_minima(const std::vector<double>& m, double below)
{
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const bool l = i == 0 || m[i] <= m[i - 1];
    const bool r = i + 1 == m.size() || m[i] <= m[i + 1];
    if (l && r && m[i] < below) idx.push_back(i);
  }
  return idx;
}

}  // namespace detail

/// Gap closings and flat bands met along an angle sweep, refined in the swept angle.
inline std::vector<SweepEvent> sweep_events(const SweepConfig& c, int T)
{
  const auto values = sweep_values(c);
  const int n = c.grid;
  auto spec_at = [&](double v) { return resolve_protocol(c, v, T); };
  const auto metric = parallel_map<GapMetric>(values.size(), c.workers, [&](std::size_t i) { return gap_metric(spec_at(values[i]), n); });
  if (spec_at(values[0]).bands() != 2) throw UsageError("gap classification needs a two-band protocol");
  const bool t_sweep = c.sweep->symbol == "T";

  // candidate (sample index, which metric) pairs
  struct Cand {
    std::size_t i;
    bool flat;
  };
  std::vector<Cand> cands;
  std::vector<double> md(values.size()), mv(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    md[i] = metric[i].min_d;
    mv[i] = metric[i].band_variation;
  }
  if (t_sweep) {
    for (std::size_t i = 0; i < values.size(); ++i)
      if (md[i] <= eps_gap || mv[i] <= eps_flat) cands.push_back({i, false});
  } else {
    for (auto i : detail::local_minima(md, 0.5)) cands.push_back({i, false});
    for (auto i : detail::local_minima(mv, 0.5)) cands.push_back({i, true});
  }
  const auto refined = parallel_map<std::optional<double>>(cands.size(), c.workers, [&](std::size_t ci) -> std::optional<double> {
    const auto [i, flat] = cands[ci];
    if (t_sweep) return values[i];
    auto f = [&](double v) {
      const GapMetric g = gap_metric(spec_at(v), n);
      return flat ? g.band_variation : g.min_d;
    };
    const double here = flat ? mv[i] : md[i];
    const double tol = flat ? eps_flat : eps_gap;
    if (here <= tol / 1000) return values[i];
    const double a = values[i == 0 ? 0 : i - 1], b = values[std::min(i + 1, values.size() - 1)];
    auto [x, fx] = detail::golden_min(f, std::min(a, b), std::max(a, b));
    if (here < fx) x = values[i], fx = here;
    if (fx > tol) return std::nullopt;
    return x;
  });
  std::vector<double> at;
  for (const auto& r : refined)
    if (r) at.push_back(*r);
  std::sort(at.begin(), at.end());
  std::vector<double> uniq;
  for (double v : at)
    if (uniq.empty() || std::abs(v - uniq.back()) > 1e-9 * std::max(1.0, std::abs(v))) uniq.push_back(v);
  const int scan_n = std::max(n, 32);
  auto events = parallel_map<SweepEvent>(uniq.size(), c.workers, [&](std::size_t i) {
    SweepEvent e;
    e.value = uniq[i];
    const ProtocolSpec s = spec_at(e.value);
    e.gaps = find_gap_closings(s, scan_n);
    e.cls = classify_boundary(s, e.gaps, scan_n);
    return e;
  });
  events.erase(std::remove_if(events.begin(), events.end(), [](const SweepEvent& e) { return e.cls.kind == BoundaryKind::none; }),
               events.end());
  return events;
}

inline nlohmann::ordered_json event_json(const SweepEvent& e)
{
  nlohmann::ordered_json j;
  j["sweep_value"] = e.value;
  j["kind"] = boundary_kind_name(e.cls.kind);
  j["gapless_set"] = e.cls.gapless_set;
  j["band_variation"] = e.cls.band_variation;
  j["gap_points"] = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < e.gaps.size(); ++g) {
    nlohmann::ordered_json gp;
    gp["k"] = std::vector<double>(e.gaps[g].k.c.begin(), e.gaps[g].k.c.begin() + e.gaps[g].k.size());
    gp["quasi_energy"] = e.gaps[g].quasi_energy;
    gp["residual"] = e.gaps[g].residual;
    if (g < e.cls.fits.size()) {
      gp["fits"] = nlohmann::ordered_json::array();
      for (const auto& f : e.cls.fits[g])
        gp["fits"].push_back({{"axis", f.axis}, {"slope", f.slope}, {"curve", f.curve}, {"residual", f.residual}, {"linear", f.linear}});
    }
    j["gap_points"].push_back(gp);
  }
  return j;
}

inline std::vector<Artifact> cmd_classify_gaps(const SweepConfig& c)
{
  validate_config(c);
  std::vector<Artifact> out;
  for (const auto& run : detail::runs(c)) {
    nlohmann::ordered_json j;
    j["schema_version"] = schema_version;
    j["protocol"] = c.protocol;
    if (run.T) j["T"] = run.T;
    j["sweep_symbol"] = c.sweep->symbol;
    j["events"] = nlohmann::ordered_json::array();
    for (const auto& e : sweep_events(c, run.T)) j["events"].push_back(event_json(e));
    out.push_back({run.suffix, j.dump(2) + "\n"});
  }
  return out;
}

/// Writes artifacts next to `path` (stem + suffix + extension); empty path means stdout.
inline void write_artifacts(const std::vector<Artifact>& arts, const std::string& path, std::ostream& fallback)
{
  if (path.empty()) {
    if (arts.size() > 1) throw UsageError("several step numbers need --out to name the files");
    for (const auto& a : arts) fallback << a.content;
    return;
  }
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  const std::string stem = has_ext ? path.substr(0, dot) : path;
  const std::string ext = has_ext ? path.substr(dot) : "";
  for (const auto& a : arts) {
    const std::string p = stem + a.suffix + ext;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw UsageError("cannot write " + p);
    f << a.content;
  }
}

}  // namespace qwalk

#endif  // QWALK_SCAN_HPP
