#include "sbgnc/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sbgnc {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_field(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ConfigError(where + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<double> column(const SatelliteHistory& h, double (*get)(const HistoryRow&)) {
  std::vector<double> v;
  v.reserve(h.rows.size());
  for (const auto& r : h.rows) v.push_back(get(r));
  return v;
}

std::vector<double> times(const SatelliteHistory& h) {
  return column(h, [](const HistoryRow& r) { return r.t; });
}

double trapezoid_window(const std::vector<double>& t, const std::vector<double>& y, double a, double b) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i - 1] >= a - 1e-9 && t[i] <= b + 1e-9) acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  }
  return acc;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

json report_json(const MetricsReport& r) {
  json j;
  j["satellite"] = r.satellite;
  j["duration_s"] = r.duration_s;
  j["fuel_kg"] = r.fuel_kg;
  j["dR_mean_m"] = r.dR_mean_m;
  j["dR_max_m"] = r.dR_max_m;
  j["dR_max_time_s"] = r.dR_max_time_s;
  j["torque_mean_nm"] = r.torque_mean_nm;
  j["dtheta_mean_deg"] = {r.dtheta_mean_deg.x(), r.dtheta_mean_deg.y(), r.dtheta_mean_deg.z()};
  j["dtheta_max_deg"] = {r.dtheta_max_deg.x(), r.dtheta_max_deg.y(), r.dtheta_max_deg.z()};
  j["dR_per_day_m"] = r.dR_per_day_m;
  j["fuel_per_day_kg"] = r.fuel_per_day_kg;
  json coeffs = json::array();
  for (const auto& c : r.coefficients) {
    json e;
    e["name"] = c.name;
    e["truth"] = c.truth;
    e["estimate"] = c.estimate;
    e["final_error_pct"] = c.final_error_pct;
    e["relevant"] = c.relevant;
    if (c.convergence_h) e["convergence_h"] = *c.convergence_h;
    coeffs.push_back(e);
  }
  j["coefficients"] = coeffs;
  return j;
}

}  // namespace

std::vector<std::string> gravity_param_names(int n) {
  std::vector<std::string> names;
  for (int i = 2; i <= n; ++i) {
    for (int j = 0; j <= i; ++j) names.push_back("C" + std::to_string(i) + std::to_string(j));
    for (int j = 1; j <= i; ++j) names.push_back("S" + std::to_string(i) + std::to_string(j));
  }
  return names;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size()) throw DomainError("trapezoid size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return acc;
}

std::optional<double> convergence_time(const std::vector<double>& t, const std::vector<double>& err,
                                       double threshold) {
  if (t.size() != err.size() || t.empty()) throw DomainError("convergence series is empty or mismatched");
  std::size_t i = t.size();
  while (i > 0 && err[i - 1] < threshold) --i;
  if (i == t.size()) return std::nullopt;
  return t[i];
}

std::vector<double> coefficient_error_pct(const std::vector<VecX>& est, const GravityModel& truth, int idx, int n) {
  const GravityModel trunc = truth.truncated(n);
  const double ref = trunc.params(n)[idx];
  std::vector<double> out;
  out.reserve(est.size());
  for (const auto& v : est) {
    const double d = std::abs(v[idx] - ref);
    out.push_back(ref != 0.0 ? 100.0 * d / std::abs(ref) : (d == 0.0 ? 0.0 : INFINITY));
  }
  return out;
}

std::vector<double> coefficient_error_pct(const SatelliteHistory& h, const GravityModel& truth, int idx) {
  std::vector<VecX> est;
  est.reserve(h.rows.size());
  for (const auto& r : h.rows) est.push_back(r.grav_orb);
  return coefficient_error_pct(est, truth, idx, h.n_orb);
}

MetricsReport compute_metrics(const SatelliteHistory& h, const GravityModel& truth, const MetricsSettings& ms) {
  if (h.rows.empty()) throw DomainError("empty history");
  MetricsReport rep;
  rep.satellite = h.index;
  const std::vector<double> t = times(h);
  const double T = t.back() - t.front();
  rep.duration_s = T;

  std::vector<double> dr, acc, torque;
  std::array<std::vector<double>, 3> ang;
  for (const auto& r : h.rows) {
    dr.push_back(std::abs(r.r - h.a_target));
    acc.push_back(r.accel_applied.norm());
    torque.push_back(r.torque_applied.norm());
    for (int k = 0; k < 3; ++k) ang[k].push_back(std::abs(r.euler[k]) / kDeg);
  }
  const double fuel_scale = ms.mass_kg / (kStandardGravity * ms.isp_s);
  rep.fuel_kg = fuel_scale * trapezoid(t, acc);
  const double span = T > 0.0 ? T : 1.0;
  rep.dR_mean_m = T > 0.0 ? trapezoid(t, dr) / span : dr.front();
  rep.torque_mean_nm = T > 0.0 ? trapezoid(t, torque) / span : torque.front();
  for (std::size_t i = 0; i < dr.size(); ++i) {
    if (i == 0 || dr[i] > rep.dR_max_m) {
      rep.dR_max_m = dr[i];
      rep.dR_max_time_s = t[i];
    }
  }
  for (int k = 0; k < 3; ++k) {
    rep.dtheta_mean_deg[k] = T > 0.0 ? trapezoid(t, ang[k]) / span : ang[k].front();
    rep.dtheta_max_deg[k] = *std::max_element(ang[k].begin(), ang[k].end());
  }

  const double day = 86400.0;
  const int days = std::max(1, static_cast<int>(std::ceil(T / day - 1e-9)));
  for (int d = 0; d < days; ++d) {
    const double a = t.front() + d * day;
    const double b = std::min(t.front() + (d + 1) * day, t.back());
    const double len = b - a;
    rep.dR_per_day_m.push_back(len > 0.0 ? trapezoid_window(t, dr, a, b) / len : 0.0);
    rep.fuel_per_day_kg.push_back(fuel_scale * trapezoid_window(t, acc, a, b));
  }

  const auto names = gravity_param_names(h.n_orb);
  const VecX truth_params = truth.truncated(h.n_orb).params(h.n_orb);
  for (int p = 0; p < static_cast<int>(names.size()); ++p) {
    CoefficientMetric c;
    c.name = names[static_cast<std::size_t>(p)];
    c.truth = truth_params[p];
    c.estimate = h.rows.back().grav_orb[p];
    c.relevant = std::abs(c.truth) > kRelevanceThreshold;
    const auto err = coefficient_error_pct(h, truth, p);
    c.final_error_pct = err.back();
    c.convergence_h = convergence_time(t, err);
    if (c.convergence_h) *c.convergence_h /= 3600.0;
    rep.coefficients.push_back(c);
  }
  return rep;
}

std::string history_header(int n_orb, int n_att) {
  std::vector<std::string> cols = {"t_s"};
  for (const char* pre : {"truth_", "est_"}) {
    for (const char* e : {"p_m", "f", "g", "h", "k", "L_rad"}) cols.push_back(std::string(pre) + e);
  }
  for (const char* c : {"r_m", "lon_rad", "lat_rad"}) cols.emplace_back(c);
  for (const char* pre : {"sigma_bo_truth_", "sigma_bo_est_"}) {
    for (int i = 1; i <= 3; ++i) cols.push_back(pre + std::to_string(i));
  }
  for (const char* c : {"pitch_rad", "roll_rad", "yaw_rad"}) cols.emplace_back(c);
  for (const char* pre : {"a_cmd_", "a_applied_"}) {
    for (const char* ax : {"r_mps2", "t_mps2", "n_mps2"}) cols.push_back(std::string(pre) + ax);
  }
  for (const char* pre : {"torque_cmd_", "torque_applied_"}) {
    for (const char* ax : {"x_nm", "y_nm", "z_nm"}) cols.push_back(std::string(pre) + ax);
  }
  for (const auto& n : gravity_param_names(n_orb)) {
    cols.push_back("orb_" + n);
    cols.push_back("orb_" + n + "_sd");
  }
  for (const auto& n : gravity_param_names(n_att)) {
    cols.push_back("att_" + n);
    cols.push_back("att_" + n + "_sd");
  }
  for (const char* ax : {"x", "y", "z"}) cols.push_back(std::string("gyro_bias_") + ax + "_rad_s");
  cols.emplace_back("landmarks");
  std::string out;
  for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
  return out;
}

void write_history_csv(const SatelliteHistory& h, const std::filesystem::path& path) {
  std::string text = history_header(h.n_orb, h.n_att) + "\n";
  for (const auto& r : h.rows) {
    std::string line = fmt(r.t);
    const auto put = [&](double v) {
      line += ',';
      line += fmt(v);
    };
    for (int i = 0; i < 6; ++i) put(r.truth_mee[i]);
    for (int i = 0; i < 6; ++i) put(r.est_mee[i]);
    put(r.r);
    put(r.lon);
    put(r.lat);
    for (const Vec3* v : {&r.sigma_bo_truth, &r.sigma_bo_est, &r.euler, &r.accel_cmd, &r.accel_applied, &r.torque_cmd,
                          &r.torque_applied}) {
      for (int i = 0; i < 3; ++i) put((*v)[i]);
    }
    for (Eigen::Index i = 0; i < r.grav_orb.size(); ++i) {
      put(r.grav_orb[i]);
      put(r.grav_orb_sd[i]);
    }
    for (Eigen::Index i = 0; i < r.grav_att.size(); ++i) {
      put(r.grav_att[i]);
      put(r.grav_att_sd[i]);
    }
    for (int i = 0; i < 3; ++i) put(r.gyro_bias_est[i]);
    line += ',' + std::to_string(r.landmarks_seen);
    text += line + '\n';
  }
  write_text(path, text);
}

SatelliteHistory read_history_csv(const std::filesystem::path& path, int index) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open history file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty history file");
  const auto cols = split_csv(line);
  int n_orb = 0, n_att = 0;
  for (const auto& c : cols) {
    if (c.rfind("orb_", 0) == 0 && c.size() > 6 && c.substr(c.size() - 3) != "_sd") n_orb = std::max(n_orb, c[5] - '0');
    if (c.rfind("att_", 0) == 0 && c.size() > 6 && c.substr(c.size() - 3) != "_sd") n_att = std::max(n_att, c[5] - '0');
  }
  if (history_header(n_orb, n_att) != line) throw ConfigError(path.string() + ": unexpected history header");
  SatelliteHistory h;
  h.index = index;
  h.n_orb = n_orb;
  h.n_att = n_att;
  const int np_o = gravity_param_count(n_orb), np_a = gravity_param_count(n_att);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != cols.size()) throw ConfigError(where + ": wrong column count");
    std::size_t k = 0;
    const auto next = [&]() { return parse_field(f[k++], where); };
    HistoryRow r;
    r.t = next();
    for (int i = 0; i < 6; ++i) r.truth_mee[i] = next();
    for (int i = 0; i < 6; ++i) r.est_mee[i] = next();
    r.r = next();
    r.lon = next();
    r.lat = next();
    for (Vec3* v : {&r.sigma_bo_truth, &r.sigma_bo_est, &r.euler, &r.accel_cmd, &r.accel_applied, &r.torque_cmd,
                    &r.torque_applied}) {
      for (int i = 0; i < 3; ++i) (*v)[i] = next();
    }
    r.grav_orb.resize(np_o);
    r.grav_orb_sd.resize(np_o);
    for (int i = 0; i < np_o; ++i) {
      r.grav_orb[i] = next();
      r.grav_orb_sd[i] = next();
    }
    r.grav_att.resize(np_a);
    r.grav_att_sd.resize(np_a);
    for (int i = 0; i < np_a; ++i) {
      r.grav_att[i] = next();
      r.grav_att_sd[i] = next();
    }
    for (int i = 0; i < 3; ++i) r.gyro_bias_est[i] = next();
    r.landmarks_seen = static_cast<int>(next());
    h.rows.push_back(std::move(r));
  }
  if (h.rows.empty()) throw ConfigError(path.string() + ": history has no rows");
  return h;
}

std::string metrics_to_json(const std::vector<MetricsReport>& reports, int indent) {
  json j;
  j["satellites"] = json::array();
  for (const auto& r : reports) j["satellites"].push_back(report_json(r));
  return j.dump(indent) + "\n";
}

std::string comparison_to_json(const std::vector<ComparisonReport>& modes, int indent) {
  json j = json::object();
  for (const auto& m : modes) {
    json arr = json::array();
    for (const auto& r : m.reports) arr.push_back(report_json(r));
    j[m.mode] = arr;
  }
  return j.dump(indent) + "\n";
}

std::vector<MetricsReport> emit_outputs(const Scenario& sc, const RunResult& run, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());

  const MetricsSettings ms{sc.spacecraft.mass, sc.spacecraft.isp};
  std::vector<MetricsReport> reports;
  json info;
  info["seed"] = sc.seed;
  info["duration_s"] = sc.duration;
  info["mass_kg"] = sc.spacecraft.mass;
  info["isp_s"] = sc.spacecraft.isp;
  info["learning"] = sc.mode.learning;
  info["nullify_out_of_plane"] = sc.mode.nullify_out_of_plane;
  info["fusion"] = sc.mode.fusion;
  info["gravity_source"] = sc.gravity_source;
  info["satellites"] = json::array();
  for (const auto& h : run.satellites) {
    const std::string name = "satellite_" + std::to_string(h.index) + ".csv";
    write_history_csv(h, out_dir / name);
    reports.push_back(compute_metrics(h, sc.asteroid.gravity, ms));
    info["satellites"].push_back({{"index", h.index}, {"a_target_m", h.a_target}, {"history", name}});
  }
  write_gravity_coefficients(sc.asteroid.gravity, out_dir / "truth_gravity.txt");

  std::string fused = "t_s";
  const int n_orb = sc.filters.n_orb;
  for (const auto& n : gravity_param_names(n_orb)) fused += "," + n;
  fused += '\n';
  for (std::size_t i = 0; i < run.fused_t.size(); ++i) {
    fused += fmt(run.fused_t[i]);
    for (Eigen::Index p = 0; p < run.fused_orbit[i].size(); ++p) fused += "," + fmt(run.fused_orbit[i][p]);
    fused += '\n';
  }
  write_text(out_dir / "fused_gravity.csv", fused);
  write_text(out_dir / "summary.json", metrics_to_json(reports));
  write_text(out_dir / "run_info.json", info.dump(2) + "\n");
  return reports;
}

std::vector<MetricsReport> metrics_from_directory(const std::filesystem::path& dir) {
  std::ifstream in(dir / "run_info.json");
  if (!in) throw ConfigError("missing run_info.json in " + dir.string());
  json info;
  try {
    in >> info;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run_info.json: ") + e.what());
  }
  const GravityModel truth = load_gravity_coefficients(dir / "truth_gravity.txt");
  const MetricsSettings ms{info.at("mass_kg").get<double>(), info.at("isp_s").get<double>()};
  std::vector<MetricsReport> out;
  for (const auto& s : info.at("satellites")) {
    SatelliteHistory h = read_history_csv(dir / s.at("history").get<std::string>(), s.at("index").get<int>());
    h.a_target = s.at("a_target_m").get<double>();
    out.push_back(compute_metrics(h, truth, ms));
  }
  return out;
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("SBGNC_OUT"); env && *env) return env;
  return "sbgnc_out";
}

}  // namespace sbgnc
