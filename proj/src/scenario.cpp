#include "sbgnc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sbgnc {

namespace {

using nlohmann::json;

/// Object view that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  ~Section() = default;

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(j_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Vec3 get_vec3(Section& s, const std::string& key, const Vec3& fallback) {
  if (!s.has(key)) {
    s.get<json>(key, json());
    return fallback;
  }
  const auto v = s.get<std::vector<double>>(key, {});
  if (v.size() != 3) throw ConfigError(s.path() + "." + key + ": expected 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path q(p);
  return q.is_absolute() ? q : base / q;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not a number '" + s + "'");
  }
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": not an integer '" + s + "'");
  }
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

int Scenario::attitude_steps_per_orbit() const {
  return static_cast<int>(std::lround(filters.orbit_dt / filters.attitude_dt));
}

int Scenario::orbit_steps_per_control() const {
  return static_cast<int>(std::lround(orbit_mpc.dt / filters.orbit_dt));
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  if (!(asteroid.gravity.mu() > 0.0) || !(asteroid.gravity.re() > 0.0)) {
    throw ConfigError("asteroid mu and Re must be positive");
  }
  if (filters.n_orb < 2 || filters.n_att < 2) throw ConfigError("estimated gravity degree must be at least 2");
  if (filters.n_att > filters.n_orb) throw ConfigError("n_att must not exceed n_orb");
  if (filters.n_orb > kMaxGravityDegree) throw ConfigError("n_orb exceeds the supported degree");
  if (!(filters.orbit_dt > 0.0) || !(filters.attitude_dt > 0.0)) throw ConfigError("filter rates must be positive");
  const auto integral_ratio = [](double a, double b) {
    const double r = a / b;
    return r >= 1.0 - 1e-9 && std::abs(r - std::round(r)) < 1e-9;
  };
  if (!integral_ratio(filters.orbit_dt, filters.attitude_dt)) {
    throw ConfigError("orbit filter period must be a multiple of the attitude filter period");
  }
  if (!integral_ratio(orbit_mpc.dt, filters.orbit_dt)) {
    throw ConfigError("orbit control interval must be a multiple of the orbit filter period");
  }
  if (std::abs(attitude_mpc.dt - filters.orbit_dt) > 1e-9 * filters.orbit_dt) {
    throw ConfigError("attitude control interval must equal the orbit filter period");
  }
  if (!integral_ratio(duration, filters.orbit_dt)) throw ConfigError("duration must be a multiple of the orbit filter period");
  if (!(filters.ukf.alpha >= 0.0 && filters.ukf.alpha <= 1.0) || !(filters.ukf.theta > 0.0)) {
    throw ConfigError("invalid UKF parameters");
  }
  orbit_mpc.validate();
  attitude_mpc.validate();
  spacecraft.validate();
  if (orbit_mpc.u_max > spacecraft.a_max * (1.0 + 1e-12)) throw ConfigError("orbit control bound exceeds a_max");
  if (attitude_mpc.u_max > spacecraft.t_max * (1.0 + 1e-12)) throw ConfigError("attitude control bound exceeds T_max");
  if (landmarks.empty()) throw ConfigError("landmark catalog is empty");
  if (satellites.empty()) throw ConfigError("no satellites configured");
  for (const auto& s : satellites) {
    if (!(s.a_target > asteroid.gravity.re())) throw ConfigError("target radius must exceed the Brillouin radius");
    if (!(s.inclination >= 0.0 && s.inclination < kPi)) throw ConfigError("inclination must lie in [0, 180) deg");
  }
  if (!all_finite(attitude_target) || attitude_target.norm() > 1.0) throw ConfigError("invalid attitude target");
}

Scenario default_scenario() {
  Scenario s;
  const double mu = 4.4628e5, re = 16000.0;
  s.asteroid.gravity = eros_like_gravity(mu, re);
  s.asteroid.spin_rate = kTwoPi / (5.27 * 3600.0);
  s.asteroid.epoch_angle = 0.0;
  std::mt19937_64 rng(20240522);
  s.landmarks = synthetic_landmarks(522, Vec3(17000.0, 5500.0, 5500.0), rng);

  s.orbit_mpc.N = 40;
  s.orbit_mpc.dt = 360.0;
  s.orbit_mpc.gamma = 1e3;
  s.orbit_mpc.Px = (Vec6() << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0).finished().asDiagonal();
  s.orbit_mpc.u_max = s.spacecraft.a_max;
  s.orbit_mpc.nullify_out_of_plane = true;
  s.orbit_mpc.stm_substeps = 4;

  s.attitude_mpc.N = 10;
  s.attitude_mpc.dt = 36.0;
  s.attitude_mpc.gamma = 1e3;
  s.attitude_mpc.Px = (Vec6() << 1.0, 1.0, 1.0, 0.0, 0.0, 0.0).finished().asDiagonal();
  s.attitude_mpc.u_max = s.spacecraft.t_max;
  s.attitude_mpc.nullify_out_of_plane = false;
  s.attitude_mpc.stm_substeps = 2;
  return s;
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  Scenario s = default_scenario();
  Section top(root, "scenario");
  s.duration = top.get("duration_s", s.duration);
  s.seed = top.get<std::uint64_t>("seed", s.seed);

  double mu = s.asteroid.gravity.mu(), re = s.asteroid.gravity.re();
  if (top.has("asteroid")) {
    Section a = top.sub("asteroid");
    mu = a.get("mu_m3s2", mu);
    re = a.get("Re_m", re);
    const double period = a.get("spin_period_s", kTwoPi / s.asteroid.spin_rate);
    if (!(period > 0.0)) throw ConfigError("asteroid.spin_period_s must be positive");
    s.asteroid.spin_rate = kTwoPi / period;
    s.asteroid.epoch_angle = a.get("epoch_angle_deg", 0.0) * kDeg;

    s.asteroid.gravity = eros_like_gravity(mu, re);
    if (a.has("gravity")) {
      Section g = a.sub("gravity");
      const std::string kind = g.get<std::string>("source", "eros_like");
      s.gravity_source = kind;
      if (kind == "eros_like") {
        s.asteroid.gravity = eros_like_gravity(mu, re);
      } else if (kind == "file") {
        const auto path = resolve(base_dir, g.get<std::string>("path", ""));
        s.asteroid.gravity = load_gravity_coefficients(path);
        s.gravity_source = "file:" + path.string();
      } else if (kind == "random") {
        const int deg = g.get("degree", 4);
        const double scale = g.get("scale", 0.05);
        std::mt19937_64 rng(g.get<std::uint64_t>("seed", 1));
        s.asteroid.gravity = random_gravity(mu, re, deg, scale, rng);
      } else if (kind == "c20_only") {
        GravityModel m(mu, re, 2);
        m.set_C(2, 0, g.get("C20", -0.0526));
        s.asteroid.gravity = m;
      } else {
        throw ConfigError("asteroid.gravity.source: unknown kind '" + kind + "'");
      }
      g.finish();
    }
    if (a.has("landmarks")) {
      Section l = a.sub("landmarks");
      const std::string kind = l.get<std::string>("source", "synthetic");
      if (kind == "file") {
        s.landmarks = load_landmarks(resolve(base_dir, l.get<std::string>("path", "")));
      } else if (kind == "synthetic") {
        const int count = l.get("count", 522);
        const Vec3 axes = get_vec3(l, "semi_axes_m", Vec3(17000.0, 5500.0, 5500.0));
        std::mt19937_64 rng(l.get<std::uint64_t>("seed", 20240522));
        s.landmarks = synthetic_landmarks(count, axes, rng);
      } else {
        throw ConfigError("asteroid.landmarks.source: unknown kind '" + kind + "'");
      }
      l.finish();
    }
    a.finish();
  }
  if (top.has("solar")) {
    Section so = top.sub("solar");
    s.solar.enabled = so.get("enabled", s.solar.enabled);
    s.solar.r_sun = Vec3(so.get("sun_distance_au", 1.46) * kAu, 0.0, 0.0);
    s.solar.p_1au = so.get("p_1au_pa", s.solar.p_1au);
    s.solar.mu_sun = so.get("mu_sun_m3s2", s.solar.mu_sun);
    so.finish();
  }

  if (top.has("spacecraft")) {
    Section c = top.sub("spacecraft");
    auto& sc = s.spacecraft;
    sc.mass = c.get("mass_kg", sc.mass);
    sc.c_r = c.get("c_r", sc.c_r);
    sc.area = c.get("area_m2", sc.area);
    sc.a_max = c.get("a_max_mps2", sc.a_max);
    sc.t_max = c.get("t_max_nm", sc.t_max);
    sc.tau = c.get("actuator_rate_per_s", sc.tau);
    sc.isp = c.get("isp_s", sc.isp);
    if (c.has("masses")) {
      sc.masses.clear();
      for (const auto& m : c.raw("masses")) {
        Section ms(m, c.path() + ".masses[]");
        sc.masses.push_back({get_vec3(ms, "offset_m", Vec3::Zero()), ms.get("mass_kg", 0.0)});
        ms.finish();
      }
      sc.J = inertia_from_masses(sc.masses);
    }
    if (c.has("inertia_kgm2")) {
      const auto rows = c.get<std::vector<std::vector<double>>>("inertia_kgm2", {});
      if (rows.size() != 3) throw ConfigError("spacecraft.inertia_kgm2: expected 3x3");
      for (int i = 0; i < 3; ++i) {
        if (rows[i].size() != 3) throw ConfigError("spacecraft.inertia_kgm2: expected 3x3");
        for (int j = 0; j < 3; ++j) sc.J(i, j) = rows[i][j];
      }
    }
    c.finish();
  }
  s.orbit_mpc.u_max = s.spacecraft.a_max;
  s.attitude_mpc.u_max = s.spacecraft.t_max;

  if (top.has("sensors")) {
    Section se = top.sub("sensors");
    auto& su = s.sensors;
    su.camera.focal = se.get("focal_length_m", su.camera.focal);
    su.camera.resolution = se.get("resolution_px", su.camera.resolution);
    su.camera.fov = se.get("fov_deg", su.camera.fov / kDeg) * kDeg;
    su.pixel_sigma = se.get("pixel_sigma_px", su.pixel_sigma);
    su.range_sigma = se.get("range_sigma_m", su.range_sigma);
    su.star_sigma = se.get("star_tracker_sigma_arcsec", su.star_sigma / kArcsec) * kArcsec;
    su.gyro_bias = get_vec3(se, "gyro_bias_deg_per_h", su.gyro_bias / (kDeg / 3600.0)) * (kDeg / 3600.0);
    su.gyro_sigma = se.get("gyro_sigma_deg_per_h", su.gyro_sigma / (kDeg / 3600.0)) * (kDeg / 3600.0);
    su.q_max = se.get("max_landmarks", su.q_max);
    su.quantization_noise = se.get("quantization_noise", su.quantization_noise);
    se.finish();
  }

  if (top.has("satellites")) {
    s.satellites.clear();
    const json& arr = top.raw("satellites");
    if (arr.is_string()) {
      const std::string preset = arr.get<std::string>();
      if (preset.rfind("preset:", 0) != 0) throw ConfigError("satellites: expected a list or 'preset:N'");
      s.satellites = constellation_preset(parse_int(preset.substr(7), "satellites preset"));
    } else {
      if (!arr.is_array()) throw ConfigError("satellites: expected a list");
      for (const auto& item : arr) {
        Section sat(item, "scenario.satellites[]");
        SatelliteSpec sp;
        sp.a_target = sat.get("a_target_m", sp.a_target);
        sp.inclination = sat.get("inclination_deg", sp.inclination / kDeg) * kDeg;
        sp.raan = sat.get("raan_deg", 0.0) * kDeg;
        sp.arg_latitude = sat.get("arg_latitude_deg", 0.0) * kDeg;
        sp.stream = sat.get("stream", -1);
        sat.finish();
        s.satellites.push_back(sp);
      }
    }
  }

  if (top.has("filters")) {
    Section f = top.sub("filters");
    auto& fs = s.filters;
    fs.n_orb = f.get("n_orb", fs.n_orb);
    fs.n_att = f.get("n_att", fs.n_att);
    fs.orbit_dt = f.get("orbit_dt_s", fs.orbit_dt);
    fs.attitude_dt = f.get("attitude_dt_s", fs.attitude_dt);
    fs.ukf.alpha = f.get("alpha", fs.ukf.alpha);
    fs.ukf.theta = f.get("theta", fs.ukf.theta);
    fs.ukf.beta = f.get("beta", fs.ukf.beta);
    if (f.has("lambda")) fs.ukf.lambda_spread = f.get("lambda", 0.0);
    if (f.has("initial_sigma")) {
      Section u = f.sub("initial_sigma");
      fs.initial.p = u.get("p_m", fs.initial.p);
      fs.initial.elements = u.get("elements", fs.initial.elements);
      fs.initial.gravity = u.get("gravity", fs.initial.gravity);
      fs.initial.sigma = u.get("mrp", fs.initial.sigma);
      fs.initial.omega = u.get("omega_rad_s", fs.initial.omega);
      fs.initial.gyro_bias = u.get("gyro_bias_rad_s", fs.initial.gyro_bias);
      u.finish();
    }
    f.finish();
  }

  if (top.has("mpc")) {
    Section m = top.sub("mpc");
    const auto read_mpc = [](Section& sec, MpcConfig& c) {
      c.N = sec.get("N", c.N);
      c.dt = sec.get("dt_s", c.dt);
      c.gamma = sec.get("gamma", c.gamma);
      c.stm_substeps = sec.get("stm_substeps", c.stm_substeps);
      if (sec.has("state_weights")) {
        const auto w = sec.get<std::vector<double>>("state_weights", {});
        if (w.size() != 6) throw ConfigError(sec.path() + ".state_weights: expected 6 numbers");
        c.Px = Eigen::Map<const Vec6>(w.data()).asDiagonal();
      }
      sec.finish();
    };
    if (m.has("orbit")) {
      Section o = m.sub("orbit");
      read_mpc(o, s.orbit_mpc);
    }
    if (m.has("attitude")) {
      Section a = m.sub("attitude");
      read_mpc(a, s.attitude_mpc);
    }
    m.finish();
  }

  if (top.has("mode")) {
    Section md = top.sub("mode");
    s.mode.learning = md.get("learning", s.mode.learning);
    s.mode.nullify_out_of_plane = md.get("nullify_out_of_plane", s.mode.nullify_out_of_plane);
    s.mode.fusion = md.get("fusion", s.mode.fusion);
    md.finish();
  }
  s.orbit_mpc.nullify_out_of_plane = s.mode.nullify_out_of_plane;

  s.attitude_target = get_vec3(top, "attitude_target_mrp", s.attitude_target);
  top.finish();
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

GravityModel load_gravity_coefficients(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open gravity file " + path.string());
  std::map<std::string, std::string> header;
  struct Row {
    int i, j;
    double c, s;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_fields(strip_comment(line));
    if (f.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (std::isalpha(static_cast<unsigned char>(f[0][0]))) {
      if (f.size() != 2) throw ConfigError(where + ": header lines are 'key value'");
      if (f[0] == "i") continue;  // column caption
      if (!header.emplace(f[0], f[1]).second) throw ConfigError(where + ": duplicate header key " + f[0]);
      continue;
    }
    if (f.size() != 4) throw ConfigError(where + ": coefficient rows are 'i j C S'");
    rows.push_back({parse_int(f[0], where), parse_int(f[1], where), parse_double(f[2], where), parse_double(f[3], where)});
  }
  for (const char* key : {"mu_m3s2", "Re_m", "degree", "normalization"}) {
    if (!header.count(key)) throw ConfigError(path.string() + ": missing header key " + key);
  }
  for (const auto& kv : header) {
    if (kv.first != "mu_m3s2" && kv.first != "Re_m" && kv.first != "degree" && kv.first != "normalization") {
      throw ConfigError(path.string() + ": unknown header key " + kv.first);
    }
  }
  if (header["normalization"] != "4pi") {
    throw ConfigError(path.string() + ": unknown normalization tag '" + header["normalization"] + "'");
  }
  const double mu = parse_double(header["mu_m3s2"], path.string());
  const double re = parse_double(header["Re_m"], path.string());
  const int degree = parse_int(header["degree"], path.string());
  if (!(mu > 0.0) || !(re > 0.0)) throw ConfigError(path.string() + ": mu and Re must be positive");
  if (degree < 2 || degree > kMaxGravityDegree) throw ConfigError(path.string() + ": degree out of range");

  GravityModel g(mu, re, degree);
  std::set<std::pair<int, int>> seen;
  for (const auto& r : rows) {
    if (r.i < 2 || r.i > degree || r.j < 0 || r.j > r.i) {
      throw ConfigError(path.string() + ": coefficient (" + std::to_string(r.i) + "," + std::to_string(r.j) +
                        ") out of range");
    }
    if (!seen.emplace(r.i, r.j).second) {
      throw ConfigError(path.string() + ": duplicate coefficient (" + std::to_string(r.i) + "," +
                        std::to_string(r.j) + ")");
    }
    if (r.j == 0 && r.s != 0.0) throw ConfigError(path.string() + ": S(i,0) must be zero");
    g.set_C(r.i, r.j, r.c);
    g.set_S(r.i, r.j, r.s);
  }
  return g;
}

void write_gravity_coefficients(const GravityModel& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write gravity file " + path.string());
  out << std::setprecision(17);
  out << "mu_m3s2 " << g.mu() << "\nRe_m " << g.re() << "\ndegree " << g.degree() << "\nnormalization 4pi\n";
  out << "# i j C S\n";
  for (int i = 2; i <= g.degree(); ++i) {
    for (int j = 0; j <= i; ++j) out << i << ' ' << j << ' ' << g.C(i, j) << ' ' << g.S(i, j) << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

LandmarkCatalog load_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open landmark file " + path.string());
  LandmarkCatalog cat;
  std::set<int> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto f = split_fields(strip_comment(line));
    if (f.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (std::isalpha(static_cast<unsigned char>(f[0][0]))) continue;  // header row
    if (f.size() != 4) throw ConfigError(where + ": rows are 'id, x, y, z'");
    Landmark l{parse_int(f[0], where), Vec3(parse_double(f[1], where), parse_double(f[2], where), parse_double(f[3], where))};
    if (!ids.insert(l.id).second) throw ConfigError(where + ": duplicate landmark id " + f[0]);
    if (!(l.r_a.norm() > 0.0) || !all_finite(l.r_a)) throw ConfigError(where + ": landmark position must be nonzero");
    cat.push_back(l);
  }
  if (cat.empty()) throw ConfigError(path.string() + ": no landmarks");
  std::sort(cat.begin(), cat.end(), [](const Landmark& a, const Landmark& b) { return a.id < b.id; });
  return cat;
}

void write_landmarks(const LandmarkCatalog& catalog, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write landmark file " + path.string());
  out << std::setprecision(17) << "id,x_m,y_m,z_m\n";
  for (const auto& l : catalog) out << l.id << ',' << l.r_a.x() << ',' << l.r_a.y() << ',' << l.r_a.z() << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

LandmarkCatalog synthetic_landmarks(int count, const Vec3& semi_axes, std::mt19937_64& rng) {
  if (count < 1 || !(semi_axes.minCoeff() > 0.0)) throw DomainError("invalid landmark generator arguments");
  std::normal_distribution<double> n01(0.0, 1.0);
  LandmarkCatalog cat;
  cat.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Vec3 u;
    do {
      u = Vec3(n01(rng), n01(rng), n01(rng));
    } while (u.norm() < 1e-12);
    u.normalize();
    const double scale = 1.0 / u.cwiseQuotient(semi_axes).norm();
    cat.push_back({k, scale * u});
  }
  return cat;
}

std::vector<SatelliteSpec> constellation_preset(int count) {
  if (count < 1) throw ConfigError("constellation size must be positive");
  std::vector<SatelliteSpec> out;
  for (int k = 0; k < count; ++k) {
    SatelliteSpec s;
    s.a_target = 34000.0 + 2000.0 * k;
    s.inclination = 90.0 * kDeg;
    s.raan = kPi * k / count;
    s.arg_latitude = kTwoPi * k / count;
    s.stream = k;
    out.push_back(s);
  }
  return out;
}

}  // namespace sbgnc
