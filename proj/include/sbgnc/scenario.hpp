#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sbgnc/dynamics.hpp"
#include "sbgnc/gravity.hpp"
#include "sbgnc/mpc.hpp"
#include "sbgnc/navfilters.hpp"
#include "sbgnc/sensors.hpp"
#include "sbgnc/ukf.hpp"

namespace sbgnc {

struct SatelliteSpec {
  double a_target = 34000.0;  // m
  double inclination = 90.0 * kDeg;
  double raan = 0.0;
  double arg_latitude = 0.0;  // initial argument of latitude
  int stream = -1;            // random stream id; defaults to the satellite index
};

struct FilterSettings {
  int n_orb = 4;
  int n_att = 2;
  UkfParams ukf;
  double orbit_dt = 36.0;
  double attitude_dt = 3.6;
  InitialUncertainty initial;
};

struct ModeFlags {
  bool learning = true;
  bool nullify_out_of_plane = true;
  bool fusion = true;
};

struct Scenario {
  double duration = 2.0 * 86400.0;  // s
  std::uint64_t seed = 1;
  AsteroidModel asteroid;
  std::string gravity_source = "eros_like";
  LandmarkCatalog landmarks;
  SolarModel solar;
  SpacecraftConfig spacecraft;
  SensorSuite sensors;
  std::vector<SatelliteSpec> satellites{SatelliteSpec{}};
  FilterSettings filters;
  MpcConfig orbit_mpc;
  MpcConfig attitude_mpc;
  ModeFlags mode;
  Vec3 attitude_target = Vec3::Zero();  // sigma_BO
  ode::AdaptiveOptions truth_integrator;

  /// Attitude filter steps per orbit filter step.
  int attitude_steps_per_orbit() const;
  /// Orbit filter steps per orbit control interval.
  int orbit_steps_per_control() const;
  void validate() const;
};

/// Paper-scale defaults with the synthetic degree-4 field and landmark set.
Scenario default_scenario();

Scenario load_scenario(const std::filesystem::path& path);
/// Parses scenario JSON text; relative file paths resolve against `base_dir`.
Scenario parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir);

GravityModel load_gravity_coefficients(const std::filesystem::path& path);
void write_gravity_coefficients(const GravityModel& g, const std::filesystem::path& path);

LandmarkCatalog load_landmarks(const std::filesystem::path& path);
void write_landmarks(const LandmarkCatalog& catalog, const std::filesystem::path& path);
LandmarkCatalog synthetic_landmarks(int count, const Vec3& semi_axes, std::mt19937_64& rng);

/// Three-, six- and nine-satellite geometry presets.
std::vector<SatelliteSpec> constellation_preset(int count);

}  // namespace sbgnc
