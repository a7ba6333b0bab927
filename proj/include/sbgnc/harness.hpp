#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sbgnc/constellation.hpp"
#include "sbgnc/scenario.hpp"

namespace sbgnc {

inline constexpr double kStandardGravity = 9.8066;  // m/s^2
inline constexpr double kErrorThresholdPct = 20.0;
inline constexpr double kRelevanceThreshold = 2e-3;

struct CoefficientMetric {
  std::string name;  // e.g. "C20"
  double truth = 0.0;
  double estimate = 0.0;
  double final_error_pct = 0.0;
  std::optional<double> convergence_h;
  bool relevant = false;
};

struct MetricsReport {
  int satellite = 0;
  double duration_s = 0.0;
  double fuel_kg = 0.0;
  double dR_mean_m = 0.0;
  double dR_max_m = 0.0;
  double dR_max_time_s = 0.0;
  double torque_mean_nm = 0.0;
  Vec3 dtheta_mean_deg = Vec3::Zero();  // pitch, roll, yaw
  Vec3 dtheta_max_deg = Vec3::Zero();
  std::vector<double> dR_per_day_m;
  std::vector<double> fuel_per_day_kg;
  std::vector<CoefficientMetric> coefficients;
};

struct MetricsSettings {
  double mass_kg = 1000.0;
  double isp_s = 2900.0;
};

/// Names of the filter gravity parameters in layout order.
std::vector<std::string> gravity_param_names(int n);

/// Trapezoidal integral of y over t.
double trapezoid(const std::vector<double>& t, const std::vector<double>& y);

/// First instant after which the series stays below the threshold through the end.
std::optional<double> convergence_time(const std::vector<double>& t, const std::vector<double>& err_pct,
                                       double threshold_pct = kErrorThresholdPct);

/// Percent error of one orbit-filter coefficient over the history.
std::vector<double> coefficient_error_pct(const SatelliteHistory& h, const GravityModel& truth, int param_index);
std::vector<double> coefficient_error_pct(const std::vector<VecX>& estimates, const GravityModel& truth,
                                          int param_index, int n);

MetricsReport compute_metrics(const SatelliteHistory& h, const GravityModel& truth, const MetricsSettings& ms);

struct ComparisonReport {
  std::string mode;
  std::vector<MetricsReport> reports;
};

std::string history_header(int n_orb, int n_att);
void write_history_csv(const SatelliteHistory& h, const std::filesystem::path& path);
SatelliteHistory read_history_csv(const std::filesystem::path& path, int index);

/// Writes per-satellite tables, the fused-gravity table, metrics summary and run info.
std::vector<MetricsReport> emit_outputs(const Scenario& sc, const RunResult& run, const std::filesystem::path& out_dir);

/// Recomputes metrics from a directory written by emit_outputs.
std::vector<MetricsReport> metrics_from_directory(const std::filesystem::path& dir);

std::string metrics_to_json(const std::vector<MetricsReport>& reports, int indent = 2);
std::string comparison_to_json(const std::vector<ComparisonReport>& modes, int indent = 2);

/// Default output directory: $SBGNC_OUT or ./sbgnc_out.
std::filesystem::path default_output_dir();

}  // namespace sbgnc
