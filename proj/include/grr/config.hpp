#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "grr/common.hpp"

namespace grr {

/// Flat `section.key = value` configuration with `#` comments.
class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path);
  static RunConfig parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int_or(const std::string& key, long fallback) const;
  bool get_bool_or(const std::string& key, bool fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  /// Reject keys outside the allowed set, naming the offender.
  void validate_keys(const std::set<std::string>& allowed) const;

  /// Canonical sorted `key = value` text (echoed into run artifacts).
  std::string resolved_text() const;
  std::uint64_t hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// One metrics row mirroring the experiment tables.
struct MetricsRow {
  std::string run_id;
  std::string method;
  double param = 0.0;  // xi or delta (or t / theta for sweeps)
  double q_min = std::numeric_limits<double>::quiet_NaN();
  double j_min = std::numeric_limits<double>::quiet_NaN();
  double geo_error = std::numeric_limits<double>::quiet_NaN();
  double misfit_inf = std::numeric_limits<double>::quiet_NaN();
  long nbr_its = 0;
  double cost_s = 0.0;
  bool converged = true;
};

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

/// `run.json` metadata record written next to artifacts.
void write_run_json(const std::string& dir, const std::string& command,
                    const RunConfig& config, std::uint64_t seed, double duration_s);

}  // namespace grr
