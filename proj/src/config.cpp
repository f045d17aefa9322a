#include "grr/config.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace grr {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

RunConfig RunConfig::parse_string(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InputError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw InputError(origin + ":" + std::to_string(lineno) + ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

std::string RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InputError("missing required config key: " + key);
  return it->second;
}

std::string RunConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("config key " + key + " is not a number: " + get(key));
  }
}

double RunConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long RunConfig::get_int(const std::string& key) const {
  try {
    return std::stol(get(key));
  } catch (const InputError&) {
    throw;
  } catch (const std::exception&) {
    throw InputError("config key " + key + " is not an integer: " + get(key));
  }
}

long RunConfig::get_int_or(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool RunConfig::get_bool_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InputError("config key " + key + " is not a boolean: " + v);
}

void RunConfig::validate_keys(const std::set<std::string>& allowed) const {
  for (const auto& [k, v] : values_)
    if (!allowed.count(k))
      throw InputError("unknown config key: " + k);
}

std::string RunConfig::resolved_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : values_) out << k << " = " << v << '\n';
  return out.str();
}

std::uint64_t RunConfig::hash() const {
  const std::string text = resolved_text();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write metrics csv: " + path);
  out << "run_id,method,param,q_min,J_min,geo_error,misfit_inf,nbr_its,cost_s,converged\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.method << ',' << fmt17(r.param) << ',' << fmt17(r.q_min)
        << ',' << fmt17(r.j_min) << ',' << fmt17(r.geo_error) << ',' << fmt17(r.misfit_inf)
        << ',' << r.nbr_its << ',' << fmt17(r.cost_s) << ',' << (r.converged ? 1 : 0)
        << '\n';
  }
}

void write_run_json(const std::string& dir, const std::string& command,
                    const RunConfig& config, std::uint64_t seed, double duration_s) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config.hash();
  j["seed"] = seed;
  j["duration_s"] = duration_s;
  j["version"] = "grr 0.1.0";
  std::ofstream out(fs::path(dir) / "run.json");
  if (!out) throw InputError("cannot write run.json in " + dir);
  out << j.dump(2) << '\n';
  std::ofstream cfg(fs::path(dir) / "resolved.cfg");
  cfg << config.resolved_text();
}

}  // namespace grr
