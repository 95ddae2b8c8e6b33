#include "fbnc/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fbnc/errors.hpp"

namespace fbnc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    out[key] = value;
  }
  return out;
}

void apply_config_entries(SimConfig& cfg,
                          const std::map<std::string, std::string>& entries) {
  for (const auto& [key, value] : entries) {
    try {
      if (key == "lambda") cfg.lambda = std::stod(value);
      else if (key == "mu") cfg.mu = std::stod(value);
      else if (key == "receivers") cfg.receivers = std::stoi(value);
      else if (key == "policy") cfg.policy = parse_policy(value);
      else if (key == "coding") cfg.coding = parse_coding(value);
      else if (key == "q") cfg.q = std::uint32_t(std::stoul(value));
      else if (key == "slots") cfg.slots = std::stoull(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "warmup") cfg.warmup = std::stoull(value);
      else if (key == "verify")
        cfg.verify = value == "1" || value == "true" || value == "on";
      else throw ConfigError("unknown config key: " + key);
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value for '" + key + "': " + value);
    } catch (const std::out_of_range&) {
      throw ConfigError("bad value for '" + key + "': " + value);
    }
  }
}

void apply_env_overrides(SimConfig& cfg) {
  static const char* keys[] = {"lambda", "mu",   "receivers", "policy",
                               "coding", "q",    "slots",     "seed",
                               "warmup", "verify"};
  std::map<std::string, std::string> entries;
  for (const char* key : keys) {
    std::string var = "FBNC_";
    for (const char* p = key; *p; ++p) var += char(std::toupper(*p));
    if (const char* value = std::getenv(var.c_str())) entries[key] = value;
  }
  apply_config_entries(cfg, entries);
}

std::string describe(const SimConfig& cfg) {
  std::ostringstream os;
  os << "lambda=" << cfg.lambda << " mu=" << cfg.mu
     << " rho=" << cfg.rho() << " receivers=" << cfg.receivers
     << " policy=" << to_string(cfg.policy)
     << " coding=" << to_string(cfg.coding) << " q=" << cfg.effective_q()
     << " slots=" << cfg.slots << " seed=" << cfg.seed
     << " warmup=" << cfg.effective_warmup()
     << " verify=" << (cfg.verify ? "on" : "off");
  return os.str();
}

}  // namespace fbnc
