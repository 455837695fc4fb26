#include "bridgemixed/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "bridgemixed/csv.hpp"

namespace bridgemixed {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw std::runtime_error("config: bad value '" + value + "' for key '" +
                           key + "' (expected " + expected + ")");
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  if (!parse_double(value, &v)) bad_value(key, value, "a number");
  return v;
}

long to_long(const std::string& key, const std::string& value) {
  long v = 0;
  if (!parse_long(value, &v)) bad_value(key, value, "an integer");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true/false");
}

Eigen::VectorXd to_vector(const std::string& key, const std::string& value) {
  const auto parts = split(value, ',');
  Eigen::VectorXd out(static_cast<long>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) {
    out[static_cast<long>(i)] = to_double(key, parts[i]);
  }
  return out;
}

std::vector<double> to_double_list(const std::string& key,
                                   const std::string& value) {
  const auto parts = split(value, ',');
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(to_double(key, p));
  return out;
}

std::vector<long> to_long_list(const std::string& key,
                               const std::string& value) {
  const auto parts = split(value, ',');
  std::vector<long> out;
  for (const auto& p : parts) out.push_back(to_long(key, p));
  return out;
}

std::string join_doubles(const Eigen::VectorXd& v) {
  std::string out;
  for (long i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_full(v[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_full(v[i]);
  }
  return out;
}

std::string join_longs(const std::vector<long>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

void apply_covariate(RunConfig& config, const std::string& name,
                     const std::string& value) {
  CovariateEntry entry;
  entry.name = name;
  if (value == "continuous") {
    entry.use = CovariateUse::numeric;
  } else if (value == "log1p") {
    entry.use = CovariateUse::numeric;
    entry.transform = CovariateTransform::log1p;
  } else if (value.rfind("categorical:", 0) == 0) {
    entry.use = CovariateUse::categorical;
    entry.reference = value.substr(12);
    if (entry.reference.empty()) {
      bad_value("covariates." + name, value, "categorical:<reference-level>");
    }
  } else {
    bad_value("covariates." + name, value,
              "continuous | log1p | categorical:<reference-level>");
  }
  config.covariates.entries.push_back(std::move(entry));
}

void apply_key(RunConfig& config, const std::string& key,
               const std::string& value) {
  if (key == "command") {
    config.command = value;
  } else if (key == "seed") {
    config.seed = static_cast<std::uint64_t>(to_long(key, value));
  } else if (key == "threads") {
    config.threads = static_cast<int>(to_long(key, value));
  } else if (key == "data.path") {
    config.data_path = value;
  } else if (key == "data.categories") {
    config.data_categories = static_cast<int>(to_long(key, value));
  } else if (key == "out.dir") {
    config.out_dir = value;
  } else if (key == "fit.dir") {
    config.fit_dir = value;
  } else if (key == "fit.dirs") {
    config.fit_dirs = split(value, ',');
  } else if (key == "model.family") {
    family_from_name(value);  // validates
    config.family = value;
  } else if (key == "model.prior_location") {
    config.prior_location = to_double(key, value);
  } else if (key == "model.prior_scale") {
    config.prior_scale = to_double(key, value);
  } else if (key == "model.re_prior_scale") {
    config.re_prior_scale = to_double(key, value);
  } else if (key.rfind("covariates.", 0) == 0) {
    apply_covariate(config, key.substr(11), value);
  } else if (key == "sampler.chains") {
    config.sampler.chains = static_cast<int>(to_long(key, value));
  } else if (key == "sampler.iterations") {
    config.sampler.iterations = static_cast<int>(to_long(key, value));
  } else if (key == "sampler.warmup_fraction") {
    config.sampler.warmup_fraction = to_double(key, value);
  } else if (key == "sampler.target_accept") {
    config.sampler.target_accept = to_double(key, value);
  } else if (key == "sampler.max_tree_depth") {
    config.sampler.max_tree_depth = static_cast<int>(to_long(key, value));
  } else if (key == "summary.odds") {
    config.summary_odds = to_bool(key, value);
  } else if (key == "sim.families") {
    config.sim.n_families = static_cast<int>(to_long(key, value));
  } else if (key == "sim.min_individuals") {
    config.sim.min_individuals = static_cast<int>(to_long(key, value));
  } else if (key == "sim.max_individuals") {
    config.sim.max_individuals = static_cast<int>(to_long(key, value));
  } else if (key == "sim.waves") {
    config.sim.waves = to_long_list(key, value);
  } else if (key == "sim.family") {
    config.sim.family = family_from_name(value);
  } else if (key == "sim.alpha") {
    config.sim.alpha = to_vector(key, value);
  } else if (key == "sim.beta") {
    config.sim.beta = to_vector(key, value);
  } else if (key == "sim.phi_u") {
    config.sim.phi_u = to_double(key, value);
  } else if (key == "sim.phi_v") {
    config.sim.phi_v = to_double(key, value);
  } else if (key == "sim.sigma_u") {
    config.sim.sigma_u = to_double(key, value);
  } else if (key == "sim.sigma_v") {
    config.sim.sigma_v = to_double(key, value);
  } else if (key == "sim.continuous") {
    config.sim.n_continuous = static_cast<int>(to_long(key, value));
  } else if (key == "sim.categorical_levels") {
    config.sim.categorical_levels = static_cast<int>(to_long(key, value));
  } else if (key == "sim.entry_probs") {
    config.sim.entry_probs = to_double_list(key, value);
  } else if (key == "sim.retention") {
    config.sim.retention = to_double_list(key, value);
  } else if (key == "sim.intermittent_skip") {
    config.sim.intermittent_skip = to_double(key, value);
  } else {
    throw std::runtime_error("config: unknown key '" + key + "'");
  }
}

}  // namespace

ModelSpec RunConfig::model_spec() const {
  ModelSpec spec;
  spec.family = family_from_name(family);
  spec.categories = data_categories > 0 ? data_categories : 3;
  spec.covariates = covariates;
  spec.prior_location = prior_location;
  spec.prior_scale = prior_scale;
  spec.re_prior_scale = re_prior_scale;
  return spec;
}

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig out = sampler;
  out.seed = seed;
  out.threads = threads;
  return out;
}

SimSpec RunConfig::sim_spec() const {
  SimSpec out = sim;
  out.seed = seed;
  return out;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config: empty key on line " +
                               std::to_string(line_no));
    }
    apply_key(config, key, value);
  }
  return config;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open '" + path + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

std::string config_to_string(const RunConfig& c) {
  std::ostringstream out;
  auto kv = [&out](const std::string& key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  if (!c.command.empty()) kv("command", c.command);
  kv("seed", std::to_string(c.seed));
  kv("threads", std::to_string(c.threads));
  if (!c.data_path.empty()) kv("data.path", c.data_path);
  kv("data.categories", std::to_string(c.data_categories));
  kv("out.dir", c.out_dir);
  if (!c.fit_dir.empty()) kv("fit.dir", c.fit_dir);
  if (!c.fit_dirs.empty()) {
    std::string joined;
    for (size_t i = 0; i < c.fit_dirs.size(); ++i) {
      if (i) joined += ",";
      joined += c.fit_dirs[i];
    }
    kv("fit.dirs", joined);
  }
  kv("model.family", c.family);
  kv("model.prior_location", format_full(c.prior_location));
  kv("model.prior_scale", format_full(c.prior_scale));
  kv("model.re_prior_scale", format_full(c.re_prior_scale));
  for (const auto& entry : c.covariates.entries) {
    std::string value;
    if (entry.use == CovariateUse::categorical) {
      value = "categorical:" + entry.reference;
    } else if (entry.transform == CovariateTransform::log1p) {
      value = "log1p";
    } else {
      value = "continuous";
    }
    kv("covariates." + entry.name, value);
  }
  kv("sampler.chains", std::to_string(c.sampler.chains));
  kv("sampler.iterations", std::to_string(c.sampler.iterations));
  kv("sampler.warmup_fraction", format_full(c.sampler.warmup_fraction));
  kv("sampler.target_accept", format_full(c.sampler.target_accept));
  kv("sampler.max_tree_depth", std::to_string(c.sampler.max_tree_depth));
  kv("summary.odds", c.summary_odds ? "true" : "false");
  kv("sim.families", std::to_string(c.sim.n_families));
  kv("sim.min_individuals", std::to_string(c.sim.min_individuals));
  kv("sim.max_individuals", std::to_string(c.sim.max_individuals));
  kv("sim.waves", join_longs(c.sim.waves));
  kv("sim.family", family_name(c.sim.family));
  kv("sim.alpha", join_doubles(c.sim.alpha));
  kv("sim.beta", join_doubles(c.sim.beta));
  kv("sim.phi_u", format_full(c.sim.phi_u));
  kv("sim.phi_v", format_full(c.sim.phi_v));
  kv("sim.sigma_u", format_full(c.sim.sigma_u));
  kv("sim.sigma_v", format_full(c.sim.sigma_v));
  kv("sim.continuous", std::to_string(c.sim.n_continuous));
  kv("sim.categorical_levels", std::to_string(c.sim.categorical_levels));
  kv("sim.entry_probs", join_doubles(c.sim.entry_probs));
  kv("sim.retention", join_doubles(c.sim.retention));
  kv("sim.intermittent_skip", format_full(c.sim.intermittent_skip));
  return out.str();
}

void write_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("config: cannot write '" + path + "'");
  }
  out << config_to_string(config);
}

std::string config_hash(const RunConfig& config) {
  const std::string text = config_to_string(config);
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

bool config_equal(const RunConfig& a, const RunConfig& b) {
  return config_to_string(a) == config_to_string(b);
}

}  // namespace bridgemixed
