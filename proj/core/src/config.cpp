#include "ace/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ace/aggregate.hpp"
#include "ace/errors.hpp"

namespace ace {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError("bad integer value '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) {
    throw ConfigError("bad unsigned value '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("bad boolean value '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(parse_double(cell));
  }
  return out;
}

std::string format_double_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

template <typename T, typename Get, typename Set>
ConfigKey key(std::string name, std::string help, bool affects_model, Get get, Set set) {
  ConfigKey k;
  k.name = std::move(name);
  k.help = std::move(help);
  k.affects_model = affects_model;
  if constexpr (std::is_same_v<T, std::string>) {
    k.get = [get](const RunConfig& c) { return get(c); };
    k.set = [set](RunConfig& c, const std::string& v) { set(c, v); };
  } else if constexpr (std::is_same_v<T, double>) {
    k.get = [get](const RunConfig& c) { return format_double(get(c)); };
    k.set = [set](RunConfig& c, const std::string& v) { set(c, parse_double(v)); };
  } else if constexpr (std::is_same_v<T, bool>) {
    k.get = [get](const RunConfig& c) { return get(c) ? "true" : "false"; };
    k.set = [set](RunConfig& c, const std::string& v) { set(c, parse_bool(v)); };
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    k.get = [get](const RunConfig& c) { return std::to_string(get(c)); };
    k.set = [set](RunConfig& c, const std::string& v) { set(c, parse_u64(v)); };
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    k.get = [get](const RunConfig& c) { return format_double_list(get(c)); };
    k.set = [set](RunConfig& c, const std::string& v) { set(c, parse_double_list(v)); };
  } else {
    k.get = [get](const RunConfig& c) { return std::to_string(get(c)); };
    k.set = [set](RunConfig& c, const std::string& v) {
      set(c, static_cast<T>(parse_int(v)));
    };
  }
  return k;
}

#define ACE_KEY(type, name, help, affects, field)                                  \
  key<type>(name, help, affects, [](const RunConfig& c) { return c.field; },       \
            [](RunConfig& c, const type& v) { c.field = v; })

std::vector<ConfigKey> build_schema() {
  std::vector<ConfigKey> s;
  s.push_back(ACE_KEY(std::string, "data.source", "blobs | csv", true, data.source));
  s.push_back(ACE_KEY(std::string, "data.profile", "exponential | pareto", true, data.profile));
  s.push_back(ACE_KEY(int, "data.classes", "number of categories C", true, data.classes));
  s.push_back(ACE_KEY(int, "data.dim", "feature dimension", true, data.dim));
  s.push_back(ACE_KEY(std::int64_t, "data.n_max", "largest class count", true, data.n_max));
  s.push_back(ACE_KEY(double, "data.imbalance_factor", "largest/smallest class ratio", true,
                      data.if_factor));
  s.push_back(ACE_KEY(std::int64_t, "data.pareto_n_min", "smallest class count (pareto)", true,
                      data.pareto_n_min));
  s.push_back(ACE_KEY(double, "data.separation", "blob mean distance from origin", true,
                      data.separation));
  s.push_back(ACE_KEY(double, "data.noise", "blob Gaussian sigma", true, data.noise));
  s.push_back(ACE_KEY(int, "data.test_per_class", "balanced test rows per category", true,
                      data.test_per_class));
  s.push_back(ACE_KEY(std::string, "data.train_csv", "training CSV path (source=csv)", true,
                      data.train_csv));
  s.push_back(ACE_KEY(std::string, "data.test_csv", "test CSV path (source=csv)", true,
                      data.test_csv));
  s.push_back(ACE_KEY(std::int64_t, "data.many_threshold", "many-split lower bound (exclusive)",
                      false, data.many_threshold));
  s.push_back(ACE_KEY(std::int64_t, "data.few_threshold", "few-split upper bound (exclusive)",
                      false, data.few_threshold));
  s.push_back(ACE_KEY(int, "model.experts", "number of experts K", true, model.experts));
  s.push_back(ACE_KEY(int, "model.hidden", "trunk layer width", true, model.hidden));
  s.push_back(ACE_KEY(int, "model.branch_width", "expert branch width", true,
                      model.branch_width));
  s.push_back(ACE_KEY(bool, "model.ssc", "split-specific classifiers", true, model.ssc));
  s.push_back(ACE_KEY(double, "loss.lambda_com", "complement loss weight", true, lambda_com));
  s.push_back(ACE_KEY(double, "optim.base_lr", "base learning rate", true, optim.base_lr));
  s.push_back(ACE_KEY(double, "optim.momentum", "SGD momentum", true, optim.momentum));
  {
    ConfigKey k;
    k.name = "optim.scheme";
    k.help = "expert lr scaling: linear | sqrt | uniform";
    k.affects_model = true;
    k.get = [](const RunConfig& c) { return lr_scheme_name(c.optim.scheme); };
    k.set = [](RunConfig& c, const std::string& v) { c.optim.scheme = lr_scheme_from_name(v); };
    s.push_back(std::move(k));
  }
  s.push_back(ACE_KEY(std::vector<double>, "optim.milestones", "decay epochs as fractions",
                      true, optim.milestones));
  s.push_back(ACE_KEY(double, "optim.decay", "lr decay factor per milestone", true, optim.decay));
  s.push_back(ACE_KEY(double, "optim.weight_decay", "L2 weight decay", true,
                      optim.weight_decay));
  s.push_back(ACE_KEY(int, "train.epochs", "training epochs", true, train.epochs));
  s.push_back(ACE_KEY(int, "train.batch_size", "mini-batch size", true, train.batch_size));
  s.push_back(ACE_KEY(double, "train.mixup_alpha", "mixup Beta parameter (0 disables)", true,
                      train.mixup_alpha));
  s.push_back(ACE_KEY(std::uint64_t, "train.seed", "master seed", true, train.seed));
  {
    ConfigKey k;
    k.name = "eval.aggregator";
    k.help = "avg_scaled | max | concat | avg_raw";
    k.affects_model = false;
    k.get = [](const RunConfig& c) { return c.aggregator; };
    k.set = [](RunConfig& c, const std::string& v) {
      (void)aggregator_from_name(v);  // validate
      c.aggregator = v;
    };
    s.push_back(std::move(k));
  }
  s.push_back(ACE_KEY(std::string, "output.dir", "output directory", false, output_dir));
  return s;
}

#undef ACE_KEY

}  // namespace

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = build_schema();
  return schema;
}

void RunConfig::validate() const {
  if (data.source != "blobs" && data.source != "csv") {
    throw ConfigError("data.source must be blobs or csv");
  }
  if (data.profile != "exponential" && data.profile != "pareto") {
    throw ConfigError("data.profile must be exponential or pareto");
  }
  if (data.source == "csv" && (data.train_csv.empty() || data.test_csv.empty())) {
    throw ConfigError("data.source=csv requires data.train_csv and data.test_csv");
  }
  if (data.classes < 2) throw ConfigError("data.classes must be >= 2");
  if (model.experts < 1 || model.experts > data.classes) {
    throw ConfigError("model.experts must satisfy 1 <= K <= C");
  }
  if (lambda_com < 0.0) throw ConfigError("loss.lambda_com must be >= 0");
  if (train.epochs < 0) throw ConfigError("train.epochs must be >= 0");
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (train.mixup_alpha < 0.0) throw ConfigError("train.mixup_alpha must be >= 0");
  (void)aggregator_from_name(aggregator);
  OptimConfig o = optim;
  o.epochs = train.epochs;
  o.validate();
}

std::string serialize_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : config_schema()) {
    out += k.name;
    out += " = ";
    out += k.get(config);
    out += "\n";
  }
  return out;
}

void apply_config_line(RunConfig& config, const std::string& line, const std::string& where) {
  std::string text = line;
  std::size_t hash = text.find('#');
  if (hash != std::string::npos) text = text.substr(0, hash);
  text = trim(text);
  if (text.empty()) return;
  std::size_t eq = text.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(where + ": expected 'key = value', got '" + line + "'");
  }
  std::string name = trim(text.substr(0, eq));
  std::string value = trim(text.substr(eq + 1));
  for (const auto& k : config_schema()) {
    if (k.name == name) {
      try {
        k.set(config, value);
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + name + ": " + e.what());
      }
      return;
    }
  }
  throw ConfigError(where + ": unknown key '" + name + "'");
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    apply_config_line(config, line, path + ":" + std::to_string(lineno));
  }
  return config;
}

void save_config_file(const RunConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << serialize_config(config);
}

std::uint64_t config_model_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& k : config_schema()) {
    if (!k.affects_model) continue;
    mix(k.name);
    mix("=");
    mix(k.get(config));
    mix("\n");
  }
  return h;
}

}  // namespace ace
