#include "ace/metrics.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ace/errors.hpp"

namespace ace {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["overall"] = overall;
  j["many"] = many;
  j["medium"] = medium;
  j["few"] = few;
  j["per_category"] = per_category;
  j["test_counts"] = test_counts;
  nlohmann::json tags = nlohmann::json::array();
  for (auto t : category_tags) tags.push_back(frequency_tag_name(t));
  j["category_tags"] = tags;
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& e : experts) {
    ex.push_back({{"overall", e.overall},
                  {"many", e.many},
                  {"medium", e.medium},
                  {"few", e.few},
                  {"mean_ic_logit", e.mean_ic_logit}});
  }
  j["experts"] = ex;
  return j.dump(2);
}

MetricsReport MetricsReport::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MetricsReport m;
  m.overall = j.at("overall").get<double>();
  m.many = j.at("many").get<double>();
  m.medium = j.at("medium").get<double>();
  m.few = j.at("few").get<double>();
  m.per_category = j.at("per_category").get<std::vector<double>>();
  m.test_counts = j.at("test_counts").get<std::vector<std::int64_t>>();
  for (const auto& name : j.at("category_tags")) {
    std::string s = name.get<std::string>();
    m.category_tags.push_back(s == "many"     ? FrequencyTag::Many
                              : s == "medium" ? FrequencyTag::Medium
                                              : FrequencyTag::Few);
  }
  for (const auto& e : j.at("experts")) {
    MetricsReport::ExpertDiag d;
    d.overall = e.at("overall").get<double>();
    d.many = e.at("many").get<double>();
    d.medium = e.at("medium").get<double>();
    d.few = e.at("few").get<double>();
    d.mean_ic_logit = e.at("mean_ic_logit").get<double>();
    m.experts.push_back(d);
  }
  return m;
}

std::string metrics_csv_header(int num_categories, int num_experts) {
  std::string h = "variant,scheme,aggregator,seed,overall,many,medium,few";
  for (int c = 1; c <= num_categories; ++c) h += ",cat" + std::to_string(c);
  for (int i = 1; i <= num_experts; ++i) {
    std::string p = "expert" + std::to_string(i);
    h += "," + p + "_overall," + p + "_many," + p + "_medium," + p + "_few," + p + "_ic_logit";
  }
  return h;
}

std::string metrics_csv_row(const MetricsRow& row) {
  const MetricsReport& m = row.metrics;
  std::string s = row.variant + "," + row.scheme + "," + row.aggregator + "," +
                  std::to_string(row.seed) + "," + fmt(m.overall) + "," + fmt(m.many) + "," +
                  fmt(m.medium) + "," + fmt(m.few);
  for (double v : m.per_category) s += "," + fmt(v);
  for (const auto& e : m.experts) {
    s += "," + fmt(e.overall) + "," + fmt(e.many) + "," + fmt(e.medium) + "," + fmt(e.few) +
         "," + fmt(e.mean_ic_logit);
  }
  return s;
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  if (rows.empty()) throw ContractError("write_metrics_csv: no rows");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write metrics file: " + path);
  out << metrics_csv_header(static_cast<int>(rows.front().metrics.per_category.size()),
                            static_cast<int>(rows.front().metrics.experts.size()))
      << '\n';
  for (const auto& r : rows) out << metrics_csv_row(r) << '\n';
}

}  // namespace ace
