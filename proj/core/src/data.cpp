#include "ace/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ace/errors.hpp"

namespace ace {

const char* frequency_tag_name(FrequencyTag tag) {
  switch (tag) {
    case FrequencyTag::Many: return "many";
    case FrequencyTag::Medium: return "medium";
    case FrequencyTag::Few: return "few";
  }
  return "?";
}

ClassProfile exponential_profile(std::int64_t n_max, double imbalance_factor,
                                 int num_categories) {
  if (n_max < 1) throw ConfigError("exponential_profile: n_max must be >= 1");
  if (imbalance_factor < 1.0) throw ConfigError("exponential_profile: IF must be >= 1");
  if (num_categories < 2) throw ConfigError("exponential_profile: need C >= 2");
  ClassProfile p;
  p.counts.resize(static_cast<std::size_t>(num_categories));
  bool clamped = false;
  for (int i = 0; i < num_categories; ++i) {
    double exponent = -static_cast<double>(i) / static_cast<double>(num_categories - 1);
    std::int64_t n = std::llround(static_cast<double>(n_max) *
                                  std::pow(imbalance_factor, exponent));
    if (n < 1) {
      n = 1;
      clamped = true;
    }
    p.counts[static_cast<std::size_t>(i)] = n;
  }
  if (clamped) {
    std::fprintf(stderr,
                 "warning: exponential profile tail rounded to 0; counts clamped to 1\n");
  }
  return p;
}

ClassProfile pareto_profile(std::int64_t n_max, std::int64_t n_min, int num_categories) {
  if (n_min < 1 || n_max < n_min) {
    throw ConfigError("pareto_profile: need n_max >= n_min >= 1");
  }
  if (num_categories < 1) throw ConfigError("pareto_profile: need C >= 1");
  ClassProfile p;
  p.counts.resize(static_cast<std::size_t>(num_categories));
  double gamma = 0.0;
  if (n_max > n_min && num_categories > 1) {
    gamma = std::log(static_cast<double>(n_max) / static_cast<double>(n_min)) /
            std::log(static_cast<double>(num_categories));
  }
  for (int i = 1; i <= num_categories; ++i) {
    std::int64_t n =
        std::llround(static_cast<double>(n_max) * std::pow(static_cast<double>(i), -gamma));
    p.counts[static_cast<std::size_t>(i - 1)] = std::max<std::int64_t>(1, n);
  }
  p.counts.front() = n_max;
  p.counts.back() = num_categories > 1 ? n_min : n_max;
  return p;
}

double imbalance_factor(const ClassProfile& profile) {
  profile.validate();
  return static_cast<double>(profile.counts.front()) /
         static_cast<double>(profile.counts.back());
}

FrequencySplits frequency_splits(const ClassProfile& profile, std::int64_t many_threshold,
                                 std::int64_t few_threshold) {
  if (few_threshold < 1 || many_threshold <= few_threshold) {
    throw ConfigError("frequency_splits: need many > few >= 1");
  }
  FrequencySplits s;
  s.many_threshold = many_threshold;
  s.few_threshold = few_threshold;
  s.membership.reserve(profile.counts.size());
  for (std::int64_t n : profile.counts) {
    if (n > many_threshold) s.membership.push_back(FrequencyTag::Many);
    else if (n < few_threshold) s.membership.push_back(FrequencyTag::Few);
    else s.membership.push_back(FrequencyTag::Medium);
  }
  return s;
}

std::pair<Dataset, Dataset> make_blobs(const BlobSpec& spec, const ClassProfile& profile,
                                       std::uint64_t seed) {
  profile.validate();
  if (spec.dim < 2) throw ConfigError("make_blobs: need dim >= 2");
  if (!(spec.separation > 0.0)) throw ConfigError("make_blobs: separation must be positive");
  if (!(spec.noise > 0.0)) throw ConfigError("make_blobs: noise must be positive");
  if (spec.test_per_class < 1) throw ConfigError("make_blobs: test_per_class must be >= 1");

  int C = profile.num_categories();
  std::size_t d = static_cast<std::size_t>(spec.dim);

  Rng mean_rng(derive_stream_seed(seed, "blobs.means"));
  std::vector<Array> means;
  means.reserve(static_cast<std::size_t>(C));
  for (int c = 0; c < C; ++c) {
    Array m({d});
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : m.values()) {
        v = mean_rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (auto& v : m.values()) v = v / norm * spec.separation;
    means.push_back(std::move(m));
  }

  auto fill_split = [&](const std::vector<std::int64_t>& per_class, Rng& rng, Split tag) {
    std::int64_t total = std::accumulate(per_class.begin(), per_class.end(), std::int64_t{0});
    Dataset ds;
    ds.split = tag;
    ds.profile = profile;
    ds.features = Array({static_cast<std::size_t>(total), d});
    ds.labels.reserve(static_cast<std::size_t>(total));
    ds.original_labels.resize(static_cast<std::size_t>(C));
    std::iota(ds.original_labels.begin(), ds.original_labels.end(), std::int64_t{1});
    std::size_t row = 0;
    for (int c = 0; c < C; ++c) {
      for (std::int64_t k = 0; k < per_class[static_cast<std::size_t>(c)]; ++k) {
        for (std::size_t j = 0; j < d; ++j) {
          ds.features.at(row, j) = means[static_cast<std::size_t>(c)][j] +
                                   spec.noise * rng.normal();
        }
        ds.labels.push_back(static_cast<CategoryId>(c + 1));
        ++row;
      }
    }
    return ds;
  };

  Rng train_rng(derive_stream_seed(seed, "blobs.train"));
  Dataset train = fill_split(profile.counts, train_rng, Split::Train);

  Rng test_rng(derive_stream_seed(seed, "blobs.test"));
  std::vector<std::int64_t> balanced(static_cast<std::size_t>(C), spec.test_per_class);
  Dataset test = fill_split(balanced, test_rng, Split::Test);
  return {std::move(train), std::move(test)};
}

MixedBatch gather_batch(const Dataset& data, std::span<const std::size_t> rows) {
  MixedBatch b;
  b.features = Array({rows.size(), data.dim()});
  b.labels_a.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= data.size()) throw ContractError("gather_batch: row out of range");
    for (std::size_t j = 0; j < data.dim(); ++j)
      b.features.at(i, j) = data.features.at(rows[i], j);
    b.labels_a.push_back(data.labels[rows[i]]);
  }
  b.labels_b = b.labels_a;
  b.lambda.assign(rows.size(), 1.0);
  return b;
}

MixedBatch mixup(const MixedBatch& batch, double alpha, Rng& rng) {
  if (alpha < 0.0) throw ConfigError("mixup: alpha must be >= 0");
  if (alpha == 0.0) return batch;
  std::size_t n = batch.size();
  std::vector<std::size_t> partner(n);
  std::iota(partner.begin(), partner.end(), std::size_t{0});
  rng.shuffle(partner);

  MixedBatch out;
  out.features = Array({n, batch.features.cols()});
  out.labels_a = batch.labels_a;
  out.labels_b.resize(n);
  out.lambda.resize(n);
  std::size_t d = batch.features.cols();
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = partner[i];
    double lam = rng.beta(alpha, alpha);
    out.lambda[i] = lam;
    out.labels_b[i] = batch.labels_a[j];
    for (std::size_t k = 0; k < d; ++k) {
      out.features.at(i, k) =
          lam * batch.features.at(i, k) + (1.0 - lam) * batch.features.at(j, k);
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t num_rows, std::size_t batch_size,
                                                    Rng& rng) {
  if (batch_size < 1 || batch_size > num_rows) {
    throw ConfigError("epoch_batches: need 1 <= batch_size <= dataset size");
  }
  std::vector<std::size_t> order(num_rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t at = 0; at < num_rows; at += batch_size) {
    std::size_t end = std::min(num_rows, at + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

namespace {

struct RawCsv {
  std::vector<std::vector<double>> rows;
  std::vector<std::int64_t> labels;
  std::size_t dim = 0;
};

RawCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  RawCsv raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
    }
    if (vals.size() < 2) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": need features plus a label");
    }
    double lab = vals.back();
    vals.pop_back();
    if (lab != std::floor(lab)) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": label is not an integer");
    }
    if (raw.dim == 0) raw.dim = vals.size();
    if (vals.size() != raw.dim) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": inconsistent column count");
    }
    raw.rows.push_back(std::move(vals));
    raw.labels.push_back(static_cast<std::int64_t>(lab));
  }
  if (raw.rows.empty()) throw ConfigError(path + ": no data rows");
  return raw;
}

Dataset assemble(const RawCsv& raw, const std::vector<std::int64_t>& original_labels,
                 const ClassProfile& profile, Split split) {
  std::map<std::int64_t, CategoryId> to_internal;
  for (std::size_t i = 0; i < original_labels.size(); ++i) {
    to_internal[original_labels[i]] = static_cast<CategoryId>(i + 1);
  }
  Dataset ds;
  ds.split = split;
  ds.profile = profile;
  ds.original_labels = original_labels;
  ds.features = Array({raw.rows.size(), raw.dim});
  ds.labels.reserve(raw.rows.size());
  for (std::size_t r = 0; r < raw.rows.size(); ++r) {
    auto it = to_internal.find(raw.labels[r]);
    if (it == to_internal.end()) {
      throw ConfigError("CSV label " + std::to_string(raw.labels[r]) +
                        " does not appear in the training split");
    }
    ds.labels.push_back(it->second);
    for (std::size_t c = 0; c < raw.dim; ++c) ds.features.at(r, c) = raw.rows[r][c];
  }
  return ds;
}

}  // namespace

Dataset load_csv_train(const std::string& path) {
  RawCsv raw = read_csv(path);

  std::map<std::int64_t, std::int64_t> freq;
  for (auto lab : raw.labels) ++freq[lab];
  // Internal ids ordered by descending count, ties by ascending source label.
  std::vector<std::pair<std::int64_t, std::int64_t>> order(freq.begin(), freq.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  ClassProfile profile;
  std::vector<std::int64_t> originals;
  for (const auto& [lab, n] : order) {
    originals.push_back(lab);
    profile.counts.push_back(n);
  }
  profile.validate();
  return assemble(raw, originals, profile, Split::Train);
}

Dataset load_csv_test(const std::string& path, const Dataset& train) {
  RawCsv raw = read_csv(path);
  if (raw.dim != train.dim()) {
    throw ConfigError("test CSV has " + std::to_string(raw.dim) + " features, train has " +
                      std::to_string(train.dim()));
  }
  Dataset ds = assemble(raw, train.original_labels, train.profile, Split::Test);
  std::vector<std::int64_t> per_class(static_cast<std::size_t>(ds.num_categories()), 0);
  for (CategoryId y : ds.labels) ++per_class[static_cast<std::size_t>(y - 1)];
  for (std::int64_t n : per_class) {
    if (n != per_class.front()) {
      std::fprintf(stderr, "warning: test CSV %s is not balanced across categories\n",
                   path.c_str());
      break;
    }
  }
  return ds;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write CSV file: " + path);
  char buf[64];
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < data.dim(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.features.at(r, c));
      line += buf;
      line += ',';
    }
    line += std::to_string(data.original_labels[static_cast<std::size_t>(data.labels[r] - 1)]);
    out << line << '\n';
  }
  if (!out) throw ConfigError("failed writing CSV file: " + path);
}

void write_profile_json(const ClassProfile& profile, const std::string& path) {
  nlohmann::json j = profile.counts;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write profile file: " + path);
  out << j.dump() << '\n';
}

ClassProfile load_profile_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file: " + path);
  nlohmann::json j;
  in >> j;
  ClassProfile p;
  p.counts = j.get<std::vector<std::int64_t>>();
  p.validate();
  return p;
}

}  // namespace ace
