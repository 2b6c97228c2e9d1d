#include "ace/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ace/errors.hpp"
#include "ace/optim.hpp"

namespace ace {

std::string EpochLog::to_json() const {
  nlohmann::json j;
  j["epoch"] = epoch;
  nlohmann::json losses = nlohmann::json::array();
  for (double v : mean_loss) {
    if (std::isnan(v)) losses.push_back(nullptr);
    else losses.push_back(v);
  }
  j["mean_loss"] = losses;
  j["lr"] = lr;
  j["wall_ms"] = wall_ms;
  return j.dump();
}

std::pair<Dataset, Dataset> build_datasets(const RunConfig& config) {
  if (config.data.source == "csv") {
    Dataset train = load_csv_train(config.data.train_csv);
    Dataset test = load_csv_test(config.data.test_csv, train);
    return {std::move(train), std::move(test)};
  }
  ClassProfile profile =
      config.data.profile == "pareto"
          ? pareto_profile(config.data.n_max, config.data.pareto_n_min, config.data.classes)
          : exponential_profile(config.data.n_max, config.data.if_factor, config.data.classes);
  BlobSpec spec;
  spec.dim = config.data.dim;
  spec.separation = config.data.separation;
  spec.noise = config.data.noise;
  spec.test_per_class = config.data.test_per_class;
  return make_blobs(spec, profile, derive_stream_seed(config.train.seed, "data"));
}

std::unique_ptr<AceModel> build_model(const RunConfig& config, int num_categories, int dim) {
  ModelConfig mc;
  mc.input_dim = dim;
  mc.trunk_width = config.model.hidden;
  mc.branch_width = config.model.branch_width;
  mc.num_categories = num_categories;
  mc.num_experts = config.model.experts;
  mc.ssc = config.model.ssc;
  return std::make_unique<AceModel>(mc, derive_stream_seed(config.train.seed, "init"));
}

int mixup_cutoff_epoch(int epochs) {
  return epochs - static_cast<int>(std::llround(0.05 * epochs));
}

TrainResult train(const RunConfig& config) {
  config.validate();

  TrainResult result;
  auto [train_data, test_data] = build_datasets(config);
  result.train_data = std::move(train_data);
  result.test_data = std::move(test_data);
  const Dataset& data = result.train_data;

  if (data.num_categories() != config.data.classes && config.data.source == "blobs") {
    throw ConfigError("train: generated dataset category count mismatch");
  }
  int C = data.num_categories();
  result.model = build_model(config, C, static_cast<int>(data.dim()));
  AceModel& model = *result.model;
  auto assignments = model.assignments();
  int K = config.model.experts;

  OptimConfig optim = config.optim;
  optim.epochs = config.train.epochs;

  std::vector<double> base_lr(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    base_lr[static_cast<std::size_t>(i)] =
        expert_lr(optim.scheme, optim.base_lr, data.profile, assignments[i]);
  }

  Rng shuffle_rng(derive_stream_seed(config.train.seed, "shuffle"));
  Rng mixup_rng(derive_stream_seed(config.train.seed, "mixup"));

  std::size_t batch_size = std::min<std::size_t>(
      static_cast<std::size_t>(config.train.batch_size), data.size());
  int no_mixup_from = mixup_cutoff_epoch(config.train.epochs);

  std::vector<Array> last_good = model.snapshot_values();
  auto trunk = model.trunk_parameters();

  for (int epoch = 0; epoch < config.train.epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> loss_sum(static_cast<std::size_t>(K), 0.0);
    std::vector<int> loss_count(static_cast<std::size_t>(K), 0);

    std::vector<double> lr(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
      lr[static_cast<std::size_t>(i)] =
          scheduled_lr(base_lr[static_cast<std::size_t>(i)], epoch, optim);
    }

    bool use_mixup = config.train.mixup_alpha > 0.0 && epoch < no_mixup_from;

    for (const auto& rows : epoch_batches(data.size(), batch_size, shuffle_rng)) {
      MixedBatch batch = gather_batch(data, rows);
      if (use_mixup) batch = mixup(batch, config.train.mixup_alpha, mixup_rng);

      graph::Tape tape;
      auto fwd = model.forward(tape, batch.features);

      std::vector<bool> ran(static_cast<std::size_t>(K), false);
      for (int i = 0; i < K; ++i) {
        auto sub = sub_batch_indices(batch.labels_a, batch.labels_b, assignments[i]);
        if (sub.empty()) continue;  // expert skips this step entirely
        graph::Var z_sub = graph::take_rows(fwd.logits[static_cast<std::size_t>(i)], sub);
        Array targets = expert_targets(batch.labels_a, batch.labels_b, batch.lambda, sub,
                                       assignments[i], config.model.ssc);
        graph::Var loss = expert_total_loss(z_sub, targets, assignments[i], config.lambda_com,
                                            config.model.ssc);
        double value = loss.value()[0];
        if (!std::isfinite(value)) {
          model.restore_values(last_good);
          result.aborted = true;
          result.abort_reason = "non-finite loss for expert " + std::to_string(i + 1) +
                                " at epoch " + std::to_string(epoch);
          return result;
        }
        tape.backward(loss);
        ran[static_cast<std::size_t>(i)] = true;
        loss_sum[static_cast<std::size_t>(i)] += value;
        loss_count[static_cast<std::size_t>(i)] += 1;
      }

      if (ran[0]) {
        sgd_step(trunk, lr[0], optim.momentum, optim.weight_decay);
      }
      for (int i = 0; i < K; ++i) {
        if (!ran[static_cast<std::size_t>(i)]) continue;
        auto branch = model.branch_parameters(i);
        sgd_step(branch, lr[static_cast<std::size_t>(i)], optim.momentum, optim.weight_decay);
      }
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    entry.mean_loss.resize(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) {
      auto idx = static_cast<std::size_t>(i);
      entry.mean_loss[idx] = loss_count[idx] ? loss_sum[idx] / loss_count[idx]
                                             : std::numeric_limits<double>::quiet_NaN();
    }
    entry.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t0)
                        .count();
    result.log.push_back(std::move(entry));
    last_good = model.snapshot_values();
  }
  return result;
}

MetricsReport evaluate(AceModel& model, const Dataset& test, AggregatorKind aggregator,
                       const FrequencySplits& splits) {
  if (test.num_categories() != model.config().num_categories) {
    throw ConfigError("evaluate: model expects " +
                      std::to_string(model.config().num_categories) + " categories, dataset has " +
                      std::to_string(test.num_categories()));
  }
  int C = test.num_categories();
  int K = model.config().num_experts;
  auto assignments = model.assignments();

  std::vector<std::int64_t> total(static_cast<std::size_t>(C), 0);
  std::vector<std::int64_t> correct(static_cast<std::size_t>(C), 0);
  std::vector<std::vector<std::int64_t>> expert_correct(
      static_cast<std::size_t>(K), std::vector<std::int64_t>(static_cast<std::size_t>(C), 0));
  std::vector<double> ic_abs_sum(static_cast<std::size_t>(K), 0.0);
  std::vector<std::int64_t> ic_abs_count(static_cast<std::size_t>(K), 0);

  const std::size_t chunk = 512;
  for (std::size_t at = 0; at < test.size(); at += chunk) {
    std::size_t end = std::min(test.size(), at + chunk);
    std::vector<std::size_t> rows(end - at);
    std::iota(rows.begin(), rows.end(), at);
    MixedBatch batch = gather_batch(test, rows);

    graph::Tape tape;
    auto fwd = model.forward(tape, batch.features);
    Prediction pred = aggregate(aggregator, fwd.bundle, assignments);

    for (std::size_t r = 0; r < rows.size(); ++r) {
      CategoryId truth = batch.labels_a[r];
      auto t = static_cast<std::size_t>(truth - 1);
      ++total[t];
      if (pred.labels[r] == truth) ++correct[t];

      for (int i = 0; i < K; ++i) {
        const auto& a = assignments[i];
        CategoryId best = a.target_start();
        double best_v = fwd.bundle.raw_logit(i, r, best);
        for (CategoryId c = a.target_start() + 1; c <= C; ++c) {
          double v = fwd.bundle.raw_logit(i, r, c);
          if (v > best_v) {
            best_v = v;
            best = c;
          }
        }
        if (best == truth) ++expert_correct[static_cast<std::size_t>(i)][t];
        if (!model.config().ssc) {
          for (CategoryId c : a.interfering) {
            ic_abs_sum[static_cast<std::size_t>(i)] += std::abs(fwd.bundle.raw_logit(i, r, c));
            ++ic_abs_count[static_cast<std::size_t>(i)];
          }
        }
      }
    }
  }

  auto percent = [](std::int64_t num, std::int64_t den) {
    return den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };

  MetricsReport m;
  m.test_counts = total;
  m.category_tags = splits.membership;
  m.per_category.resize(static_cast<std::size_t>(C));

  std::int64_t n_all = 0, c_all = 0;
  std::int64_t n_tag[3] = {0, 0, 0}, c_tag[3] = {0, 0, 0};
  for (int c = 0; c < C; ++c) {
    auto i = static_cast<std::size_t>(c);
    m.per_category[i] = percent(correct[i], total[i]);
    n_all += total[i];
    c_all += correct[i];
    int tag = static_cast<int>(splits.membership[i]);
    n_tag[tag] += total[i];
    c_tag[tag] += correct[i];
  }
  m.overall = percent(c_all, n_all);
  m.many = percent(c_tag[static_cast<int>(FrequencyTag::Many)],
                   n_tag[static_cast<int>(FrequencyTag::Many)]);
  m.medium = percent(c_tag[static_cast<int>(FrequencyTag::Medium)],
                     n_tag[static_cast<int>(FrequencyTag::Medium)]);
  m.few = percent(c_tag[static_cast<int>(FrequencyTag::Few)],
                  n_tag[static_cast<int>(FrequencyTag::Few)]);

  for (int i = 0; i < K; ++i) {
    auto idx = static_cast<std::size_t>(i);
    MetricsReport::ExpertDiag d;
    std::int64_t en_all = 0, ec_all = 0;
    std::int64_t en_tag[3] = {0, 0, 0}, ec_tag[3] = {0, 0, 0};
    for (int c = 0; c < C; ++c) {
      auto ci = static_cast<std::size_t>(c);
      en_all += total[ci];
      ec_all += expert_correct[idx][ci];
      int tag = static_cast<int>(splits.membership[ci]);
      en_tag[tag] += total[ci];
      ec_tag[tag] += expert_correct[idx][ci];
    }
    d.overall = percent(ec_all, en_all);
    d.many = percent(ec_tag[static_cast<int>(FrequencyTag::Many)],
                     n_tag[static_cast<int>(FrequencyTag::Many)]);
    d.medium = percent(ec_tag[static_cast<int>(FrequencyTag::Medium)],
                       n_tag[static_cast<int>(FrequencyTag::Medium)]);
    d.few = percent(ec_tag[static_cast<int>(FrequencyTag::Few)],
                    n_tag[static_cast<int>(FrequencyTag::Few)]);
    d.mean_ic_logit =
        ic_abs_count[idx] ? ic_abs_sum[idx] / static_cast<double>(ic_abs_count[idx]) : 0.0;
    m.experts.push_back(d);
  }
  return m;
}

RunConfig apply_variant(const RunConfig& base, const std::string& variant) {
  RunConfig c = base;
  if (variant == "ace") {
    c.model.ssc = false;
  } else if (variant == "no_com") {
    c.model.ssc = false;
    c.lambda_com = 0.0;
  } else if (variant == "ssc") {
    c.model.ssc = true;
  } else {
    throw ConfigError("unknown ablation variant '" + variant + "' (ace|no_com|ssc)");
  }
  return c;
}

std::vector<MetricsRow> run_ablation_suite(const RunConfig& base, const AblationGrid& grid) {
  if (grid.variants.empty() || grid.schemes.empty() || grid.aggregators.empty() ||
      grid.seeds.empty()) {
    throw ConfigError("ablation grid has an empty axis");
  }

  struct Cell {
    std::string variant;
    std::string scheme;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& variant : grid.variants)
    for (const auto& scheme : grid.schemes)
      for (auto seed : grid.seeds) cells.push_back({variant, scheme, seed});

  auto run_cell = [&](const Cell& cell) {
    RunConfig config = apply_variant(base, cell.variant);
    config.optim.scheme = lr_scheme_from_name(cell.scheme);
    config.train.seed = cell.seed;
    TrainResult tr = train(config);
    FrequencySplits splits = frequency_splits(tr.train_data.profile, base.data.many_threshold,
                                              base.data.few_threshold);
    std::vector<MetricsRow> rows;
    for (const auto& agg : grid.aggregators) {
      MetricsRow row;
      row.variant = cell.variant;
      row.scheme = cell.scheme;
      row.aggregator = agg;
      row.seed = cell.seed;
      row.metrics = evaluate(*tr.model, tr.test_data, aggregator_from_name(agg), splits);
      rows.push_back(std::move(row));
    }
    return rows;
  };

  std::vector<std::vector<MetricsRow>> results(cells.size());
  int jobs = std::max(1, grid.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) results[i] = run_cell(cells[i]);
  } else {
    std::vector<std::future<void>> workers;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
      workers.push_back(std::async(std::launch::async, [&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          results[i] = run_cell(cells[i]);
        }
      }));
    }
    for (auto& f : workers) f.get();
  }

  std::vector<MetricsRow> rows;
  for (auto& cell_rows : results)
    for (auto& r : cell_rows) rows.push_back(std::move(r));
  return rows;
}

}  // namespace ace
