#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ace {

// Derives a stream seed from a master seed and a stream name, so that
// independent consumers (data generation, parameter init, mixup, shuffling)
// never share draws and toggling one does not perturb the others.
std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view stream);

// mt19937_64 with distribution sampling implemented in-house: the standard
// library's distributions are implementation-defined, which would tie frozen
// test values and logged runs to one libstdc++ version.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi);

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  // Standard normal via Box-Muller (one cached spare).
  double normal();

  double gamma(double shape);
  double beta(double a, double b);

  // Fisher-Yates using this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// One generator per run, split into named streams.
class RngStreams {
public:
  explicit RngStreams(std::uint64_t master) : master_(master) {}

  std::uint64_t master() const { return master_; }
  std::uint64_t seed_for(std::string_view stream) const {
    return derive_stream_seed(master_, stream);
  }
  Rng stream(std::string_view name) const { return Rng(seed_for(name)); }

private:
  std::uint64_t master_;
};

}  // namespace ace
