#include "ace/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "ace/errors.hpp"

namespace ace {

namespace {

constexpr char kMagic[8] = {'A', 'C', 'E', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ContractError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, AceModel& model, std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  put(out, config_hash);
  auto params = model.parameters();
  put(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put(out, static_cast<std::uint32_t>(p->value.rank()));
    for (auto d : p->value.shape()) put(out, static_cast<std::uint64_t>(d));
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing checkpoint: " + path);
}

std::uint64_t load_checkpoint(const std::string& path, AceModel& model) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw ContractError("checkpoint: bad magic in " + path);
  }
  auto config_hash = get<std::uint64_t>(in);
  auto count = get<std::uint32_t>(in);
  auto params = model.parameters();
  if (count != params.size()) {
    throw ConfigError("checkpoint: holds " + std::to_string(count) + " parameters, model has " +
                      std::to_string(params.size()));
  }
  for (auto* p : params) {
    auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in || name != p->name) {
      throw ConfigError("checkpoint: expected parameter '" + p->name + "', found '" + name + "'");
    }
    auto rank = get<std::uint32_t>(in);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    if (shape != p->value.shape()) {
      throw ConfigError("checkpoint: shape mismatch for '" + p->name + "'");
    }
    in.read(reinterpret_cast<char*>(p->value.data()),
            static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    if (!in) throw ContractError("checkpoint: truncated file");
  }
  return config_hash;
}

}  // namespace ace
