#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <sstream>

#include "sds/error.hpp"
#include "sds/nn.hpp"

namespace sds {

namespace {

constexpr char kMagic[8] = {'S', 'D', 'S', 'A', 'N', 'N', '1', '\0'};

class Fnv1a {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) {
    bytes(&v, sizeof(T));
  }
  void doubles(std::span<const double> v) { bytes(v.data(), v.size_bytes()); }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

void hash_set(Fnv1a& h, const PatchSet& ps) {
  h.value(ps.size());
  h.value(ps.appearance_dim());
  h.value(ps.rank_dim());
  for (std::size_t i = 0; i < ps.size(); ++i) {
    h.doubles(ps.appearance(i));
    h.doubles(ps.rank(i));
    h.value(ps.location(i).x);
    h.value(ps.location(i).y);
  }
}

template <typename T>
void write_raw(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_raw(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

}  // namespace

std::uint64_t ann_cache_key(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg) {
  Fnv1a h;
  hash_set(h, templ);
  hash_set(h, target);
  h.value(static_cast<int>(cfg.effective_distance_mode()));
  h.value(cfg.lambda);
  h.value(cfg.ann_k);
  return h.digest();
}

void save_ann_table(const std::filesystem::path& path, std::uint64_t key, const AnnTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ANN cache " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, key);
  write_raw(out, static_cast<std::uint64_t>(table.template_size));
  write_raw(out, static_cast<std::uint64_t>(table.target_size));
  write_raw(out, static_cast<std::int32_t>(table.k));
  write_raw(out, static_cast<std::uint8_t>(table.clamped ? 1 : 0));
  out.write(reinterpret_cast<const char*>(table.forward.data()),
            static_cast<std::streamsize>(table.forward.size() * sizeof(std::int32_t)));
  if (!out) throw IoError("short write to ANN cache " + path.string());
}

std::optional<AnnTable> load_ann_table(const std::filesystem::path& path, std::uint64_t key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[sizeof(kMagic)];
  std::uint64_t stored_key = 0, n = 0, m = 0;
  std::int32_t k = 0;
  std::uint8_t clamped = 0;
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) return std::nullopt;
  if (!read_raw(in, stored_key) || stored_key != key) return std::nullopt;
  if (!read_raw(in, n) || !read_raw(in, m) || !read_raw(in, k) || !read_raw(in, clamped))
    return std::nullopt;
  if (k < 1 || static_cast<std::uint64_t>(k) > m) return std::nullopt;

  AnnTable table;
  table.k = k;
  table.clamped = clamped != 0;
  table.template_size = n;
  table.target_size = m;
  table.forward.resize(n * static_cast<std::size_t>(k));
  if (!in.read(reinterpret_cast<char*>(table.forward.data()),
               static_cast<std::streamsize>(table.forward.size() * sizeof(std::int32_t))))
    return std::nullopt;
  for (auto j : table.forward)
    if (j < 0 || static_cast<std::uint64_t>(j) >= m) return std::nullopt;
  rebuild_inverted(table);
  return table;
}

AnnTable cached_ann_table(const PatchSet& templ, const PatchSet& target, const MatchConfig& cfg,
                          const std::optional<std::filesystem::path>& cache_dir) {
  if (!cache_dir) return build_ann_table(templ, target, cfg);
  const auto key = ann_cache_key(templ, target, cfg);
  std::ostringstream name;
  name << "ann_" << std::hex << std::setw(16) << std::setfill('0') << key << ".bin";
  const auto path = *cache_dir / name.str();
  if (auto hit = load_ann_table(path, key)) return std::move(*hit);
  auto table = build_ann_table(templ, target, cfg);
  std::error_code ec;
  std::filesystem::create_directories(*cache_dir, ec);
  try {
    save_ann_table(path, key, table);
  } catch (const IoError& e) {
    std::clog << "warning: " << e.what() << "\n";
  }
  return table;
}

}  // namespace sds
