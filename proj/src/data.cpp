#include "bgcn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bgcn {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits into lines, tolerating a trailing newline and CRLF endings.
std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

bool parse_int(std::string_view token, index_t& out) {
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end;
}

// Expects exactly `count` whitespace-separated integers on the line.
std::vector<index_t> parse_ints(std::string_view line, std::size_t count,
                                const std::string& context) {
  std::vector<index_t> values;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::size_t end = pos;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    index_t v = 0;
    if (!parse_int(line.substr(pos, end - pos), v)) {
      throw LoadError(context + ": expected integers, got '" +
                      std::string(line) + "'");
    }
    values.push_back(v);
    pos = end;
  }
  if (values.size() != count) {
    throw LoadError(context + ": expected " + std::to_string(count) +
                    " integers, got " + std::to_string(values.size()));
  }
  return values;
}

std::vector<IdPair> load_pairs(const std::string& path, index_t first_limit,
                               index_t second_limit,
                               std::vector<FileInfo>& provenance,
                               index_t& duplicates) {
  const std::string content = read_file(path);
  provenance.push_back({path, fnv1a(content)});
  std::vector<IdPair> pairs;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string context = path + ":" + std::to_string(i + 1);
    const auto v = parse_ints(lines[i], 2, context);
    if (v[0] < 0 || v[0] >= first_limit) {
      throw LoadError(context + ": id " + std::to_string(v[0]) +
                      " out of range [0, " + std::to_string(first_limit) + ")");
    }
    if (v[1] < 0 || v[1] >= second_limit) {
      throw LoadError(context + ": id " + std::to_string(v[1]) +
                      " out of range [0, " + std::to_string(second_limit) + ")");
    }
    pairs.emplace_back(v[0], v[1]);
  }
  std::sort(pairs.begin(), pairs.end());
  const auto last = std::unique(pairs.begin(), pairs.end());
  duplicates += static_cast<index_t>(std::distance(last, pairs.end()));
  pairs.erase(last, pairs.end());
  return pairs;
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Dataset load_dataset(const std::string& dir) {
  Dataset ds;
  const std::string sizes_path = dir + "/sizes.txt";
  const std::string sizes_content = read_file(sizes_path);
  ds.provenance.push_back({sizes_path, fnv1a(sizes_content)});
  const auto size_lines = split_lines(sizes_content);
  if (size_lines.empty()) throw LoadError(sizes_path + ":1: empty file");
  const auto sizes = parse_ints(size_lines[0], 3, sizes_path + ":1");
  ds.num_users = sizes[0];
  ds.num_bundles = sizes[1];
  ds.num_items = sizes[2];
  if (ds.num_users <= 0 || ds.num_bundles <= 0 || ds.num_items <= 0) {
    throw LoadError(sizes_path + ":1: counts must be positive");
  }

  ds.ub = load_pairs(dir + "/user_bundle.txt", ds.num_users, ds.num_bundles,
                     ds.provenance, ds.duplicate_pairs);
  ds.ui = load_pairs(dir + "/user_item.txt", ds.num_users, ds.num_items,
                     ds.provenance, ds.duplicate_pairs);
  ds.bi = load_pairs(dir + "/bundle_item.txt", ds.num_bundles, ds.num_items,
                     ds.provenance, ds.duplicate_pairs);

  std::vector<std::uint8_t> has_item(static_cast<std::size_t>(ds.num_bundles), 0);
  for (const auto& [b, i] : ds.bi) has_item[b] = 1;
  for (index_t b = 0; b < ds.num_bundles; ++b) {
    if (!has_item[b]) {
      throw LoadError(dir + "/bundle_item.txt: bundle " + std::to_string(b) +
                      " has no items");
    }
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  write_file_atomic(dir + "/sizes.txt",
                    std::to_string(ds.num_users) + " " +
                        std::to_string(ds.num_bundles) + " " +
                        std::to_string(ds.num_items) + "\n");
  auto dump = [&](const std::vector<IdPair>& pairs, const std::string& name) {
    std::vector<IdPair> sorted = pairs;
    std::sort(sorted.begin(), sorted.end());
    std::string out;
    out.reserve(sorted.size() * 12);
    for (const auto& [a, b] : sorted) {
      out += std::to_string(a);
      out += '\t';
      out += std::to_string(b);
      out += '\n';
    }
    write_file_atomic(dir + "/" + name, out);
  };
  dump(ds.ub, "user_bundle.txt");
  dump(ds.ui, "user_item.txt");
  dump(ds.bi, "bundle_item.txt");
}

std::string stats_line(const Dataset& ds) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "#U=%lld #I=%lld #B=%lld #U-I=%lld #U-B=%lld AvgI/B=%.2f",
                static_cast<long long>(ds.num_users),
                static_cast<long long>(ds.num_items),
                static_cast<long long>(ds.num_bundles),
                static_cast<long long>(ds.ui.size()),
                static_cast<long long>(ds.ub.size()),
                static_cast<double>(ds.bi.size()) /
                    static_cast<double>(ds.num_bundles));
  return buf;
}

DataSplit split_dataset(const Dataset& ds, const SplitSpec& spec) {
  if (spec.train < 0 || spec.val < 0 || spec.test < 0 ||
      std::abs(spec.train + spec.val + spec.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be nonnegative and sum to 1");
  }
  std::vector<std::vector<index_t>> by_user(
      static_cast<std::size_t>(ds.num_users));
  for (const auto& [u, b] : ds.ub) by_user[u].push_back(b);

  DataSplit out;
  for (index_t u = 0; u < ds.num_users; ++u) {
    auto bundles = by_user[u];
    std::sort(bundles.begin(), bundles.end());
    const index_t n = static_cast<index_t>(bundles.size());
    if (n == 0) continue;
    if (n < 3) {
      for (index_t b : bundles) out.train.emplace_back(u, b);
      continue;
    }
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(u)));
    for (index_t i = n - 1; i > 0; --i) {
      const index_t j = rng.uniform_int(i + 1);
      std::swap(bundles[i], bundles[j]);
    }
    index_t n_test = static_cast<index_t>(
        std::floor(spec.test * static_cast<double>(n) + 0.5));
    index_t n_val = static_cast<index_t>(
        std::floor(spec.val * static_cast<double>(n) + 0.5));
    // Keep at least one training positive.
    while (n - n_test - n_val < 1 && n_test > 0) --n_test;
    while (n - n_test - n_val < 1 && n_val > 0) --n_val;
    const index_t n_train = n - n_test - n_val;
    for (index_t i = 0; i < n; ++i) {
      if (i < n_train) {
        out.train.emplace_back(u, bundles[i]);
      } else if (i < n_train + n_val) {
        out.val.emplace_back(u, bundles[i]);
      } else {
        out.test.emplace_back(u, bundles[i]);
      }
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

void SynthSpec::validate() const {
  auto positive = [](index_t v, const char* field) {
    if (v <= 0) throw ConfigError(std::string("synth spec: ") + field +
                                  " must be positive");
  };
  positive(users, "users");
  positive(bundles, "bundles");
  positive(items, "items");
  positive(latent, "latent");
  positive(bundle_size_min, "bundle_size_min");
  positive(ui_min, "ui_min");
  positive(ub_min, "ub_min");
  if (bundle_size_max < bundle_size_min || bundle_size_max > items) {
    throw ConfigError("synth spec: bundle_size_max out of range");
  }
  if (ui_max < ui_min || ui_max > items) {
    throw ConfigError("synth spec: ui_max out of range");
  }
  if (ub_max < ub_min || ub_max > bundles) {
    throw ConfigError("synth spec: ub_max out of range");
  }
  if (noise < 0.0 || noise >= 1.0) {
    throw ConfigError("synth spec: noise must lie in [0, 1)");
  }
  if (item_signal_weight < 0.0 || item_signal_weight > 1.0) {
    throw ConfigError("synth spec: item_signal_weight must lie in [0, 1]");
  }
  if (ui_alignment < 0.0 || ui_alignment > 1.0) {
    throw ConfigError("synth spec: ui_alignment must lie in [0, 1]");
  }
}

namespace {

DenseMatrix latent_factors(index_t rows, index_t k, Rng& rng) {
  DenseMatrix m(rows, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  for (auto& v : m.data) v = rng.normal() * scale;
  return m;
}

double global_std(const DenseMatrix& m) {
  double mean = 0.0;
  for (double v : m.data) mean += v;
  mean /= static_cast<double>(m.data.size());
  double var = 0.0;
  for (double v : m.data) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m.data.size());
  return var > 0.0 ? std::sqrt(var) : 1.0;
}

// Top-n ids by score (ties by ascending id). Noise swaps a pick for a
// near-miss from the next affinity tier, modeling deviations to plausible
// alternatives rather than to arbitrary ids.
std::vector<index_t> top_n_with_noise(std::span<const double> scores, index_t n,
                                      double noise, Rng& rng) {
  const index_t total = static_cast<index_t>(scores.size());
  std::vector<index_t> order(static_cast<std::size_t>(total));
  for (index_t i = 0; i < total; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  std::vector<index_t> picked(order.begin(), order.begin() + n);
  if (noise > 0.0) {
    const index_t tier_end = std::min(total, 5 * n);
    std::vector<std::uint8_t> in_set(static_cast<std::size_t>(total), 0);
    for (index_t id : picked) in_set[id] = 1;
    for (index_t i = 0; i < n; ++i) {
      if (!rng.bernoulli(noise)) continue;
      for (int attempt = 0; attempt < 64; ++attempt) {
        const index_t repl =
            order[tier_end > n ? n + rng.uniform_int(tier_end - n)
                               : rng.uniform_int(total)];
        if (!in_set[repl]) {
          in_set[picked[i]] = 0;
          in_set[repl] = 1;
          picked[i] = repl;
          break;
        }
      }
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

SynthData synth_generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const index_t m = spec.users;
  const index_t n = spec.bundles;
  const index_t o = spec.items;
  const index_t k = spec.latent;

  const DenseMatrix user_f = latent_factors(m, k, rng);
  const DenseMatrix item_f = latent_factors(o, k, rng);
  const DenseMatrix bundle_f = latent_factors(n, k, rng);
  // Item-interaction taste: a rotation of the bundle taste, so browsing
  // history is informative but not a complete picture of bundle choice.
  DenseMatrix browse_f = latent_factors(m, k, rng);
  const double align = spec.ui_alignment;
  const double resid = std::sqrt(1.0 - align * align);
  for (index_t u = 0; u < m; ++u) {
    for (index_t j = 0; j < k; ++j) {
      browse_f(u, j) = align * user_f(u, j) + resid * browse_f(u, j);
    }
  }

  SynthData out;
  out.dataset.num_users = m;
  out.dataset.num_bundles = n;
  out.dataset.num_items = o;

  // Bundles are random distinct item subsets.
  std::vector<std::vector<index_t>> bundle_items(static_cast<std::size_t>(n));
  for (index_t b = 0; b < n; ++b) {
    const index_t size =
        spec.bundle_size_min +
        rng.uniform_int(spec.bundle_size_max - spec.bundle_size_min + 1);
    std::vector<std::uint8_t> used(static_cast<std::size_t>(o), 0);
    auto& items = bundle_items[b];
    while (static_cast<index_t>(items.size()) < size) {
      const index_t i = rng.uniform_int(o);
      if (used[i]) continue;
      used[i] = 1;
      items.push_back(i);
    }
    std::sort(items.begin(), items.end());
    for (index_t i : items) out.dataset.bi.emplace_back(b, i);
  }

  // True item affinities drive the pooled attraction component; the rotated
  // browse affinities drive which items a user actually interacts with.
  DenseMatrix item_aff = matmul(user_f, Trans::N, item_f, Trans::T);    // M x O
  DenseMatrix browse_aff = matmul(browse_f, Trans::N, item_f, Trans::T);
  DenseMatrix pooled(m, n);
  for (index_t u = 0; u < m; ++u) {
    for (index_t b = 0; b < n; ++b) {
      double acc = 0.0;
      for (index_t i : bundle_items[b]) acc += item_aff(u, i);
      pooled(u, b) = acc / static_cast<double>(bundle_items[b].size());
    }
  }
  DenseMatrix direct = matmul(user_f, Trans::N, bundle_f, Trans::T);  // M x N

  // Standardize both components so item_signal_weight mixes like-for-like.
  const double w = spec.item_signal_weight;
  const double s1 = global_std(pooled);
  const double s2 = global_std(direct);
  out.affinity = DenseMatrix(m, n);
  for (std::size_t i = 0; i < out.affinity.data.size(); ++i) {
    out.affinity.data[i] =
        w * pooled.data[i] / s1 + (1.0 - w) * direct.data[i] / s2;
  }

  for (index_t u = 0; u < m; ++u) {
    const index_t count = spec.ui_min + rng.uniform_int(spec.ui_max - spec.ui_min + 1);
    const auto picked =
        top_n_with_noise(browse_aff.row(u), count, spec.noise, rng);
    for (index_t i : picked) out.dataset.ui.emplace_back(u, i);
  }
  for (index_t u = 0; u < m; ++u) {
    const index_t count = spec.ub_min + rng.uniform_int(spec.ub_max - spec.ub_min + 1);
    const auto picked =
        top_n_with_noise(out.affinity.row(u), count, spec.noise, rng);
    for (index_t b : picked) out.dataset.ub.emplace_back(u, b);
  }
  std::sort(out.dataset.ub.begin(), out.dataset.ub.end());
  std::sort(out.dataset.ui.begin(), out.dataset.ui.end());
  std::sort(out.dataset.bi.begin(), out.dataset.bi.end());
  return out;
}

void save_affinity(const DenseMatrix& affinity, const std::string& path) {
  std::string out = std::to_string(affinity.rows) + " " +
                    std::to_string(affinity.cols) + "\n";
  char buf[64];
  for (index_t i = 0; i < affinity.rows; ++i) {
    for (index_t j = 0; j < affinity.cols; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", affinity(i, j));
      out += buf;
      out += j + 1 == affinity.cols ? '\n' : ' ';
    }
  }
  write_file_atomic(path, out);
}

DenseMatrix load_affinity(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path);
  index_t rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows <= 0 || cols <= 0) {
    throw LoadError(path + ": bad affinity header");
  }
  DenseMatrix m(rows, cols);
  for (auto& v : m.data) {
    if (!(in >> v)) throw LoadError(path + ": truncated affinity table");
  }
  return m;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, float f) {
  std::uint32_t bits = 0;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) {
      throw CheckpointError("truncated checkpoint (wanted " + std::to_string(n) +
                            " bytes at offset " + std::to_string(pos) + ")");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float f = 0.0f;
    std::memcpy(&f, &bits, 4);
    return f;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path,
                     std::span<const ConstTensorRef> tensors,
                     std::string_view config) {
  std::string out;
  out += "BGCN";
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, 2);
    put_u64(out, static_cast<std::uint64_t>(t.tensor->rows));
    put_u64(out, static_cast<std::uint64_t>(t.tensor->cols));
    for (double v : t.tensor->data) put_f32(out, static_cast<float>(v));
  }
  put_u64(out, config.size());
  out += config;
  write_file_atomic(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string buf = ss.str();
  Cursor cur{buf};

  if (cur.bytes(4) != "BGCN") throw CheckpointError(path + ": bad magic");
  const std::uint32_t version = cur.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported version " +
                          std::to_string(version));
  }
  const std::uint32_t count = cur.u32();
  Checkpoint ckpt;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t name_len = cur.u32();
    NamedTensor nt;
    nt.name = cur.bytes(name_len);
    const std::uint32_t rank = cur.u32();
    if (rank != 2) {
      throw CheckpointError(path + ": tensor " + nt.name + " has rank " +
                            std::to_string(rank) + ", expected 2");
    }
    const std::uint64_t rows = cur.u64();
    const std::uint64_t cols = cur.u64();
    if (rows == 0 || cols == 0 || rows > (1ULL << 32) || cols > (1ULL << 32)) {
      throw CheckpointError(path + ": tensor " + nt.name + " has bad shape");
    }
    nt.tensor = DenseMatrix(static_cast<index_t>(rows), static_cast<index_t>(cols));
    for (auto& v : nt.tensor.data) v = static_cast<double>(cur.f32());
    ckpt.tensors.push_back(std::move(nt));
  }
  const std::uint64_t config_len = cur.u64();
  ckpt.config = cur.bytes(config_len);
  if (cur.pos != buf.size()) {
    throw CheckpointError(path + ": trailing bytes after config echo");
  }
  return ckpt;
}

const DenseMatrix* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

std::string Checkpoint::config_value(const std::string& key) const {
  for (const auto line : split_lines(config)) {
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) continue;
    if (line.substr(0, eq) == key) return std::string(line.substr(eq + 1));
  }
  return {};
}

namespace {

const DenseMatrix& require_tensor(const Checkpoint& ckpt,
                                  const std::string& name) {
  const DenseMatrix* t = ckpt.find(name);
  if (t == nullptr) throw CheckpointError("checkpoint missing tensor " + name);
  return *t;
}

index_t config_int(const Checkpoint& ckpt, const std::string& key) {
  const std::string v = ckpt.config_value(key);
  index_t out = 0;
  if (v.empty() || !parse_int(v, out)) {
    throw CheckpointError("checkpoint config missing integer key " + key);
  }
  return out;
}

}  // namespace

ModelParams bgcn_params_from_checkpoint(const Checkpoint& ckpt) {
  ModelParams p;
  p.d = config_int(ckpt, "d");
  p.layers = static_cast<int>(config_int(ckpt, "layers"));
  p.P = require_tensor(ckpt, "P");
  p.Q = require_tensor(ckpt, "Q");
  p.R = require_tensor(ckpt, "R");
  for (int l = 0; l < p.layers; ++l) {
    const std::string suffix = "_" + std::to_string(l + 1);
    p.W1.push_back(require_tensor(ckpt, "W1" + suffix));
    p.b1.push_back(require_tensor(ckpt, "b1" + suffix));
    p.W2.push_back(require_tensor(ckpt, "W2" + suffix));
    p.b2.push_back(require_tensor(ckpt, "b2" + suffix));
  }
  for (const auto& r : tensor_refs(p)) {
    const bool embedding = r.name == "P" || r.name == "Q" || r.name == "R";
    const index_t want_cols = p.d;
    if (r.tensor->cols != want_cols ||
        (!embedding && r.name[0] == 'W' && r.tensor->rows != p.d) ||
        (r.name[0] == 'b' && r.tensor->rows != 1)) {
      throw CheckpointError("checkpoint tensor " + r.name +
                            " has shape inconsistent with d=" +
                            std::to_string(p.d));
    }
  }
  return p;
}

MfParams mf_params_from_checkpoint(const Checkpoint& ckpt) {
  MfParams p;
  p.d = config_int(ckpt, "d");
  p.P = require_tensor(ckpt, "P");
  p.R = require_tensor(ckpt, "R");
  if (p.P.cols != p.d || p.R.cols != p.d) {
    throw CheckpointError("checkpoint tensors P/R inconsistent with d=" +
                          std::to_string(p.d));
  }
  return p;
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + tmp);
  }
  fs::rename(tmp, path);
}

}  // namespace bgcn
