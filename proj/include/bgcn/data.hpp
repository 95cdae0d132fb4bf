#pragma once

#include <string>
#include <vector>

#include "bgcn/matrix.hpp"
#include "bgcn/model.hpp"

namespace bgcn {

struct FileInfo {
  std::string path;
  std::uint64_t checksum = 0;  // FNV-1a over the file bytes
};

// In-memory dataset in the three-relation triple-file format.
struct Dataset {
  index_t num_users = 0;    // M
  index_t num_bundles = 0;  // N
  index_t num_items = 0;    // O
  std::vector<IdPair> ub;
  std::vector<IdPair> ui;
  std::vector<IdPair> bi;
  std::vector<FileInfo> provenance;
  index_t duplicate_pairs = 0;  // collapsed while loading
};

// Reads sizes.txt, user_bundle.txt, user_item.txt, bundle_item.txt from dir.
// Malformed lines, out-of-range ids and empty bundles raise LoadError with
// file:line context. Duplicate pairs are collapsed and counted.
Dataset load_dataset(const std::string& dir);

// Writes the dataset back in the same format with sorted pair files.
void save_dataset(const Dataset& ds, const std::string& dir);

// "#U=<M> #I=<O> #B=<N> #U-I=<..> #U-B=<..> AvgI/B=<2dp>"
std::string stats_line(const Dataset& ds);

struct SplitSpec {
  double train = 0.7;
  double val = 0.1;
  double test = 0.2;
  std::uint64_t seed = 0;
};

struct DataSplit {
  std::vector<IdPair> train;
  std::vector<IdPair> val;
  std::vector<IdPair> test;
};

// Per-user seeded shuffle of the user's ub pairs, then a ratio cut. Users
// with fewer than 3 interactions go entirely to train; everyone with >= 3
// keeps at least one training positive. Only ub is split; ui and bi are side
// information and stay whole.
DataSplit split_dataset(const Dataset& ds, const SplitSpec& spec);

struct SynthSpec {
  index_t users = 200;
  index_t bundles = 100;
  index_t items = 500;
  index_t latent = 8;
  index_t bundle_size_min = 8;
  index_t bundle_size_max = 16;
  index_t ui_min = 20;
  index_t ui_max = 40;
  index_t ub_min = 6;
  index_t ub_max = 12;
  double noise = 0.1;
  // Share of the bundle attraction explained by item affinities; the rest
  // comes from a bundle-specific latent factor the item level cannot see.
  double item_signal_weight = 0.3;
  // Correlation between the factors driving item interactions and the ones
  // driving bundle choice: 1 means browsing history mirrors bundle taste
  // exactly, 0 makes the item history pure noise.
  double ui_alignment = 0.7;
  std::uint64_t seed = 7;

  void validate() const;  // ConfigError naming the offending field
};

struct SynthData {
  Dataset dataset;
  DenseMatrix affinity;  // M x N ground-truth bundle attraction (pre-noise)
};

// Planted-structure generator: latent user/item factors, bundles as random
// item subsets, positives as top-affinity picks with noise swaps. The true
// attraction table is retained for oracle metrics.
SynthData synth_generate(const SynthSpec& spec);

// Writes/reads the affinity sidecar next to a synthetic dataset.
void save_affinity(const DenseMatrix& affinity, const std::string& path);
DenseMatrix load_affinity(const std::string& path);

struct NamedTensor {
  std::string name;
  DenseMatrix tensor;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;
  std::string config;  // echoed key=value lines

  const DenseMatrix* find(const std::string& name) const;
  // Parses "key=value" lines of the config echo; empty when missing.
  std::string config_value(const std::string& key) const;
};

// Binary format: magic "BGCN", u32 version, u32 tensor count, then per tensor
// (u32 name length, name, u32 rank, u64 dims..., f32 little-endian row-major
// data), then u64 config length and the config bytes. Written atomically.
void save_checkpoint(const std::string& path,
                     std::span<const ConstTensorRef> tensors,
                     std::string_view config);
Checkpoint load_checkpoint(const std::string& path);

// Reassembles typed parameters from a loaded checkpoint; shapes are validated
// against the declared dimensions and errors name the offending tensor.
ModelParams bgcn_params_from_checkpoint(const Checkpoint& ckpt);
MfParams mf_params_from_checkpoint(const Checkpoint& ckpt);

// Write-to-temp-then-rename helper used for every artifact this project emits.
void write_file_atomic(const std::string& path, std::string_view content);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace bgcn
