#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cnet/data/augment.hpp"
#include "cnet/data/manifest.hpp"
#include "cnet/tensor.hpp"

namespace cnet::data {

struct Batch {
  Tensor<float> images;  // (b, H, W, 3)
  Tensor<float> labels;  // (b, 2) one-hot
  std::vector<const Record*> records;
};

struct BatchOptions {
  std::size_t batch_size = 32;
  std::size_t height = 224;
  std::size_t width = 224;
  std::optional<AugmentSpec> augment;  // used only for the train split
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

/// Streams one epoch of a split. Train order is a shuffle seeded by
/// (seed, epoch); val/test keep manifest order. The final partial batch is
/// emitted. Unreadable images are skipped with a warning on stderr.
class BatchIterator {
 public:
  BatchIterator(const DatasetManifest& manifest, Split split, BatchOptions options);

  std::optional<Batch> next();
  std::size_t record_count() const { return order_.size(); }
  std::size_t batch_count() const;
  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  const DatasetManifest& manifest_;
  Split split_;
  BatchOptions options_;
  std::vector<const Record*> order_;
  std::size_t cursor_ = 0;
  std::vector<std::string> skipped_;
};

}  // namespace cnet::data
