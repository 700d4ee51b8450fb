#include "cnet/data/batch.hpp"

#include <algorithm>
#include <iostream>

#include "cnet/data/image.hpp"
#include "cnet/error.hpp"

namespace cnet::data {
namespace {

constexpr std::uint64_t kShuffleTag = 0x5348554646ull;   // "SHUFF"
constexpr std::uint64_t kAugmentTag = 0x4155474dull;     // "AUGM"

}  // namespace

BatchIterator::BatchIterator(const DatasetManifest& manifest, Split split, BatchOptions options)
    : manifest_(manifest), split_(split), options_(std::move(options)), order_(manifest.in_split(split)) {
  if (options_.batch_size == 0) throw Error(ErrorCode::kConfigInvalid, "batch_size must be at least 1");
  if (split_ == Split::kTrain) {
    RngStream rng(options_.seed ^ kShuffleTag, options_.epoch);
    for (std::size_t i = order_.size(); i > 1; --i) std::swap(order_[i - 1], order_[rng.below(i)]);
  }
}

std::size_t BatchIterator::batch_count() const {
  return (order_.size() + options_.batch_size - 1) / options_.batch_size;
}

std::optional<Batch> BatchIterator::next() {
  const std::size_t pixels = options_.height * options_.width * 3;
  while (cursor_ < order_.size()) {
    const std::size_t end = std::min(cursor_ + options_.batch_size, order_.size());
    Batch batch;
    std::vector<float> images;
    std::vector<float> labels;
    images.reserve((end - cursor_) * pixels);
    for (; cursor_ < end; ++cursor_) {
      const Record* record = order_[cursor_];
      Tensor<float> image;
      try {
        image = load_and_resize(record->path, options_.height, options_.width);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnreadableImage) throw;
        std::cerr << "warning: skipping " << e.what() << '\n';
        skipped_.push_back(record->path);
        continue;
      }
      if (split_ == Split::kTrain && options_.augment) {
        const auto index = static_cast<std::uint64_t>(record - manifest_.records.data());
        RngStream rng(options_.seed ^ kAugmentTag, (static_cast<std::uint64_t>(options_.epoch) << 32) | index);
        image = augment(image, *options_.augment, rng);
      }
      images.insert(images.end(), image.data().begin(), image.data().end());
      labels.push_back(record->label == 0 ? 1.0f : 0.0f);
      labels.push_back(record->label == 1 ? 1.0f : 0.0f);
      batch.records.push_back(record);
    }
    if (batch.records.empty()) continue;
    const std::size_t b = batch.records.size();
    batch.images = Tensor<float>(Shape{b, options_.height, options_.width, 3}, std::move(images));
    batch.labels = Tensor<float>(Shape{b, 2}, std::move(labels));
    return batch;
  }
  return std::nullopt;
}

}  // namespace cnet::data
