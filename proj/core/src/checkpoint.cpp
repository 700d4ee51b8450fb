#include "cnet/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "cnet/error.hpp"

namespace cnet {
namespace {

constexpr char kMagic[4] = {'C', 'N', 'E', 'T'};
constexpr std::uint8_t kDtypeF32 = 1;

class Writer {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    buffer_.insert(buffer_.end(), p, p + size);
  }
  void u8(std::uint8_t v) { buffer_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buffer_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void string(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void tensor(const std::string& name, const Tensor<float>& t) {
    string(name);
    u8(kDtypeF32);
    u32(static_cast<std::uint32_t>(t.shape().rank()));
    for (std::size_t d : t.shape().dims()) u32(static_cast<std::uint32_t>(d));
    for (float v : t.data()) f32(v);
  }
  std::vector<std::uint8_t>& buffer() { return buffer_; }

 private:
  std::vector<std::uint8_t> buffer_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string string() {
    const std::uint32_t size = u32();
    need(size);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), size);
    pos_ += size;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw Error(ErrorCode::kCorruptChecksum, "checkpoint ends early");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(
      ::crc32(::crc32(0L, Z_NULL, 0), data.data(), static_cast<uInt>(data.size())));
}

std::map<std::string, std::string> parse_text(const std::string& text) {
  std::map<std::string, std::string> values;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kCorruptChecksum, "bad config line " + line);
    values[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return values;
}

void copy_into(Tensor<float>& target, const Tensor<float>& source, const std::string& name) {
  if (target.shape() != source.shape()) {
    throw Error(ErrorCode::kConfigMismatch, "tensor " + name + " has shape " +
                                                source.shape().to_string() + ", graph expects " +
                                                target.shape().to_string());
  }
  std::ranges::copy(source.data(), target.mutable_data().begin());
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CNetModel& model,
                     const AdamState<float>& optimizer,
                     const std::map<std::string, std::string>& metadata) {
  std::map<std::string, std::string> text_values = model.config().to_map();
  const auto& h = optimizer.hyper;
  text_values["adam.step_count"] = std::to_string(optimizer.step_count);
  text_values["adam.learning_rate"] = format_double(h.learning_rate);
  text_values["adam.beta1"] = format_double(h.beta1);
  text_values["adam.beta2"] = format_double(h.beta2);
  text_values["adam.eps_hat"] = format_double(h.eps_hat);
  for (const auto& [key, value] : metadata) {
    if (value.find('\n') != std::string::npos) {
      throw Error(ErrorCode::kIoError, "metadata value for " + key + " spans lines");
    }
    text_values["meta." + key] = value;
  }
  std::string text;
  for (const auto& [key, value] : text_values) text += key + "=" + value + "\n";

  const auto params = model.parameters();
  const bool has_moments = optimizer.first_moment.size() == params.size() &&
                           optimizer.second_moment.size() == params.size();

  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.string(text);
  w.u32(static_cast<std::uint32_t>(params.size() * (has_moments ? 3 : 1)));
  for (const auto& p : params) w.tensor(p.name, p.value);
  if (has_moments) {
    for (std::size_t i = 0; i < params.size(); ++i) w.tensor("adam.m." + params[i].name, optimizer.first_moment[i]);
    for (std::size_t i = 0; i < params.size(); ++i) w.tensor("adam.v." + params[i].name, optimizer.second_moment[i]);
  }
  w.u32(crc32_of(w.buffer()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(w.buffer().data()),
            static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const CNetConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 4 + 4 + 4) throw Error(ErrorCode::kCorruptChecksum, path.string() + " is truncated");
  const std::span<const std::uint8_t> body(bytes.data(), bytes.size() - 4);
  Reader trailer(std::span<const std::uint8_t>(bytes.data() + body.size(), 4));
  if (trailer.u32() != crc32_of(body)) {
    throw Error(ErrorCode::kCorruptChecksum, path.string() + " fails its CRC-32 check");
  }

  Reader r(body);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(ErrorCode::kFormatVersionMismatch, path.string() + " is not a checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kFormatVersionMismatch, "checkpoint version " + std::to_string(version) +
                                                       ", expected " + std::to_string(kCheckpointVersion));
  }

  std::map<std::string, std::string> network_values;
  Checkpoint result;
  AdamHyperparameters hyper;
  std::uint64_t step_count = 0;
  for (const auto& [key, value] : parse_text(r.string())) {
    if (key.starts_with("meta.")) {
      result.metadata[key.substr(5)] = value;
    } else if (key == "adam.step_count") {
      step_count = parse_size(value, key);
    } else if (key == "adam.learning_rate") {
      hyper.learning_rate = parse_double(value, key);
    } else if (key == "adam.beta1") {
      hyper.beta1 = parse_double(value, key);
    } else if (key == "adam.beta2") {
      hyper.beta2 = parse_double(value, key);
    } else if (key == "adam.eps_hat") {
      hyper.eps_hat = parse_double(value, key);
    } else {
      network_values[key] = value;
    }
  }
  result.config = CNetConfig::from_map(network_values);
  if (expected != nullptr && !(*expected == result.config)) {
    throw Error(ErrorCode::kConfigMismatch, "checkpoint network config differs:\n" +
                                                result.config.to_text() + "requested:\n" +
                                                expected->to_text());
  }

  std::map<std::string, Tensor<float>> tensors;
  const std::uint32_t count = r.u32();
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = r.string();
    if (r.u8() != kDtypeF32) throw Error(ErrorCode::kFormatVersionMismatch, "unsupported dtype for " + name);
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = r.u32();
    Shape shape(std::move(dims));
    std::vector<float> values(shape.numel());
    for (float& v : values) v = r.f32();
    tensors.emplace(std::move(name), Tensor<float>(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw Error(ErrorCode::kCorruptChecksum, "trailing bytes in " + path.string());

  result.model = build_cnet(result.config, 0);
  auto params = result.model.parameters();
  if (tensors.size() != params.size() && tensors.size() != 3 * params.size()) {
    throw Error(ErrorCode::kConfigMismatch, "checkpoint holds " + std::to_string(tensors.size()) +
                                                " tensors for a graph of " + std::to_string(params.size()));
  }
  result.optimizer = AdamState<float>::for_parameters(params, hyper);
  result.optimizer.step_count = step_count;
  const bool has_moments = tensors.size() == 3 * params.size();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto lookup = [&](const std::string& name) -> const Tensor<float>& {
      auto it = tensors.find(name);
      if (it == tensors.end()) throw Error(ErrorCode::kConfigMismatch, "checkpoint lacks tensor " + name);
      return it->second;
    };
    copy_into(params[i].value, lookup(params[i].name), params[i].name);
    if (has_moments) {
      copy_into(result.optimizer.first_moment[i], lookup("adam.m." + params[i].name), params[i].name);
      copy_into(result.optimizer.second_moment[i], lookup("adam.v." + params[i].name), params[i].name);
    }
  }
  return result;
}

}  // namespace cnet
