#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "bisent/bdrnn.hpp"
#include "bisent/error.hpp"
#include "bisent/format.hpp"

namespace bisent {
namespace {

constexpr std::array<char, 8> kMagic = {'B', 'I', 'S', 'E', 'N', 'T', 'M', '\0'};
constexpr std::uint64_t kHeaderBytes = 8 + 4 + 9 * 8 + 4 * 8 + 8 + 8;

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(const char* p, std::size_t n) { bytes_.append(p, n); }
  const std::string& bytes() const { return bytes_; }

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string bytes_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw DataError("model file truncated");
  }
  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= std::uint64_t{static_cast<unsigned char>(bytes_[pos_ + i])} << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

template <typename T, typename F>
void for_each_entry(T& tensor, F&& f) {
  if constexpr (std::decay_t<T>::ColsAtCompileTime == 1) {
    for (Eigen::Index i = 0; i < tensor.size(); ++i) f(tensor[i]);
  } else {
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) f(tensor(r, c));
    }
  }
}

std::uint64_t parameter_count(const Hyperparams& hp) {
  const std::uint64_t e = hp.embed_dim, h = hp.hidden_dim, k = hp.num_classes;
  std::uint64_t n = hp.vocab_size * e;
  for (std::uint64_t layer = 0; layer < hp.num_recurrent_layers; ++layer) {
    const std::uint64_t in = layer == 0 ? e : 2 * h;
    n += 2 * (h * in + h * h + h);
  }
  return n + 2 * k * h + k;
}

}  // namespace

std::uint64_t model_file_size(const Hyperparams& hp) { return kHeaderBytes + 8 * parameter_count(hp) + 8; }

void write_model(const BdrnnModel& model, std::ostream& out) {
  const auto& hp = model.hp;
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u32(kModelFormatVersion);
  for (auto v : {hp.embed_dim, hp.hidden_dim, hp.num_recurrent_layers, hp.vocab_size, hp.num_classes, hp.batch_size,
                 hp.epochs, hp.seed, hp.max_seq_len}) {
    w.u64(v);
  }
  for (auto v : {hp.dropout_keep, hp.l2_coeff, hp.learning_rate, hp.grad_clip}) w.f64(v);
  w.u64(model.vocab_hash);
  w.u64(model.params.count());
  visit_tensors(model.params, [&](const auto& t, bool) { for_each_entry(t, [&](double v) { w.f64(v); }); });
  w.u64(fnv1a(w.bytes()));
  out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
  if (!out) throw DataError("model write failed");
}

BdrnnModel read_model(std::istream& in) {
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  Reader r(bytes);
  const auto magic = r.raw(kMagic.size());
  if (std::memcmp(magic.data(), kMagic.data(), kMagic.size()) != 0) throw DataError("not a model file (bad magic)");
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    throw DataError("model format version " + std::to_string(version) + " not supported");
  }
  BdrnnModel model;
  auto& hp = model.hp;
  for (auto* v : {&hp.embed_dim, &hp.hidden_dim, &hp.num_recurrent_layers, &hp.vocab_size, &hp.num_classes,
                  &hp.batch_size, &hp.epochs, &hp.seed, &hp.max_seq_len}) {
    *v = r.u64();
  }
  for (auto* v : {&hp.dropout_keep, &hp.l2_coeff, &hp.learning_rate, &hp.grad_clip}) *v = r.f64();
  model.vocab_hash = r.u64();
  const auto count = r.u64();
  try {
    validate(hp);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("corrupt model header: ") + e.what());
  }
  constexpr std::uint64_t kMaxParams = std::uint64_t{1} << 32;
  if (count != parameter_count(hp) || count > kMaxParams) throw DataError("corrupt model header: parameter count");
  if (bytes.size() != model_file_size(hp)) {
    throw DataError(bytes.size() < model_file_size(hp) ? "model file truncated" : "model file has trailing bytes");
  }
  const auto body = std::string_view(bytes).substr(0, bytes.size() - 8);
  if (fnv1a(body) != Reader(std::string_view(bytes).substr(bytes.size() - 8)).u64()) {
    throw DataError("model checksum mismatch");
  }
  model.params = Parameters::zeros(hp);
  visit_tensors(model.params, [&](auto& t, bool) { for_each_entry(t, [&](double& v) { v = r.f64(); }); });
  return model;
}

void save_model(const BdrnnModel& model, const std::filesystem::path& path) {
  std::ostringstream buffer;
  write_model(model, buffer);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write model " + path.string());
  const auto bytes = buffer.str();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

BdrnnModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  return read_model(in);
}

BdrnnModel load_model(const std::filesystem::path& path, const Vocabulary& vocab) {
  auto model = load_model(path);
  if (model.vocab_hash != vocab.hash()) throw DataError("vocabulary does not match the model (hash mismatch)");
  if (model.hp.vocab_size != vocab.size()) throw DataError("vocabulary size does not match the model");
  return model;
}

}  // namespace bisent
