#include "lbvs/model_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

#include "lbvs/error.hpp"
#include "lbvs/report.hpp"

namespace lbvs {

namespace {

template <typename T>
T to_little(T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  if constexpr (std::endian::native == std::endian::little) {
    return value;
  } else {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    std::memcpy(&value, bytes, sizeof(T));
    return value;
  }
}

class Writer {
 public:
  template <typename T>
  void put(T value) {
    value = to_little(value);
    const auto* p = reinterpret_cast<const char*>(&value);
    out_.append(p, sizeof(T));
  }
  void raw(const char* data, std::size_t n) { out_.append(data, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw Error(ErrorCode::kCorruptModel, "model file truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(value);
  }
  void expect(const char* data, std::size_t n) {
    if (pos_ + n > bytes_.size() || std::memcmp(bytes_.data() + pos_, data, n) != 0) {
      throw Error(ErrorCode::kCorruptModel, "not a model file (bad magic)");
    }
    pos_ += n;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_model(const ModelFile& model) {
  model.net.check_finite();
  Writer w;
  w.raw(kModelMagic, sizeof(kModelMagic));
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint32_t>(InteractionNet::kLayerCount);
  for (int d : InteractionNet::kLayerSizes) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
  for (const Vec2* v : {&model.net.input_offset, &model.net.input_scale, &model.net.output_scale}) {
    w.put<double>(v->x());
    w.put<double>(v->y());
  }
  w.put<std::uint64_t>(model.camera_fingerprint);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.hull.vertices.size()));
  for (const Vec2& p : model.hull.vertices) {
    w.put<double>(p.x());
    w.put<double>(p.y());
  }
  const Eigen::VectorXd& params = model.net.parameters();
  w.put<std::uint64_t>(static_cast<std::uint64_t>(params.size()));
  for (Eigen::Index i = 0; i < params.size(); ++i) w.put<double>(params[i]);
  return w.take();
}

ModelFile decode_model(const std::string& bytes) {
  Reader r(bytes);
  r.expect(kModelMagic, sizeof(kModelMagic));
  const auto version = r.get<std::uint32_t>();
  if (version != kModelVersion) {
    throw Error(ErrorCode::kCorruptModel, "unsupported model version " + std::to_string(version));
  }
  if (r.get<std::uint32_t>() != static_cast<std::uint32_t>(InteractionNet::kLayerCount)) {
    throw Error(ErrorCode::kCorruptModel, "model layer count does not match 2-64-64-64-4");
  }
  for (int d : InteractionNet::kLayerSizes) {
    if (r.get<std::uint32_t>() != static_cast<std::uint32_t>(d)) {
      throw Error(ErrorCode::kCorruptModel, "model architecture does not match 2-64-64-64-4");
    }
  }
  ModelFile m;
  for (Vec2* v : {&m.net.input_offset, &m.net.input_scale, &m.net.output_scale}) {
    const double x = r.get<double>();
    const double y = r.get<double>();
    *v = Vec2(x, y);
  }
  m.camera_fingerprint = r.get<std::uint64_t>();
  const auto hull_n = r.get<std::uint32_t>();
  if (hull_n > bytes.size() / 16) throw Error(ErrorCode::kCorruptModel, "model file truncated");
  for (std::uint32_t i = 0; i < hull_n; ++i) {
    const double x = r.get<double>();
    const double y = r.get<double>();
    m.hull.vertices.emplace_back(x, y);
  }
  const auto n = r.get<std::uint64_t>();
  if (n != InteractionNet::parameter_count()) {
    throw Error(ErrorCode::kCorruptModel, "model parameter count does not match the architecture");
  }
  Eigen::VectorXd& params = m.net.parameters();
  for (std::uint64_t i = 0; i < n; ++i) params[static_cast<Eigen::Index>(i)] = r.get<double>();
  if (!r.done()) throw Error(ErrorCode::kCorruptModel, "trailing bytes after model");
  m.net.check_finite();
  return m;
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  write_text_file(path, encode_model(model));
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open model " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

}  // namespace lbvs
