#include "sadl/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sadl {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

constexpr char kMagic[4] = {'S', 'A', 'D', 'L'};
constexpr double kUnitRowTolerance = 1e-12;

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_row_major(std::string& out, const Matrix& M) {
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j) put<double>(out, M(i, j));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (bytes_.size() - pos_ < sizeof(T)) throw DataError("truncated model file");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  Matrix row_major(std::uint32_t rows, std::uint32_t cols) {
    Matrix M(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) M(i, j) = get<double>();
    return M;
  }

  std::string text(std::uint32_t length) {
    if (bytes_.size() - pos_ < length) throw DataError("truncated model file");
    std::string out = bytes_.substr(pos_, length);
    pos_ += length;
    return out;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const Model& model) {
  validate_model(model);
  std::string out(kMagic, 4);
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.Omega.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.Omega.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.Q.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.classes));
  put_row_major(out, model.Omega);
  put_row_major(out, model.Q);
  put_row_major(out, model.W);
  const std::string cfg = format_config(model.config);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out += cfg;
  return out;
}

Model deserialize_model(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw DataError("not a model file (bad magic)");
  Reader in(bytes);
  in.text(4);
  if (in.get<std::uint32_t>() != kModelFormatVersion)
    throw DataError("unsupported model format version");
  const auto r = in.get<std::uint32_t>();
  const auto m = in.get<std::uint32_t>();
  const auto s = in.get<std::uint32_t>();
  const auto c = in.get<std::uint32_t>();

  Model model;
  model.classes = static_cast<int>(c);
  model.Omega = in.row_major(r, m);
  model.Q = in.row_major(s, r);
  model.W = in.row_major(c, s);
  const auto length = in.get<std::uint32_t>();
  model.config = parse_config(in.text(length));
  if (!in.done()) throw DataError("trailing bytes in model file");

  validate_model(model);
  if (!model.Omega.allFinite() || !model.Q.allFinite() || !model.W.allFinite())
    throw DataError("model contains non-finite entries");
  for (Eigen::Index i = 0; i < model.Omega.rows(); ++i)
    if (std::abs(model.Omega.row(i).norm() - 1.0) > kUnitRowTolerance)
      throw DataError("model dictionary row " + std::to_string(i) + " is not unit norm");
  return model;
}

void save_model(const Model& model, const std::string& path) {
  if (path.empty()) throw DataError("empty output path");
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace sadl
