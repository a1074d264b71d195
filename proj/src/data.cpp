#include "sadl/data.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/QR>

namespace sadl {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

constexpr char kDatasetMagic[4] = {'S', 'A', 'D', 'S'};
constexpr std::uint32_t kDatasetVersion = 1;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Whitespace-separated token cursor over the text format.
class Tokens {
 public:
  explicit Tokens(std::string_view text) : text_(text) {}

  std::string_view next(const char* what) {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ >= text_.size()) throw DataError(std::string("unexpected end of file reading ") + what);
    const auto start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  bool at_end() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return pos_ >= text_.size();
  }

  template <typename T>
  T number(const char* what) {
    const auto tok = next(what);
    T out{};
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw DataError(std::string("malformed ") + what + ": '" + std::string(tok) + "'");
    return out;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw DataError("truncated binary file: " + path);
  return value;
}

Dataset select_columns(const Dataset& data, const std::vector<Eigen::Index>& cols) {
  Dataset out;
  out.classes = data.classes;
  out.X.resize(data.X.rows(), static_cast<Eigen::Index>(cols.size()));
  out.labels.reserve(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.X.col(static_cast<Eigen::Index>(j)) = data.X.col(cols[j]);
    out.labels.push_back(data.labels[static_cast<std::size_t>(cols[j])]);
  }
  return out;
}

// Shuffles each class with a seeded generator and keeps `take(i, n_i)` of them
// for training. Both halves preserve the original column order.
template <typename TakeFn>
Split stratified_split(const Dataset& data, std::uint64_t seed, TakeFn take) {
  validate_dataset(data, false);
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(data.classes));
  for (std::size_t j = 0; j < data.labels.size(); ++j)
    members[static_cast<std::size_t>(data.labels[j])].push_back(static_cast<Eigen::Index>(j));

  std::mt19937_64 rng(seed);
  std::vector<bool> is_train(data.labels.size(), false);
  for (std::size_t i = 0; i < members.size(); ++i) {
    auto& idx = members[i];
    const int n_train = take(static_cast<int>(i), static_cast<int>(idx.size()));
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int t = 0; t < n_train; ++t) is_train[static_cast<std::size_t>(idx[t])] = true;
  }

  std::vector<Eigen::Index> train_cols, test_cols;
  for (std::size_t j = 0; j < is_train.size(); ++j)
    (is_train[j] ? train_cols : test_cols).push_back(static_cast<Eigen::Index>(j));
  return {select_columns(data, train_cols), select_columns(data, test_cols)};
}

}  // namespace

void validate_synth_spec(const SynthSpec& spec) {
  if (spec.classes < 1 || spec.subspace_dim < 1 || spec.ambient_dim < 1 ||
      spec.per_class_train < 1 || spec.per_class_test < 1)
    throw ConfigError("synthetic spec: all counts must be >= 1");
  if (spec.subspace_dim > spec.ambient_dim)
    throw ConfigError("synthetic spec: subspace_dim must be <= ambient_dim");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
    throw ConfigError("synthetic spec: noise_sigma must be finite and >= 0");
  if (!std::isfinite(spec.code_mean))
    throw ConfigError("synthetic spec: code_mean must be finite");
}

Dataset load_dataset(const std::string& path) {
  const std::string text = read_file(path);
  Tokens tok(text);
  if (tok.next("header") != "SADL-DS") throw DataError("malformed header in " + path);
  const auto m = tok.number<long long>("header m");
  const auto n = tok.number<long long>("header n");
  const auto c = tok.number<int>("header c");
  if (m < 1 || n < 0 || c < 1) throw DataError("malformed header in " + path);

  Dataset data;
  data.classes = c;
  data.labels.resize(static_cast<std::size_t>(n));
  for (auto& l : data.labels) l = tok.number<int>("label");
  data.X.resize(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) data.X(i, j) = tok.number<double>("value");
  if (!tok.at_end()) throw DataError("dim mismatch: trailing data in " + path);
  validate_dataset(data, false);
  return data;
}

void save_dataset(const Dataset& data, const std::string& path) {
  if (path.empty()) throw DataError("empty output path");
  validate_dataset(data, false);
  std::string out = "SADL-DS " + std::to_string(data.X.rows()) + ' ' +
                    std::to_string(data.X.cols()) + ' ' + std::to_string(data.classes) + '\n';
  for (std::size_t j = 0; j < data.labels.size(); ++j) {
    if (j) out += ' ';
    out += std::to_string(data.labels[j]);
  }
  out += '\n';
  char buf[32];
  for (Eigen::Index j = 0; j < data.X.cols(); ++j) {
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
      if (i) out += ' ';
      auto res = std::to_chars(buf, buf + sizeof(buf), data.X(i, j));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path);
  f << out;
  if (!f) throw DataError("write failed: " + path);
}

Dataset load_dataset_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kDatasetMagic, 4) != 0)
    throw DataError("malformed header in " + path);
  if (get<std::uint32_t>(in, path) != kDatasetVersion)
    throw DataError("unsupported dataset version in " + path);
  const auto m = get<std::uint32_t>(in, path);
  const auto n = get<std::uint32_t>(in, path);
  const auto c = get<std::uint32_t>(in, path);
  Dataset data;
  data.classes = static_cast<int>(c);
  data.labels.resize(n);
  for (auto& l : data.labels) l = static_cast<int>(get<std::uint32_t>(in, path));
  data.X.resize(m, n);
  if (!in.read(reinterpret_cast<char*>(data.X.data()),
               static_cast<std::streamsize>(sizeof(double) * m * n)))
    throw DataError("truncated binary file: " + path);
  if (in.peek() != std::char_traits<char>::eof())
    throw DataError("dim mismatch: trailing data in " + path);
  validate_dataset(data, false);
  return data;
}

void save_dataset_binary(const Dataset& data, const std::string& path) {
  if (path.empty()) throw DataError("empty output path");
  validate_dataset(data, false);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  out.write(kDatasetMagic, 4);
  put<std::uint32_t>(out, kDatasetVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.X.rows()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.X.cols()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(data.classes));
  for (int l : data.labels) put<std::uint32_t>(out, static_cast<std::uint32_t>(l));
  out.write(reinterpret_cast<const char*>(data.X.data()),
            static_cast<std::streamsize>(sizeof(double) * data.X.size()));
  if (!out) throw DataError("write failed: " + path);
}

Dataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("file not found: " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kDatasetMagic, 4) == 0)
    return load_dataset_binary(path);
  return load_dataset(path);
}

Split split_fraction(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ConfigError("train fraction must lie in (0, 1]");
  validate_dataset(data, false);

  // Largest-remainder allocation so the overall train size is
  // round(fraction * n) while every class keeps at least one training sample.
  const auto counts = class_counts(data.labels, data.classes);
  std::vector<int> alloc(counts.size());
  std::vector<double> remainder(counts.size());
  int assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double exact = train_fraction * counts[i];
    alloc[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - alloc[i];
    assigned += alloc[i];
  }
  int target = static_cast<int>(std::lround(train_fraction * static_cast<double>(data.labels.size())));
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    if (alloc[order[k]] < counts[order[k]]) {
      ++alloc[order[k]];
      ++assigned;
    }
  }
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (alloc[i] < 1)
      throw DataError("class " + std::to_string(i) + " is too small for the requested split");

  return stratified_split(data, seed, [&](int cls, int) { return alloc[static_cast<std::size_t>(cls)]; });
}

Split split_per_class(const Dataset& data, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw ConfigError("per-class training count must be >= 1");
  return stratified_split(data, seed, [&](int cls, int count) {
    if (count < per_class)
      throw DataError("class " + std::to_string(cls) + " is too small: " + std::to_string(count) +
                      " samples, " + std::to_string(per_class) + " requested");
    return per_class;
  });
}

Split generate_synthetic(const SynthSpec& spec) {
  validate_synth_spec(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
    return M;
  };

  const Eigen::Index m = spec.ambient_dim, d = spec.subspace_dim;
  std::vector<Matrix> bases;
  for (int i = 0; i < spec.classes; ++i) {
    Eigen::HouseholderQR<Matrix> qr(gaussian(m, d));
    bases.push_back(qr.householderQ() * Matrix::Identity(m, d));
  }

  auto draw = [&](int per_class) {
    Dataset out;
    out.classes = spec.classes;
    out.X.resize(m, static_cast<Eigen::Index>(per_class) * spec.classes);
    Eigen::Index col = 0;
    for (int i = 0; i < spec.classes; ++i) {
      for (int t = 0; t < per_class; ++t, ++col) {
        Vector z = gaussian(d, 1);
        z.array() += spec.code_mean;
        Vector x = bases[static_cast<std::size_t>(i)] * z;
        x += spec.noise_sigma * gaussian(m, 1);
        out.X.col(col) = x / x.norm();
        out.labels.push_back(i);
      }
    }
    return out;
  };

  Split split;
  split.train = draw(spec.per_class_train);
  split.test = draw(spec.per_class_test);
  return split;
}

}  // namespace sadl
