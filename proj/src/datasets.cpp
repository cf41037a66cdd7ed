#include "dpc/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dpc/model.hpp"
#include "dpc/numerics.hpp"

namespace dpc {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& text, std::size_t line_no) {
  if (text.empty()) throw std::runtime_error("malformed row " + std::to_string(line_no) + ": empty field");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || !std::isfinite(v))
    throw std::runtime_error("malformed row " + std::to_string(line_no) + ": bad number '" + text + "'");
  return v;
}

bool is_missing(double v, const HelocOptions& options) {
  return std::find(options.missing_codes.begin(), options.missing_codes.end(), v) != options.missing_codes.end();
}

TabularDataset take_rows(const TabularDataset& data, const std::vector<int>& rows) {
  TabularDataset out;
  out.feature_names = data.feature_names;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.features.cols());
  out.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = data.features.row(rows[r]);
    out.labels[static_cast<Eigen::Index>(r)] = data.labels[rows[r]];
  }
  return out;
}

template <typename T>
void put(std::string& buffer, const T& value) {
  buffer.append(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(const std::string& buffer, std::size_t& offset) {
  if (offset + sizeof(T) > buffer.size()) throw std::runtime_error("dataset cache truncated");
  T value;
  std::memcpy(&value, buffer.data() + offset, sizeof(T));
  offset += sizeof(T);
  return value;
}

constexpr char kCacheMagic[8] = {'D', 'P', 'C', 'D', 'A', 'T', 'A', '1'};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

std::uint64_t dataset_hash(const TabularDataset& data) {
  std::uint64_t h = fnv1a("dataset");
  const auto feed = [&h](const void* p, std::size_t n) {
    h = fnv1a(std::string_view(static_cast<const char*>(p), n), h);
  };
  const std::int64_t shape[2] = {data.features.rows(), data.features.cols()};
  feed(shape, sizeof(shape));
  feed(data.features.data(), sizeof(double) * static_cast<std::size_t>(data.features.size()));
  feed(data.labels.data(), sizeof(int) * static_cast<std::size_t>(data.labels.size()));
  return h;
}

TabularDataset read_heloc_table(const std::filesystem::path& path, const HelocOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file " + path.string());
  const auto header = split_line(line, options.delimiter);
  const auto label_it = std::find(header.begin(), header.end(), options.label_column);
  if (label_it == header.end()) throw std::runtime_error("missing label column " + options.label_column);
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  TabularDataset out;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_col) out.feature_names.push_back(header[c]);
  const std::size_t d = out.feature_names.size();

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_line(line, options.delimiter);
    if (fields.size() != header.size())
      throw std::runtime_error("malformed row " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields");
    const auto& label = fields[label_col];
    if (label == options.positive_label || label == "1") {
      labels.push_back(1);
    } else if (label == options.negative_label || label == "0") {
      labels.push_back(0);
    } else {
      throw std::runtime_error("unknown label '" + label + "' on row " + std::to_string(line_no));
    }
    for (std::size_t c = 0; c < fields.size(); ++c)
      if (c != label_col) values.push_back(parse_number(fields[c], line_no));
  }

  const auto n = static_cast<Eigen::Index>(labels.size());
  out.features.resize(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c)
      out.features(r, static_cast<Eigen::Index>(c)) = values[static_cast<std::size_t>(r) * d + c];
  out.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), n);
  return out;
}

TabularDataset clean_heloc(const TabularDataset& raw, const HelocOptions& options) {
  const int n = raw.rows();
  const int d = raw.dim();
  std::vector<int> missing(static_cast<std::size_t>(d), 0);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < n; ++r) missing[static_cast<std::size_t>(c)] += is_missing(raw.features(r, c), options);

  std::vector<int> by_rate(static_cast<std::size_t>(d));
  std::iota(by_rate.begin(), by_rate.end(), 0);
  std::stable_sort(by_rate.begin(), by_rate.end(),
                   [&](int a, int b) { return missing[static_cast<std::size_t>(a)] > missing[static_cast<std::size_t>(b)]; });
  std::vector<bool> dropped(static_cast<std::size_t>(d), false);
  for (int k = 0; k < std::min(options.drop_features, d); ++k) {
    const int c = by_rate[static_cast<std::size_t>(k)];
    if (missing[static_cast<std::size_t>(c)] == 0) break;
    dropped[static_cast<std::size_t>(c)] = true;
  }

  std::vector<int> keep_cols;
  for (int c = 0; c < d; ++c)
    if (!dropped[static_cast<std::size_t>(c)]) keep_cols.push_back(c);
  std::vector<int> keep_rows;
  for (int r = 0; r < n; ++r) {
    bool complete = true;
    for (int c : keep_cols) complete = complete && !is_missing(raw.features(r, c), options);
    if (complete) keep_rows.push_back(r);
  }

  TabularDataset out;
  for (int c : keep_cols) out.feature_names.push_back(raw.feature_names[static_cast<std::size_t>(c)]);
  out.features.resize(static_cast<Eigen::Index>(keep_rows.size()), static_cast<Eigen::Index>(keep_cols.size()));
  out.labels.resize(static_cast<Eigen::Index>(keep_rows.size()));
  for (std::size_t r = 0; r < keep_rows.size(); ++r) {
    for (std::size_t c = 0; c < keep_cols.size(); ++c)
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = raw.features(keep_rows[r], keep_cols[c]);
    out.labels[static_cast<Eigen::Index>(r)] = raw.labels[keep_rows[r]];
  }
  return out;
}

TabularDataset load_heloc(const std::filesystem::path& path, const HelocOptions& options) {
  return clean_heloc(read_heloc_table(path, options), options);
}

void write_heloc_standin(const std::filesystem::path& path, std::uint64_t seed) {
  struct Column {
    const char* name;
    double mean, scale, loading, floor;
  };
  // Loading is the correlation with the latent risk (positive means riskier).
  static const Column columns[] = {
      {"ExternalRiskEstimate", 72, 10, -0.75, 30},
      {"MSinceOldestTradeOpen", 200, 95, -0.35, 2},
      {"MSinceMostRecentTradeOpen", 9, 12, -0.05, 0},
      {"AverageMInFile", 78, 33, -0.4, 4},
      {"NumSatisfactoryTrades", 21, 11, -0.2, 0},
      {"NumTrades60Ever2DerogPubRec", 0.6, 1.2, 0.3, 0},
      {"NumTrades90Ever2DerogPubRec", 0.4, 1.0, 0.28, 0},
      {"PercentTradesNeverDelq", 92, 11, -0.45, 0},
      {"MSinceMostRecentDelq", 22, 20, -0.2, 0},
      {"MaxDelq2PublicRecLast12M", 5.8, 1.6, -0.35, 0},
      {"MaxDelqEver", 6.4, 1.8, -0.35, 2},
      {"NumTotalTrades", 23, 13, -0.05, 0},
      {"NumTradesOpeninLast12M", 1.9, 1.9, 0.15, 0},
      {"PercentInstallTrades", 34, 17, 0.15, 0},
      {"MSinceMostRecentInqexcl7days", 2.5, 4.5, -0.3, 0},
      {"NumInqLast6M", 1.5, 2.2, 0.3, 0},
      {"NumInqLast6Mexcl7days", 1.4, 2.1, 0.28, 0},
      {"NetFractionRevolvingBurden", 35, 29, 0.5, 0},
      {"NetFractionInstallBurden", 68, 24, 0.1, 0},
      {"NumRevolvingTradesWBalance", 4.1, 3.0, 0.15, 0},
      {"NumInstallTradesWBalance", 2.5, 1.8, 0.05, 0},
      {"NumBank2NatlTradesWHighUtilization", 1.1, 1.6, 0.4, 0},
      {"PercentTradesWBalance", 66, 22, 0.35, 0},
  };
  constexpr int kRows = 10459;
  constexpr int kBlank = 588;
  constexpr int kIncomplete = 1581;
  constexpr int kColumns = static_cast<int>(sizeof(columns) / sizeof(columns[0]));
  const int delq = 8, inquiry = 14, install_burden = 18;
  const int incomplete_cols[] = {19, 20, 21, 22};

  const RandomStream root(seed);
  RandomCursor shuffle(root.child("rows"));
  const std::vector<int> perm = shuffle.sample_without_replacement(kRows, kRows);
  std::vector<int> status(kRows, 0);  // 1 blank, 2 + k missing in incomplete column k
  for (int i = 0; i < kBlank; ++i) status[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = 1;
  for (int i = 0; i < kIncomplete; ++i)
    status[static_cast<std::size_t>(perm[static_cast<std::size_t>(kBlank + i)])] = 2 + i % 4;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "RiskPerformance";
  for (const auto& c : columns) out << ',' << c.name;
  out << '\n';
  for (int r = 0; r < kRows; ++r) {
    const RandomStream row = root.child("row").child(static_cast<std::uint64_t>(r));
    const double z = row.normal(0);
    std::vector<double> values(kColumns);
    for (int c = 0; c < kColumns; ++c) {
      const auto& col = columns[c];
      const double e = row.normal(static_cast<std::uint64_t>(c + 1));
      const double latent = col.loading * z + std::sqrt(1.0 - col.loading * col.loading) * e;
      values[static_cast<std::size_t>(c)] = std::max(col.floor, std::round(col.mean + col.scale * latent));
    }
    // Risk is mostly linear in the latent factor, with a saturating
    // revolving-burden effect for the nonlinear model to pick up.
    const double burden = (values[17] - 35.0) / 29.0;
    const double logit = -0.15 + 1.35 * z + 0.35 * std::tanh(2.0 * burden) - 0.2 * burden * burden;
    const bool bad = row.uniform(1000) < logistic(logit);

    const double u = row.uniform(1001);
    const bool no_delinquency = u < 0.46;
    if (no_delinquency) values[static_cast<std::size_t>(delq)] = -7;
    if (row.uniform(1002) < 0.17) values[static_cast<std::size_t>(inquiry)] = -7;
    else if (row.uniform(1003) < 0.03) values[static_cast<std::size_t>(inquiry)] = -8;
    if (row.uniform(1004) < 0.33) values[static_cast<std::size_t>(install_burden)] = -8;

    const int s = status[static_cast<std::size_t>(r)];
    if (s == 1) std::fill(values.begin(), values.end(), -9.0);
    if (s >= 2) values[static_cast<std::size_t>(incomplete_cols[s - 2])] = -8;

    out << (bad ? "Bad" : "Good");
    for (double v : values) out << ',' << v;
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Standardization fit_standardization(const Eigen::MatrixXd& features) {
  if (features.rows() == 0) throw std::invalid_argument("fit_standardization: no rows");
  Standardization s;
  s.mean = features.colwise().mean();
  s.std = ((features.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(features.rows()))
              .sqrt()
              .matrix();
  for (Eigen::Index c = 0; c < s.std.size(); ++c)
    if (!(s.std[c] > 1e-12)) s.std[c] = 1.0;
  return s;
}

Eigen::MatrixXd standardize(const Eigen::MatrixXd& features, const Standardization& s) {
  if (features.cols() != s.mean.size()) throw std::invalid_argument("standardize: dimension mismatch");
  return (features.rowwise() - s.mean).array().rowwise() / s.std.array();
}

Eigen::MatrixXd unstandardize(const Eigen::MatrixXd& features, const Standardization& s) {
  if (features.cols() != s.mean.size()) throw std::invalid_argument("unstandardize: dimension mismatch");
  return (features.array().rowwise() * s.std.array()).matrix().rowwise() + s.mean;
}

DatasetSplits split_and_standardize(const TabularDataset& data, const SplitSpec& spec) {
  const int n = data.rows();
  if (n < 10) throw std::invalid_argument("split_and_standardize: need at least 10 samples");
  if (!(spec.train > 0.0) || !(spec.validation > 0.0) || spec.train + spec.validation >= 1.0)
    throw std::invalid_argument("split_and_standardize: invalid ratios");

  DatasetSplits out;
  const RandomStream root = RandomStream(spec.seed).child("split");
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<int> members;
    for (int r = 0; r < n; ++r)
      if (data.labels[r] == cls) members.push_back(r);
    const int m = static_cast<int>(members.size());
    const int n_train = static_cast<int>(std::lround(spec.train * m));
    const int n_val = static_cast<int>(std::lround(spec.validation * m));
    if (n_train < 1 || n_val < 1 || m - n_train - n_val < 1)
      throw std::invalid_argument("split_and_standardize: a split receives no samples of class " +
                                  std::to_string(cls));
    RandomCursor cursor(root.child(static_cast<std::uint64_t>(cls)));
    const auto order = cursor.sample_without_replacement(m, m);
    for (int k = 0; k < m; ++k) {
      const int row = members[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
      (k < n_train ? out.train_index : k < n_train + n_val ? out.validation_index : out.test_index).push_back(row);
    }
  }
  for (auto* idx : {&out.train_index, &out.validation_index, &out.test_index}) std::sort(idx->begin(), idx->end());

  out.train = take_rows(data, out.train_index);
  out.validation = take_rows(data, out.validation_index);
  out.test = take_rows(data, out.test_index);
  const Standardization s = fit_standardization(out.train.features);
  for (auto* split : {&out.train, &out.validation, &out.test}) {
    split->features = standardize(split->features, s);
    split->standardization = s;
  }
  return out;
}

SyntheticLinear synth_linear(int n, int d, std::uint64_t seed, double noise) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_linear: n and d must be positive");
  if (!(noise >= 0.0)) throw std::invalid_argument("synth_linear: noise must be >= 0");
  const RandomStream root(seed);
  SyntheticLinear out;
  out.weights = gaussian_vector(root.child("weights"), d, 1.0);
  const RandomStream features = root.child("features");
  const RandomStream labels = root.child("labels");
  out.data.features.resize(n, d);
  out.data.labels.resize(n);
  for (int i = 0; i < d; ++i) out.data.feature_names.push_back("x" + std::to_string(i));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) out.data.features(r, c) = features.normal(static_cast<std::uint64_t>(r) * d + c);
    const double z = out.data.features.row(r).dot(out.weights);
    out.data.labels[r] = noise == 0.0 ? (z > 0.0) : (labels.uniform(static_cast<std::uint64_t>(r)) < logistic(z / noise));
  }
  return out;
}

ImageDataset synth_blob_images(int n, int side, std::uint64_t seed, const BlobImageOptions& options) {
  if (n < 2 || side < 4 || side % 4 != 0)
    throw std::invalid_argument("synth_blob_images: need n >= 2 and a side divisible by 4");
  ImageDataset out;
  out.shape = {side, side};
  out.contrast = options.contrast;
  const int cell = side / 4;
  out.blob_row = cell / 2;
  out.blob_col = cell + cell / 2;
  const RandomStream root = RandomStream(seed).child("blobs");
  const int pixels = out.shape.pixels();
  out.data.features.resize(n, pixels);
  out.data.labels.resize(n);
  for (int p = 0; p < pixels; ++p) out.data.feature_names.push_back("p" + std::to_string(p));
  for (int i = 0; i < n; ++i) {
    const RandomStream image = root.child(static_cast<std::uint64_t>(i));
    const int label = i % 2;
    out.data.labels[i] = label;
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        const int p = out.shape.index(r, c);
        double v = options.background_sigma * image.normal(static_cast<std::uint64_t>(p));
        if (label == 1) {
          const double dr = r - out.blob_row, dc = c - out.blob_col;
          v += options.contrast * std::exp(-(dr * dr + dc * dc) / (2.0 * options.blob_sigma * options.blob_sigma));
        }
        out.data.features(i, p) = v;
      }
    }
  }
  return out;
}

void save_dataset_cache(const std::filesystem::path& path, const TabularDataset& data) {
  std::string buffer(kCacheMagic, sizeof(kCacheMagic));
  put<std::uint64_t>(buffer, static_cast<std::uint64_t>(data.features.rows()));
  put<std::uint64_t>(buffer, static_cast<std::uint64_t>(data.features.cols()));
  for (const auto& name : data.feature_names) {
    put<std::uint32_t>(buffer, static_cast<std::uint32_t>(name.size()));
    buffer += name;
  }
  for (Eigen::Index c = 0; c < data.features.cols(); ++c)
    for (Eigen::Index r = 0; r < data.features.rows(); ++r) put<double>(buffer, data.features(r, c));
  for (Eigen::Index r = 0; r < data.labels.size(); ++r) put<std::int32_t>(buffer, data.labels[r]);
  put<std::uint64_t>(buffer, fnv1a(buffer));

  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

TabularDataset load_dataset_cache(const std::filesystem::path& path) {
  const std::string buffer = read_file(path);
  if (buffer.size() < sizeof(kCacheMagic) + 8 || std::memcmp(buffer.data(), kCacheMagic, sizeof(kCacheMagic)) != 0)
    throw std::runtime_error("not a dataset cache: " + path.string());
  std::size_t tail = buffer.size() - 8;
  std::size_t t = tail;
  const auto stored = get<std::uint64_t>(buffer, t);
  if (stored != fnv1a(std::string_view(buffer).substr(0, tail)))
    throw std::runtime_error("dataset cache checksum mismatch: " + path.string());

  std::size_t offset = sizeof(kCacheMagic);
  const auto n = static_cast<Eigen::Index>(get<std::uint64_t>(buffer, offset));
  const auto d = static_cast<Eigen::Index>(get<std::uint64_t>(buffer, offset));
  TabularDataset out;
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto len = get<std::uint32_t>(buffer, offset);
    if (offset + len > tail) throw std::runtime_error("dataset cache truncated");
    out.feature_names.emplace_back(buffer.substr(offset, len));
    offset += len;
  }
  out.features.resize(n, d);
  for (Eigen::Index c = 0; c < d; ++c)
    for (Eigen::Index r = 0; r < n; ++r) out.features(r, c) = get<double>(buffer, offset);
  out.labels.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) out.labels[r] = get<std::int32_t>(buffer, offset);
  if (offset != tail) throw std::runtime_error("dataset cache has trailing bytes");
  return out;
}

TabularDataset load_heloc_cached(const std::filesystem::path& csv, const std::filesystem::path& cache_dir,
                                 const HelocOptions& options) {
  std::ostringstream key;
  key << options.label_column << '|' << options.positive_label << '|' << options.negative_label << '|'
      << options.drop_features << '|' << options.delimiter;
  for (double c : options.missing_codes) key << '|' << c;
  const std::uint64_t h = fnv1a(key.str(), fnv1a(read_file(csv)));
  char name[40];
  std::snprintf(name, sizeof(name), "heloc-%016llx.bin", static_cast<unsigned long long>(h));
  const auto entry = cache_dir / name;
  if (std::filesystem::exists(entry)) {
    try {
      return load_dataset_cache(entry);
    } catch (const std::exception& e) {
      std::cerr << "warning: " << e.what() << "; rebuilding\n";
    }
  }
  TabularDataset data = load_heloc(csv, options);
  save_dataset_cache(entry, data);
  return data;
}

}  // namespace dpc
