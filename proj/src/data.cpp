#include "fairdef/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "fairdef/error.hpp"
#include "fairdef/log.hpp"

namespace fairdef {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

LogSink& sink_slot() {
  static LogSink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one CSV record. Double quotes group commas; "" inside quotes is a literal quote.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  cells.emplace_back(trim(cur));
  return cells;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool is_missing(std::string_view s) {
  return s.empty() || s == "?" || s == "NA" || s == "NaN" || s == "nan";
}

bool same_value(std::string_view raw, std::string_view target) {
  if (raw == target) return true;
  double a = 0.0;
  double b = 0.0;
  return parse_double(raw, a) && parse_double(target, b) && a == b;
}

// Maps a two-valued raw column to {0,1}; `one_value` maps to 1.
std::vector<int> encode_binary(const std::vector<std::string>& raw, const std::string& one_value,
                               const std::string& column) {
  std::set<std::string> distinct(raw.begin(), raw.end());
  if (distinct.size() > 2) {
    throw Error(ErrorKind::kEncoding, "column '" + column + "' has " +
                                          std::to_string(distinct.size()) +
                                          " distinct values; expected a binary column");
  }
  std::vector<int> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = same_value(raw[i], one_value) ? 1 : 0;
  return out;
}

}  // namespace

LogSink set_warning_sink(LogSink sink) {
  std::lock_guard lock(sink_mutex());
  LogSink previous = std::move(sink_slot());
  sink_slot() = std::move(sink);
  return previous;
}

void warn(const std::string& message) {
  std::lock_guard lock(sink_mutex());
  if (sink_slot()) sink_slot()(message);
}

Eigen::VectorXd DataPoint::a() const {
  Eigen::VectorXd out(x.size() + 1);
  out.head(x.size()) = x;
  out(x.size()) = static_cast<double>(s);
  return out;
}

bool DataPoint::operator==(const DataPoint& other) const {
  return s == other.s && y == other.y && x.size() == other.x.size() && x == other.x;
}

void DatasetSpec::validate() const {
  if (label_column.empty() || sensitive_column.empty()) {
    throw Error(ErrorKind::kConfig, "dataset '" + name + "' needs label and sensitive columns");
  }
  if (label_column == sensitive_column) {
    throw Error(ErrorKind::kConfig, "label and sensitive column are both '" + label_column + "'");
  }
  for (const auto& f : feature_columns) {
    if (f == label_column || f == sensitive_column) {
      throw Error(ErrorKind::kConfig, "column '" + f + "' is listed as a feature");
    }
  }
  for (const auto& c : categorical_columns) {
    if (std::find(feature_columns.begin(), feature_columns.end(), c) == feature_columns.end()) {
      throw Error(ErrorKind::kConfig, "categorical column '" + c + "' is not a feature column");
    }
  }
}

DatasetSpec law_school_spec() {
  DatasetSpec spec;
  spec.name = "law_school";
  spec.label_column = "pass_bar";
  spec.sensitive_column = "race";
  spec.positive_label_value = "1";
  spec.privileged_sensitive_value = "White";
  spec.feature_columns = {"decile1b", "decile3", "lsat",    "ugpa", "zfygpa",
                          "zgpa",     "fulltime", "fam_inc", "male", "tier"};
  spec.standardize = true;
  return spec;
}

DatasetSpec dutch_spec() {
  DatasetSpec spec;
  spec.name = "dutch";
  spec.label_column = "occupation";
  spec.sensitive_column = "sex";
  spec.positive_label_value = "1";
  spec.privileged_sensitive_value = "1";
  spec.feature_columns = {"age",          "household_position", "household_size",
                          "prev_residence_place", "citizenship", "country_birth",
                          "edu_level",    "economic_status",    "cur_eco_activity",
                          "Marital_status"};
  spec.standardize = true;
  return spec;
}

Dataset parse_dataset(std::string_view text, const DatasetSpec& spec) {
  spec.validate();

  std::vector<std::string_view> lines;
  {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string_view line = text.substr(pos, end - pos);
      if (!trim(line).empty()) lines.push_back(line);
      pos = end + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorKind::kEmptyInput, "dataset '" + spec.name + "' is empty");

  std::string_view header_line = lines.front();
  if (header_line.size() >= 3 && header_line.substr(0, 3) == "\xEF\xBB\xBF") {
    header_line.remove_prefix(3);
  }
  const auto header = split_record(header_line);
  std::unordered_map<std::string, std::size_t> column_of;
  for (std::size_t i = 0; i < header.size(); ++i) column_of.emplace(header[i], i);

  auto require = [&](const std::string& name) {
    const auto it = column_of.find(name);
    if (it == column_of.end()) {
      throw Error(ErrorKind::kSchema, "dataset '" + spec.name + "' has no column '" + name + "'");
    }
    return it->second;
  };
  const std::size_t label_col = require(spec.label_column);
  const std::size_t sens_col = require(spec.sensitive_column);
  std::vector<std::size_t> feat_cols;
  std::vector<bool> is_categorical;
  for (const auto& f : spec.feature_columns) {
    feat_cols.push_back(require(f));
    is_categorical.push_back(std::find(spec.categorical_columns.begin(),
                                       spec.categorical_columns.end(),
                                       f) != spec.categorical_columns.end());
  }

  // Pass 1: keep complete rows as raw strings.
  std::vector<std::vector<std::string>> rows;
  rows.reserve(lines.size() - 1);
  std::size_t dropped = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    auto cells = split_record(lines[li]);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::kSchema, "line " + std::to_string(li + 1) + " has " +
                                          std::to_string(cells.size()) + " cells, header has " +
                                          std::to_string(header.size()));
    }
    bool complete = !is_missing(cells[label_col]) && !is_missing(cells[sens_col]);
    for (std::size_t c : feat_cols) complete = complete && !is_missing(cells[c]);
    if (!complete) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(cells));
  }
  if (dropped > 0) {
    warn("dataset '" + spec.name + "': dropped " + std::to_string(dropped) +
         " rows with missing values");
  }
  if (rows.empty()) {
    throw Error(ErrorKind::kEmptyInput, "dataset '" + spec.name + "' has no complete rows");
  }

  const std::size_t m = rows.size();
  std::vector<std::string> raw_label(m);
  std::vector<std::string> raw_sens(m);
  for (std::size_t i = 0; i < m; ++i) {
    raw_label[i] = rows[i][label_col];
    raw_sens[i] = rows[i][sens_col];
  }
  const auto label01 = encode_binary(raw_label, spec.positive_label_value, spec.label_column);
  const auto sens01 = encode_binary(raw_sens, spec.privileged_sensitive_value, spec.sensitive_column);

  // Build the feature matrix column block by column block.
  std::vector<Eigen::VectorXd> columns;
  std::vector<bool> standardizable;
  for (std::size_t f = 0; f < feat_cols.size(); ++f) {
    const std::size_t col = feat_cols[f];
    if (is_categorical[f]) {
      std::set<std::string> levels;
      for (const auto& r : rows) levels.insert(r[col]);
      // reference coding: first level is dropped
      auto it = levels.begin();
      if (it != levels.end()) ++it;
      for (; it != levels.end(); ++it) {
        Eigen::VectorXd v(m);
        for (std::size_t i = 0; i < m; ++i) v(i) = rows[i][col] == *it ? 1.0 : 0.0;
        columns.push_back(std::move(v));
        standardizable.push_back(false);
      }
    } else {
      Eigen::VectorXd v(m);
      for (std::size_t i = 0; i < m; ++i) {
        if (!parse_double(rows[i][col], v(i))) {
          throw Error(ErrorKind::kEncoding, "column '" + spec.feature_columns[f] + "' row " +
                                                std::to_string(i + 1) + ": '" + rows[i][col] +
                                                "' is not a number");
        }
      }
      columns.push_back(std::move(v));
      standardizable.push_back(true);
    }
  }

  if (spec.standardize) {
    for (std::size_t j = 0; j < columns.size(); ++j) {
      if (!standardizable[j]) continue;
      auto& v = columns[j];
      const double mean = v.mean();
      const double var = (v.array() - mean).square().mean();
      if (var <= 0.0) continue;
      const double sd = std::sqrt(var);
      v = (v.array() - mean) / sd;
    }
  }

  const auto d = static_cast<Eigen::Index>(columns.size());
  Dataset out(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto& p = out[i];
    p.x.resize(d + 1);
    for (Eigen::Index j = 0; j < d; ++j) p.x(j) = columns[static_cast<std::size_t>(j)](i);
    p.x(d) = 1.0;
    p.s = sens01[i];
    p.y = label01[i] == 1 ? 1 : -1;
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str(), spec);
}

std::size_t round_half_up(double value) {
  return static_cast<std::size_t>(std::floor(value + 0.5));
}

std::size_t feature_dim(std::span<const DataPoint> data) {
  return data.empty() ? 0 : static_cast<std::size_t>(data.front().x.size());
}

std::vector<ClientDataset> partition_clients(std::span<const DataPoint> data, int num_clients,
                                             Rng& rng) {
  if (num_clients < 1) throw Error(ErrorKind::kPartition, "need at least one client");
  const auto k = static_cast<std::size_t>(num_clients);
  if (k > data.size()) {
    throw Error(ErrorKind::kPartition, std::to_string(k) + " clients but only " +
                                           std::to_string(data.size()) + " samples");
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), rng);

  std::vector<ClientDataset> clients(k);
  const std::size_t base = data.size() / k;
  const std::size_t extra = data.size() % k;
  std::size_t pos = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t size = base + (c < extra ? 1 : 0);
    auto& client = clients[c];
    client.client_id = static_cast<int>(c);
    client.shard_index.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                              order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    client.shard.reserve(size);
    for (std::size_t idx : client.shard_index) client.shard.push_back(data[idx]);
    pos += size;
  }
  return clients;
}

ClientDataset split_train_test(ClientDataset client, double train_frac, Rng& rng) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw Error(ErrorKind::kConfig, "train fraction must lie in (0,1), got " +
                                        std::to_string(train_frac));
  }
  const std::size_t n = client.shard.size();
  const std::size_t n_train = std::min(n, round_half_up(train_frac * static_cast<double>(n)));
  if (n_train == n || n_train == 0) {
    warn("client " + std::to_string(client.client_id) + ": split of " + std::to_string(n) +
         " samples leaves " + std::to_string(n_train) + " train / " +
         std::to_string(n - n_train) + " test");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), rng);

  client.train_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  client.test_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  client.original_train.clear();
  client.test.clear();
  for (std::size_t i : client.train_index) client.original_train.push_back(client.shard[i]);
  for (std::size_t i : client.test_index) client.test.push_back(client.shard[i]);
  return client;
}

Dataset sample_root(ClientDataset& client, double frac, Rng& rng) {
  if (!(frac > 0.0 && frac <= 1.0)) {
    throw Error(ErrorKind::kConfig, "root fraction must lie in (0,1], got " + std::to_string(frac));
  }
  const std::size_t n = client.original_train.size();
  if (n == 0) {
    throw Error(ErrorKind::kSampling,
                "client " + std::to_string(client.client_id) + " has no training data");
  }
  const std::size_t count =
      std::min(n, std::max<std::size_t>(1, round_half_up(frac * static_cast<double>(n))));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order.begin(), order.end(), rng);
  order.resize(count);
  client.root_index = order;
  client.root.clear();
  for (std::size_t i : order) client.root.push_back(client.original_train[i]);
  return client.root;
}

}  // namespace fairdef
