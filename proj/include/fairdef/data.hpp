#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairdef/rng.hpp"

namespace fairdef {

// One labeled sample. x holds the non-sensitive features with a trailing
// constant-1 column; s is the binary sensitive attribute; y is in {-1,+1}.
struct DataPoint {
  Eigen::VectorXd x;
  int s = 0;
  int y = 1;

  // Model input a = (x, s), length x.size() + 1.
  Eigen::VectorXd a() const;

  bool operator==(const DataPoint& other) const;
};

using Dataset = std::vector<DataPoint>;

struct ClientDataset {
  int client_id = 0;
  // Rows of the loaded file assigned to this client, in shard order.
  std::vector<std::size_t> shard_index;
  Dataset shard;
  // Positions into `shard`.
  std::vector<std::size_t> train_index;
  std::vector<std::size_t> test_index;
  Dataset original_train;
  Dataset test;
  // Positions into `original_train`.
  std::vector<std::size_t> root_index;
  Dataset root;
  Dataset proxy;
};

struct DatasetSpec {
  std::string name;
  std::string label_column;
  std::string sensitive_column;
  std::string positive_label_value;
  std::string privileged_sensitive_value;
  std::vector<std::string> feature_columns;
  // Subset of feature_columns that is one-hot encoded instead of parsed as numbers.
  std::vector<std::string> categorical_columns;
  bool standardize = true;

  void validate() const;
};

// Built-in schemas for the two benchmark files and their synthetic fixtures.
DatasetSpec law_school_spec();
DatasetSpec dutch_spec();

// Reads a comma-separated file with a header row. Rows with an empty cell in
// any used column are dropped.
Dataset load_dataset(const std::filesystem::path& path, const DatasetSpec& spec);

// Same as load_dataset over in-memory text; used by tests and the file loader.
Dataset parse_dataset(std::string_view text, const DatasetSpec& spec);

std::vector<ClientDataset> partition_clients(std::span<const DataPoint> data, int num_clients,
                                             Rng& rng);

ClientDataset split_train_test(ClientDataset client, double train_frac, Rng& rng);

// Draws round-half-up(frac * |train|) points (at least one) without replacement
// from client.original_train and stores them on the client.
Dataset sample_root(ClientDataset& client, double frac, Rng& rng);

// round-half-up for nonnegative values
std::size_t round_half_up(double value);

std::size_t feature_dim(std::span<const DataPoint> data);

}  // namespace fairdef
