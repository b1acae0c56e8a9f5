#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "fairdef/data.hpp"
#include "fairdef/rng.hpp"

namespace fairdef {

struct SyntheticClientParams {
  std::size_t size = 500;
  // Non-sensitive features, excluding the appended constant.
  int num_features = 3;
  // Probability that a label is overwritten by 2s - 1; with balanced groups
  // this is approximately the label/sensitive correlation.
  double planted_bias = 0.0;
  double label_noise = 0.5;
  // Shift of the first feature between sensitive groups.
  double group_shift = 0.3;
};

// Draws one client from a shared linear concept `beta` (length num_features + 1,
// last entry the intercept). Points carry a trailing constant-1 feature.
Dataset make_synthetic_client(const SyntheticClientParams& params,
                              const Eigen::Ref<const Eigen::VectorXd>& beta, Rng& rng);

Eigen::VectorXd make_synthetic_concept(int num_features, Rng& rng);

// CSV text with the Law School column layout (see law_school_spec()).
std::string make_law_like_csv(std::size_t rows, std::uint64_t seed);
// CSV text with the Dutch census column layout (see dutch_spec()).
std::string make_dutch_like_csv(std::size_t rows, std::uint64_t seed);

}  // namespace fairdef
