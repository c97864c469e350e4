// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperrec/encoder.hpp"

namespace hyperrec {

/// Which instances supply the negatives of the contrastive loss.
enum class ContrastScope { batch, full };
/// Which user/item embeddings the smoothness metric is computed on.
enum class MadSource { pooled, last_layer };

/// Search spaces for the tunable hyperparameters.
namespace grids {
inline constexpr double kTau[] = {0.1, 0.25, 0.5, 0.75, 1.0};
inline constexpr std::size_t kLayers[] = {1, 2, 3, 4};
inline constexpr double kLambda1[] = {2e-2, 2e-3, 2e-4, 2e-5, 2e-6};
inline constexpr double kLambda2[] = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
inline constexpr double kLearningRate[] = {1e-3, 5e-4, 1e-4, 1e-5};
}  // namespace grids

/// Every knob of a run. Serialized as flat "key=value" lines; see
/// TrainingConfig::keys() for the accepted names.
struct TrainingConfig {
  std::size_t dim = 32;
  std::size_t layers = 2;
  std::size_t k = 8;
  double alpha = 0.5;
  double tau = 0.5;
  double lambda1 = 2e-2;
  double lambda2 = 1e-4;
  double learning_rate = 1e-3;
  std::size_t batch_size = 1024;
  std::size_t epochs = 100;
  std::uint64_t seed = 2024;

  bool no_sa = false;
  bool no_dh = false;
  bool no_ssl = false;

  QualifierMode phi = QualifierMode::multiply;
  Activation activation = Activation::tanh;
  AggregatorVariant variant = AggregatorVariant::sdk;
  bool include_self = false;
  bool infonce_positive = false;
  ContrastScope contrast_scope = ContrastScope::batch;

  std::size_t eval_every = 1;
  std::size_t patience = 20;  // evaluations without improvement; 0 disables
  std::size_t top_k = 20;
  std::size_t groups = 4;
  MadSource mad_source = MadSource::pooled;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;

  /// Sets one key from text. Unknown keys and malformed values throw ConfigError.
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  /// All (key, value) pairs in canonical order.
  std::vector<std::pair<std::string, std::string>> entries() const;
  static std::vector<std::string_view> keys();

  /// Throws ConfigError on values outside their admissible ranges.
  void validate() const;

  EncoderOptions encoder_options() const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Applies "key=value" lines ('#' comments, blank lines allowed) on top of `base`.
TrainingConfig parse_config(std::istream& in, TrainingConfig base = {});
TrainingConfig load_config(const std::filesystem::path& path, TrainingConfig base = {});
void write_config(std::ostream& out, const TrainingConfig& config);

/// Shortest text that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace hyperrec
