// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "hyperrec/error.hpp"

namespace hyperrec {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) +
                      "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected a boolean, got '" +
                    std::string(text) + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::vector<std::string_view> TrainingConfig::keys() {
  return {"dim",         "layers",          "k",
          "alpha",       "tau",             "lambda1",
          "lambda2",     "lr",              "batch_size",
          "epochs",      "seed",            "no_sa",
          "no_dh",       "no_ssl",          "phi",
          "activation",  "variant",         "include_self",
          "infonce_positive", "contrast_scope", "eval_every",
          "patience",    "top_k",           "groups",
          "mad_source",  "valid_fraction",  "test_fraction"};
}

void TrainingConfig::set(std::string_view key, std::string_view value) {
  if (key == "dim") dim = parse_number<std::size_t>(key, value);
  else if (key == "layers") layers = parse_number<std::size_t>(key, value);
  else if (key == "k") k = parse_number<std::size_t>(key, value);
  else if (key == "alpha") alpha = parse_number<double>(key, value);
  else if (key == "tau") tau = parse_number<double>(key, value);
  else if (key == "lambda1") lambda1 = parse_number<double>(key, value);
  else if (key == "lambda2") lambda2 = parse_number<double>(key, value);
  else if (key == "lr") learning_rate = parse_number<double>(key, value);
  else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value);
  else if (key == "epochs") epochs = parse_number<std::size_t>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "no_sa") no_sa = parse_bool(key, value);
  else if (key == "no_dh") no_dh = parse_bool(key, value);
  else if (key == "no_ssl") no_ssl = parse_bool(key, value);
  else if (key == "phi") phi = parse_qualifier_mode(value);
  else if (key == "activation") activation = parse_activation(value);
  else if (key == "variant") variant = parse_variant(value);
  else if (key == "include_self") include_self = parse_bool(key, value);
  else if (key == "infonce_positive") infonce_positive = parse_bool(key, value);
  else if (key == "contrast_scope") {
    if (value == "batch") contrast_scope = ContrastScope::batch;
    else if (value == "full") contrast_scope = ContrastScope::full;
    else throw ConfigError("config key 'contrast_scope': expected batch or full");
  } else if (key == "eval_every") eval_every = parse_number<std::size_t>(key, value);
  else if (key == "patience") patience = parse_number<std::size_t>(key, value);
  else if (key == "top_k") top_k = parse_number<std::size_t>(key, value);
  else if (key == "groups") groups = parse_number<std::size_t>(key, value);
  else if (key == "mad_source") {
    if (value == "pooled") mad_source = MadSource::pooled;
    else if (value == "last_layer") mad_source = MadSource::last_layer;
    else throw ConfigError("config key 'mad_source': expected pooled or last_layer");
  } else if (key == "valid_fraction") valid_fraction = parse_number<double>(key, value);
  else if (key == "test_fraction") test_fraction = parse_number<double>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> TrainingConfig::entries() const {
  return {
      {"dim", std::to_string(dim)},
      {"layers", std::to_string(layers)},
      {"k", std::to_string(k)},
      {"alpha", format_double(alpha)},
      {"tau", format_double(tau)},
      {"lambda1", format_double(lambda1)},
      {"lambda2", format_double(lambda2)},
      {"lr", format_double(learning_rate)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"seed", std::to_string(seed)},
      {"no_sa", bool_text(no_sa)},
      {"no_dh", bool_text(no_dh)},
      {"no_ssl", bool_text(no_ssl)},
      {"phi", std::string(to_string(phi))},
      {"activation", std::string(to_string(activation))},
      {"variant", std::string(to_string(variant))},
      {"include_self", bool_text(include_self)},
      {"infonce_positive", bool_text(infonce_positive)},
      {"contrast_scope", contrast_scope == ContrastScope::batch ? "batch" : "full"},
      {"eval_every", std::to_string(eval_every)},
      {"patience", std::to_string(patience)},
      {"top_k", std::to_string(top_k)},
      {"groups", std::to_string(groups)},
      {"mad_source", mad_source == MadSource::pooled ? "pooled" : "last_layer"},
      {"valid_fraction", format_double(valid_fraction)},
      {"test_fraction", format_double(test_fraction)},
  };
}

std::string TrainingConfig::get(std::string_view key) const {
  for (auto& [k, v] : entries()) {
    if (k == key) return v;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void TrainingConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (dim == 0) fail("dim must be positive");
  if (layers == 0) fail("layers must be at least 1");
  if (k == 0) fail("k must be at least 1");
  if (alpha < 0.0 || alpha > 1.0) fail("alpha must lie in [0, 1]");
  if (tau < grids::kTau[0] || tau > grids::kTau[4]) fail("tau must lie in [0.1, 1]");
  if (lambda1 < 0.0) fail("lambda1 must be non-negative");
  if (lambda2 < 0.0) fail("lambda2 must be non-negative");
  if (learning_rate < 0.0) fail("lr must be non-negative");
  if (batch_size == 0) fail("batch_size must be positive");
  if (eval_every == 0) fail("eval_every must be positive");
  if (top_k == 0) fail("top_k must be positive");
  if (groups < 2) fail("groups must be at least 2");
  if (phi == QualifierMode::rotate && dim % 2 != 0) fail("phi=rotate needs an even dim");
  if (valid_fraction < 0.0 || test_fraction < 0.0 || valid_fraction + test_fraction >= 1.0) {
    fail("valid_fraction and test_fraction must be non-negative and sum below 1");
  }
}

EncoderOptions TrainingConfig::encoder_options() const {
  return EncoderOptions{phi, activation, variant, alpha, !no_sa};
}

TrainingConfig parse_config(std::istream& in, TrainingConfig base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    base.set(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
  }
  return base;
}

TrainingConfig load_config(const std::filesystem::path& path, TrainingConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, std::move(base));
}

void write_config(std::ostream& out, const TrainingConfig& config) {
  for (const auto& [k, v] : config.entries()) out << k << '=' << v << '\n';
}

}  // namespace hyperrec
