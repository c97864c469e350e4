// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#include "hyperrec/rng.hpp"

#include <sstream>

#include "hyperrec/error.hpp"

namespace hyperrec {

std::string Rng::state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

void Rng::set_state(const std::string& text) {
  std::istringstream is(text);
  is >> engine_;
  if (!is) throw ParseError("invalid generator state");
}

}  // namespace hyperrec
