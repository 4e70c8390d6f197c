#pragma once

#include <doctest.h>

#include <cmath>
#include <vector>

#include "ribound/core.hpp"

namespace fixtures {

inline const std::vector<double> kExample16Y = {-0.90, 0.18, 1.59, -1.13, -0.08, 0.13, 0.71, -0.24,
                                             2.98,  0.86, 1.42, 1.98,  0.61,  -0.04, 2.78, -1.31};
inline const std::vector<std::uint8_t> kExample16W = {0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1};

inline ribound::Dataset example16() { return ribound::make_dataset(kExample16W, kExample16Y); }

/// Per-unit non-superiority bound: unit 2 at -2, unit 12 at -1, zero elsewhere.
inline ribound::EffectSpec example16_bound() {
  std::vector<double> tau(16, 0.0);
  tau[1] = -2.0;
  tau[11] = -1.0;
  return ribound::EffectSpec::per_unit(tau);
}

inline std::vector<std::uint8_t> alternating(std::size_t n) {
  std::vector<std::uint8_t> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = i % 2;
  return w;
}

/// Printed p-values carry three decimals with the remaining digits dropped.
inline double three_decimals(double p) { return std::floor(p * 1000.0 + 1e-9) / 1000.0; }

}  // namespace fixtures

#define CHECK_ERRC(expr, errc)                                 \
  do {                                                         \
    bool caught_ = false;                                      \
    try {                                                      \
      (void)(expr);                                            \
    } catch (const ribound::Error& e_) {                       \
      caught_ = true;                                          \
      CHECK_MESSAGE(e_.code() == (errc), e_.what());           \
    }                                                          \
    CHECK_MESSAGE(caught_, "expected " #errc " from " #expr);  \
  } while (0)
