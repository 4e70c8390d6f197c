#pragma once

#include <cstdint>
#include <optional>

namespace ribound {

/// C(n, k) in 64-bit arithmetic; nullopt on overflow.
inline std::optional<std::uint64_t> checked_binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i stays integral at every step
    acc = acc * (n - k + i) / i;
    if (acc > UINT64_MAX) return std::nullopt;
  }
  return static_cast<std::uint64_t>(acc);
}

}  // namespace ribound
