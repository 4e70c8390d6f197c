#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ribound {

/// Table of C(L, s) for L = 0..n, kept in 64-bit words while they fit and
/// promoted to arbitrary precision otherwise. Sums of table differences are
/// exact; only the final conversion to double rounds.
class SubsetScoreTable {
 public:
  using BigInt = boost::multiprecision::cpp_int;

  SubsetScoreTable() = default;
  SubsetScoreTable(std::size_t n, std::size_t s);

  std::size_t n() const noexcept { return n_; }
  std::size_t subset_size() const noexcept { return s_; }
  bool promoted() const noexcept { return !big_.empty(); }

  /// Exact accumulator for sums of C(L, s) - C(L - t, s).
  class Accumulator {
   public:
    explicit Accumulator(const SubsetScoreTable& t) noexcept : table_(&t) {}
    /// Adds the number of size-s subsets drawn from the L lowest units that
    /// contain at least one of the t units sitting at the top of that range.
    void add(std::size_t L, std::size_t t);
    double value() const;

   private:
    const SubsetScoreTable* table_;
    unsigned __int128 small_ = 0;
    BigInt big_ = 0;
  };

 private:
  std::size_t n_ = 0;
  std::size_t s_ = 0;
  std::vector<std::uint64_t> small_;
  std::vector<BigInt> big_;
};

}  // namespace ribound
