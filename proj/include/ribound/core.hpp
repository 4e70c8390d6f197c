#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ribound/error.hpp"

namespace ribound {

/// Treatment indicator per unit, 1 = treated. Unit order is dataset order.
using Assignment = std::vector<std::uint8_t>;
using AssignmentView = std::span<const std::uint8_t>;

struct Unit {
  std::string id;
  std::uint8_t w = 0;
  double y = 0.0;
  std::optional<std::string> block;
};

/// Unvalidated row as handed over by an ingestion layer.
struct RawRow {
  std::string id;
  long long w = 0;
  double y = 0.0;
  std::optional<std::string> block;
};

/// Observed experiment: treatment indicators and outcomes in file order.
/// Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  std::size_t size() const noexcept { return units_.size(); }
  std::size_t n_treated() const noexcept { return n_treated_; }
  std::size_t n_control() const noexcept { return units_.size() - n_treated_; }
  bool has_blocks() const noexcept { return !blocks_.empty(); }

  const std::vector<Unit>& units() const noexcept { return units_; }
  const Unit& operator[](std::size_t i) const { return units_[i]; }

  Assignment assignment() const;
  std::vector<double> outcomes() const;

  /// Unit indices per block, blocks in order of first appearance.
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
  const std::vector<std::string>& block_labels() const noexcept { return block_labels_; }

  /// Same units with every outcome multiplied by -1.
  Dataset negated() const;

  friend Dataset validate_dataset(std::span<const RawRow> rows);

 private:
  std::vector<Unit> units_;
  std::size_t n_treated_ = 0;
  std::vector<std::vector<std::size_t>> blocks_;
  std::vector<std::string> block_labels_;
};

/// Errors: DegenerateDesign, DuplicateId, NonBinaryTreatment, MissingBlock,
/// DegenerateBlock, NonFiniteOutcome.
Dataset validate_dataset(std::span<const RawRow> rows);

/// Convenience for tests and bindings: ids are "1".."n", no blocks.
Dataset make_dataset(std::span<const std::uint8_t> w, std::span<const double> y);

struct CompleteRandomization {
  std::size_t n = 0;
  std::size_t n_treated = 0;
};

/// Each pair holds two unit indices; exactly one of them is treated.
struct PairedBlocks {
  std::size_t n = 0;
  std::vector<std::array<std::size_t, 2>> pairs;
};

class Design {
 public:
  static Design complete(std::size_t n, std::size_t n_treated);
  static Design paired(std::size_t n, std::vector<std::array<std::size_t, 2>> pairs);
  /// Paired blocks when the dataset carries block labels, otherwise complete
  /// randomization with the observed treated count.
  static Design from_dataset(const Dataset& d);

  std::size_t n() const noexcept;
  bool is_paired() const noexcept { return std::holds_alternative<PairedBlocks>(kind_); }
  const CompleteRandomization* complete_randomization() const noexcept {
    return std::get_if<CompleteRandomization>(&kind_);
  }
  const PairedBlocks* paired_blocks() const noexcept { return std::get_if<PairedBlocks>(&kind_); }

  /// C(n, n_T) or 2^K; nullopt when it does not fit in 64 bits.
  std::optional<std::uint64_t> enumeration_size() const noexcept;

  bool admits(AssignmentView w) const noexcept;
  std::string describe() const;

 private:
  explicit Design(std::variant<CompleteRandomization, PairedBlocks> k) : kind_(std::move(k)) {}
  std::variant<CompleteRandomization, PairedBlocks> kind_;
};

/// Full potential-outcome table.
struct Schedule {
  std::vector<double> y0;
  std::vector<double> y1;

  std::size_t size() const noexcept { return y0.size(); }
  double tau(std::size_t i) const { return y1[i] - y0[i]; }
  double realized(std::size_t i, std::uint8_t w) const { return w ? y1[i] : y0[i]; }
  std::vector<double> realized(AssignmentView w) const;
  bool sharp_zero() const noexcept { return y0 == y1; }

  static Schedule make(std::vector<double> y0, std::vector<double> y1);
};

/// Hypothesized unit-level effects: one constant or one value per unit.
class EffectSpec {
 public:
  static EffectSpec constant(double tau0);
  static EffectSpec per_unit(std::vector<double> tau0);

  bool is_constant() const noexcept { return std::holds_alternative<double>(value_); }
  double at(std::size_t i) const noexcept {
    if (const auto* c = std::get_if<double>(&value_)) return *c;
    return std::get<std::vector<double>>(value_)[i];
  }
  /// Length check against a dataset of size n; constant specs match any n.
  void check_length(std::size_t n) const;
  EffectSpec negated() const;
  const std::variant<double, std::vector<double>>& value() const noexcept { return value_; }

 private:
  explicit EffectSpec(std::variant<double, std::vector<double>> v) : value_(std::move(v)) {}
  std::variant<double, std::vector<double>> value_;
};

enum class ScheduleOrdering { LessOrEqual, GreaterOrEqual, Equal, Incomparable };

const char* to_string(ScheduleOrdering o) noexcept;

/// a <= b iff every y1 of a is <= the y1 of b and every y0 of a is >= the y0 of b.
ScheduleOrdering compare_schedules(const Schedule& a, const Schedule& b);

}  // namespace ribound
