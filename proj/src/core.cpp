#include "ribound/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "ribound/combinatorics.hpp"

namespace ribound {

Assignment Dataset::assignment() const {
  Assignment w(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) w[i] = units_[i].w;
  return w;
}

std::vector<double> Dataset::outcomes() const {
  std::vector<double> y(units_.size());
  for (std::size_t i = 0; i < units_.size(); ++i) y[i] = units_[i].y;
  return y;
}

Dataset Dataset::negated() const {
  Dataset out = *this;
  for (auto& u : out.units_) u.y = -u.y;
  return out;
}

Dataset validate_dataset(std::span<const RawRow> rows) {
  if (rows.empty()) throw Error(Errc::DegenerateDesign, "no units");

  Dataset d;
  d.units_.reserve(rows.size());
  std::unordered_set<std::string> seen;
  const bool blocked = rows.front().block.has_value();

  for (std::size_t i = 0; i < rows.size(); ++i) {
    const RawRow& r = rows[i];
    if (!seen.insert(r.id).second) throw Error(Errc::DuplicateId, "unit id '" + r.id + "' repeated");
    if (r.w != 0 && r.w != 1)
      throw Error(Errc::NonBinaryTreatment,
                  "unit '" + r.id + "' has treatment " + std::to_string(r.w));
    if (!std::isfinite(r.y)) throw Error(Errc::NonFiniteOutcome, "unit '" + r.id + "'");
    if (r.block.has_value() != blocked)
      throw Error(Errc::MissingBlock, "unit '" + r.id + "': block labels must be all present or all absent");
    d.units_.push_back(Unit{r.id, static_cast<std::uint8_t>(r.w), r.y, r.block});
    d.n_treated_ += static_cast<std::size_t>(r.w);
  }

  if (d.n_treated_ == 0 || d.n_treated_ == rows.size())
    throw Error(Errc::DegenerateDesign, "need at least one treated and one control unit");

  if (blocked) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < d.units_.size(); ++i) {
      const std::string& label = *d.units_[i].block;
      auto [it, inserted] = index.emplace(label, d.blocks_.size());
      if (inserted) {
        d.blocks_.emplace_back();
        d.block_labels_.push_back(label);
      }
      d.blocks_[it->second].push_back(i);
    }
    for (std::size_t b = 0; b < d.blocks_.size(); ++b) {
      std::size_t treated = 0;
      for (std::size_t i : d.blocks_[b]) treated += d.units_[i].w;
      if (d.blocks_[b].size() < 2 || treated == 0 || treated == d.blocks_[b].size())
        throw Error(Errc::DegenerateBlock, "block '" + d.block_labels_[b] + "' lacks a treated or a control unit");
    }
  }
  return d;
}

Dataset make_dataset(std::span<const std::uint8_t> w, std::span<const double> y) {
  if (w.size() != y.size()) throw Error(Errc::LengthMismatch, "w and y lengths differ");
  std::vector<RawRow> rows(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) rows[i] = RawRow{std::to_string(i + 1), w[i], y[i], std::nullopt};
  return validate_dataset(rows);
}

// ---------------------------------------------------------------------------

Design Design::complete(std::size_t n, std::size_t n_treated) {
  if (n_treated == 0 || n_treated >= n)
    throw Error(Errc::DegenerateDesign, "complete randomization needs 0 < n_T < n");
  return Design(CompleteRandomization{n, n_treated});
}

Design Design::paired(std::size_t n, std::vector<std::array<std::size_t, 2>> pairs) {
  if (pairs.empty()) throw Error(Errc::DegenerateDesign, "paired design without blocks");
  std::vector<bool> used(n, false);
  for (const auto& p : pairs) {
    for (std::size_t i : p) {
      if (i >= n || used[i]) throw Error(Errc::InvalidArgument, "pair indices must be distinct and < n");
      used[i] = true;
    }
  }
  if (std::find(used.begin(), used.end(), false) != used.end())
    throw Error(Errc::InvalidArgument, "every unit must belong to a pair");
  return Design(PairedBlocks{n, std::move(pairs)});
}

Design Design::from_dataset(const Dataset& d) {
  if (!d.has_blocks()) return complete(d.size(), d.n_treated());
  std::vector<std::array<std::size_t, 2>> pairs;
  pairs.reserve(d.blocks().size());
  for (std::size_t b = 0; b < d.blocks().size(); ++b) {
    const auto& members = d.blocks()[b];
    if (members.size() != 2)
      throw Error(Errc::DegenerateBlock,
                  "block '" + d.block_labels()[b] + "' has " + std::to_string(members.size()) +
                      " units; only paired blocks are supported");
    pairs.push_back({members[0], members[1]});
  }
  return paired(d.size(), std::move(pairs));
}

std::size_t Design::n() const noexcept {
  return std::visit([](const auto& k) { return k.n; }, kind_);
}

std::optional<std::uint64_t> Design::enumeration_size() const noexcept {
  if (const auto* c = complete_randomization()) return checked_binomial(c->n, c->n_treated);
  const auto& p = std::get<PairedBlocks>(kind_);
  if (p.pairs.size() >= 64) return std::nullopt;
  return std::uint64_t{1} << p.pairs.size();
}

bool Design::admits(AssignmentView w) const noexcept {
  if (w.size() != n()) return false;
  if (const auto* c = complete_randomization()) {
    std::size_t treated = 0;
    for (auto v : w) {
      if (v > 1) return false;
      treated += v;
    }
    return treated == c->n_treated;
  }
  for (const auto& p : std::get<PairedBlocks>(kind_).pairs)
    if (w[p[0]] + w[p[1]] != 1) return false;
  return true;
}

std::string Design::describe() const {
  std::ostringstream os;
  if (const auto* c = complete_randomization())
    os << "complete(n=" << c->n << ", n_treated=" << c->n_treated << ")";
  else
    os << "paired(n=" << n() << ", blocks=" << std::get<PairedBlocks>(kind_).pairs.size() << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

std::vector<double> Schedule::realized(AssignmentView w) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i] ? y1[i] : y0[i];
  return out;
}

Schedule Schedule::make(std::vector<double> y0, std::vector<double> y1) {
  if (y0.size() != y1.size()) throw Error(Errc::LengthMismatch, "y0 and y1 lengths differ");
  for (std::size_t i = 0; i < y0.size(); ++i)
    if (!std::isfinite(y0[i]) || !std::isfinite(y1[i]))
      throw Error(Errc::NonFiniteOutcome, "schedule entry " + std::to_string(i));
  return Schedule{std::move(y0), std::move(y1)};
}

EffectSpec EffectSpec::constant(double tau0) {
  if (!std::isfinite(tau0)) throw Error(Errc::InvalidArgument, "effect must be finite");
  return EffectSpec(tau0);
}

EffectSpec EffectSpec::per_unit(std::vector<double> tau0) {
  for (double t : tau0)
    if (!std::isfinite(t)) throw Error(Errc::InvalidArgument, "effect vector must be finite");
  return EffectSpec(std::move(tau0));
}

void EffectSpec::check_length(std::size_t n) const {
  if (const auto* v = std::get_if<std::vector<double>>(&value_); v && v->size() != n)
    throw Error(Errc::LengthMismatch,
                "effect vector has " + std::to_string(v->size()) + " entries, dataset has " + std::to_string(n));
}

EffectSpec EffectSpec::negated() const {
  if (const auto* c = std::get_if<double>(&value_)) return EffectSpec(-*c);
  auto v = std::get<std::vector<double>>(value_);
  for (double& t : v) t = -t;
  return EffectSpec(std::move(v));
}

const char* to_string(ScheduleOrdering o) noexcept {
  switch (o) {
    case ScheduleOrdering::LessOrEqual: return "LessOrEqual";
    case ScheduleOrdering::GreaterOrEqual: return "GreaterOrEqual";
    case ScheduleOrdering::Equal: return "Equal";
    case ScheduleOrdering::Incomparable: return "Incomparable";
  }
  return "?";
}

ScheduleOrdering compare_schedules(const Schedule& a, const Schedule& b) {
  if (a.size() != b.size()) throw Error(Errc::LengthMismatch, "schedules differ in length");
  bool le = true;  // a <= b
  bool ge = true;  // b <= a
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.y1[i] > b.y1[i] || a.y0[i] < b.y0[i]) le = false;
    if (b.y1[i] > a.y1[i] || b.y0[i] < a.y0[i]) ge = false;
  }
  if (le && ge) return ScheduleOrdering::Equal;
  if (le) return ScheduleOrdering::LessOrEqual;
  if (ge) return ScheduleOrdering::GreaterOrEqual;
  return ScheduleOrdering::Incomparable;
}

}  // namespace ribound
