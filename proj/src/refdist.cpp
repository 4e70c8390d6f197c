#include "ribound/refdist.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>
#include <thread>

#include "ribound/combinatorics.hpp"
#include "ribound/random.hpp"

namespace ribound {

Tail parse_tail(std::string_view text) {
  if (text == "upper") return Tail::Upper;
  if (text == "lower") return Tail::Lower;
  throw Error(Errc::InvalidArgument, "unknown tail '" + std::string(text) + "' (expected upper or lower)");
}

const char* to_string(Tail t) noexcept { return t == Tail::Upper ? "upper" : "lower"; }

bool at_least_as_extreme(double candidate, double observed, Tail tail, bool exact_compare) noexcept {
  constexpr double kRelativeSlack = 1e-12;
  const double slack = exact_compare ? 0.0 : kRelativeSlack * std::max(1.0, std::fabs(observed));
  return tail == Tail::Upper ? candidate >= observed - slack : candidate <= observed + slack;
}

// ---------------------------------------------------------------------------

AssignmentEnumerator::AssignmentEnumerator(const Design& design, std::uint64_t cap) : design_(&design) {
  const auto size = design.enumeration_size();
  if (!size || *size > cap)
    throw Error(Errc::EnumerationTooLarge,
                design.describe() + " has more than " + std::to_string(cap) +
                    " assignments; use Monte Carlo mode");
  size_ = *size;
}

void AssignmentEnumerator::unrank_combination(std::uint64_t index, std::vector<std::size_t>& chosen) const {
  const std::size_t n = design_->n();
  const std::size_t k = chosen.size();
  std::size_t candidate = 0;
  for (std::size_t j = 0; j < k; ++j) {
    for (;; ++candidate) {
      // combinations that put `candidate` at position j
      const std::uint64_t block = *checked_binomial(n - candidate - 1, k - j - 1);
      if (index < block) break;
      index -= block;
    }
    chosen[j] = candidate++;
  }
}

Assignment AssignmentEnumerator::at(std::uint64_t index) const {
  if (index >= size_) throw Error(Errc::InvalidArgument, "assignment index out of range");
  Assignment out;
  for_range(index, index + 1, [&](AssignmentView w) { out.assign(w.begin(), w.end()); });
  return out;
}

std::vector<Assignment> AssignmentEnumerator::collect() const {
  std::vector<Assignment> all;
  all.reserve(size_);
  for_range(0, size_, [&](AssignmentView w) { all.emplace_back(w.begin(), w.end()); });
  return all;
}

// ---------------------------------------------------------------------------

AssignmentSampler::AssignmentSampler(const Design& design, std::uint64_t seed) : design_(&design), seed_(seed) {}

void AssignmentSampler::draw(std::uint64_t index, Assignment& out) const {
  random::Stream rng(seed_, index);
  const std::size_t n = design_->n();
  out.assign(n, 0);
  if (const auto* pb = design_->paired_blocks()) {
    for (const auto& pair : pb->pairs) {
      const std::uint8_t bit = static_cast<std::uint8_t>(rng() >> 63);
      out[pair[0]] = bit;
      out[pair[1]] = bit ^ 1U;
    }
    return;
  }
  // Floyd's algorithm: n_T distinct indices in O(n_T) draws.
  const std::size_t k = design_->complete_randomization()->n_treated;
  for (std::size_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::size_t>(rng.below(j + 1));
    if (out[t])
      out[j] = 1;
    else
      out[t] = 1;
  }
}

std::vector<Assignment> AssignmentSampler::sample(std::uint64_t count) const {
  std::vector<Assignment> draws(count);
  for (std::uint64_t k = 0; k < count; ++k) draw(k, draws[k]);
  return draws;
}

// ---------------------------------------------------------------------------

namespace {

unsigned resolve_threads(unsigned requested, std::uint64_t work) {
  unsigned t = requested ? requested : std::max(1U, std::thread::hardware_concurrency());
  // small jobs are not worth a thread
  const std::uint64_t per_thread_min = 4096;
  const std::uint64_t useful = std::max<std::uint64_t>(1, work / per_thread_min);
  return static_cast<unsigned>(std::min<std::uint64_t>(t, useful));
}

// Runs body(begin, end, slot) over [0, total) split into contiguous chunks and
// returns the summed counts.
template <typename Body>
std::uint64_t run_partitioned(std::uint64_t total, unsigned threads, Body&& body) {
  if (threads <= 1) return body(0, total);
  std::vector<std::uint64_t> counts(threads, 0);
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t begin = total * t / threads;
      const std::uint64_t end = total * (t + 1) / threads;
      workers.emplace_back([&, t, begin, end] {
        try {
          counts[t] = body(begin, end);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

}  // namespace

PValueResult p_value(const Schedule& schedule, AssignmentView observed, const Statistic& stat, const Design& design,
                     const Mode& mode, Tail tail, const RunOptions& options) {
  if (schedule.size() != design.n() || observed.size() != design.n())
    throw Error(Errc::LengthMismatch, "schedule, assignment and design sizes differ");
  if (!design.admits(observed)) throw Error(Errc::InvalidArgument, "observed assignment is not admissible under the design");

  Evaluator base(stat, schedule);
  PValueResult result;
  result.observed = base(observed);
  result.distribution.mode = mode;
  result.distribution.design = design.describe();
  const bool exact_compare = stat.exact_valued();
  const double t_obs = result.observed;

  std::vector<double>* values = options.keep_values ? &result.distribution.values : nullptr;

  if (const auto* ex = std::get_if<ExactMode>(&mode)) {
    const AssignmentEnumerator en(design, ex->cap);
    const std::uint64_t total = en.size();
    if (values) values->assign(total, 0.0);
    const unsigned threads = resolve_threads(options.threads, total);
    const std::uint64_t count = run_partitioned(total, threads, [&](std::uint64_t begin, std::uint64_t end) {
      Evaluator ev = base;
      std::uint64_t c = 0;
      std::uint64_t index = begin;
      en.for_range(begin, end, [&](AssignmentView w) {
        const double t = ev(w);
        if (values) (*values)[index] = t;
        ++index;
        c += at_least_as_extreme(t, t_obs, tail, exact_compare);
      });
      return c;
    });
    result.p = PValue{static_cast<double>(count) / static_cast<double>(total), count, total, tail, true};
    result.distribution.size = total;
    return result;
  }

  const auto& mc = std::get<MonteCarloMode>(mode);
  if (mc.draws == 0) throw Error(Errc::InvalidArgument, "Monte Carlo needs at least one draw");
  const AssignmentSampler sampler(design, mc.seed);
  if (values) values->assign(mc.draws, 0.0);
  const unsigned threads = resolve_threads(options.threads, mc.draws);
  const std::uint64_t count = run_partitioned(mc.draws, threads, [&](std::uint64_t begin, std::uint64_t end) {
    Evaluator ev = base;
    Assignment w;
    std::uint64_t c = 0;
    for (std::uint64_t k = begin; k < end; ++k) {
      sampler.draw(k, w);
      const double t = ev(w);
      if (values) (*values)[k] = t;
      c += at_least_as_extreme(t, t_obs, tail, exact_compare);
    }
    return c;
  });
  const double p = mc.add_one ? static_cast<double>(count + 1) / static_cast<double>(mc.draws + 1)
                              : static_cast<double>(count) / static_cast<double>(mc.draws);
  result.p = PValue{p, count, mc.draws, tail, false};
  result.distribution.size = mc.draws;
  return result;
}

PValueResult p_value(const Dataset& d, const EffectSpec& e, const Statistic& stat, const Design& design,
                     const Mode& mode, Tail tail, const RunOptions& options, ImputationVariant variant) {
  const Schedule schedule = impute_variant(d, e, variant);
  const Assignment observed = d.assignment();
  return p_value(schedule, observed, stat, design, mode, tail, options);
}

void write_distribution_csv(std::ostream& out, const ReferenceDistribution& dist) {
  std::vector<double> sorted = dist.values;
  std::sort(sorted.begin(), sorted.end());
  out << "value,count\n";
  char buf[64];
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    std::snprintf(buf, sizeof buf, "%.17g", sorted[i]);
    out << buf << ',' << (j - i) << '\n';
    i = j;
  }
}

}  // namespace ribound
