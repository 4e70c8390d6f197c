#include "ribound/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ribound/random.hpp"

namespace ribound::oracle {

namespace {

constexpr std::uint64_t kMaxOracleAssignments = 1'000'000;

std::vector<double> realize(AssignmentView w, const Schedule& s) {
  std::vector<double> y(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) y[i] = w[i] == 1 ? s.y1[i] : s.y0[i];
  return y;
}

// Visits every size-k subset of {0..n-1} as an index list.
void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t next) {
    if (chosen.size() == k) {
      f(chosen);
      return;
    }
    for (std::size_t i = next; i + (k - chosen.size()) <= n; ++i) {
      chosen.push_back(i);
      rec(i + 1);
      chosen.pop_back();
    }
  };
  rec(0);
}

}  // namespace

std::uint64_t stephenson_subset_count(AssignmentView w, const Schedule& s, std::size_t subset_size) {
  const std::size_t n = s.size();
  if (n > 20) throw Error(Errc::TooLargeForOracle, "subset oracle limited to n <= 20");
  if (subset_size < 2 || subset_size > n) throw Error(Errc::SubsetSizeOutOfRange, "subset size out of range");
  const auto y = realize(w, s);
  std::uint64_t count = 0;
  for_each_subset(n, subset_size, [&](const std::vector<std::size_t>& g) {
    double top = y[g[0]];
    for (std::size_t i : g) top = std::max(top, y[i]);
    bool hit = false;
    for (std::size_t i : g) hit = hit || (w[i] == 1 && y[i] >= top);
    count += hit ? 1 : 0;
  });
  return count;
}

std::vector<double> brute_mid_ranks(std::span<const double> values) {
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    double less = 0;
    double equal = 0;
    for (double v : values) {
      if (v < values[i]) less += 1;
      if (v == values[i]) equal += 1;
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

double mann_whitney(AssignmentView w, std::span<const double> realized) {
  double total = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 1) continue;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] != 0) continue;
      if (realized[i] > realized[j]) total += 1;
      else if (realized[i] == realized[j]) total += 0.5;
    }
  }
  return total;
}

double naive_statistic(const Statistic& stat, AssignmentView w, const Schedule& s) {
  const auto y = realize(w, s);
  double n_t = 0;
  double n_c = 0;
  for (auto v : w) (v == 1 ? n_t : n_c) += 1;
  auto mean_of = [&](std::uint8_t arm, const std::function<double(double)>& f) {
    double sum = 0;
    double count = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (w[i] == arm) {
        sum += f(y[i]);
        count += 1;
      }
    if (count == 0) throw Error(Errc::EmptyArm, "oracle: empty arm");
    return sum / count;
  };
  switch (stat.kind()) {
    case StatKind::DiffMeans: {
      auto id = [](double v) { return v; };
      return mean_of(1, id) - mean_of(0, id);
    }
    case StatKind::ThresholdProportion: {
      const double c = stat.cutoff();
      auto above = [c](double v) { return v > c ? 1.0 : 0.0; };
      return mean_of(1, above) - mean_of(0, above);
    }
    case StatKind::ScoredSum: {
      const auto* spec = stat.scored();
      double t = 0;
      double c = 0;
      for (std::size_t i = 0; i < y.size(); ++i) (w[i] == 1 ? t : c) += spec->score(y[i]);
      return spec->treated_scale(w) * t - spec->control_scale(w) * c;
    }
    case StatKind::RankSum:
      return mann_whitney(w, y) + n_t * (n_t + 1) / 2;
    case StatKind::Stephenson:
      return static_cast<double>(stephenson_subset_count(w, s, stat.subset_size()));
    case StatKind::WelchT: {
      auto id = [](double v) { return v; };
      const double mt = mean_of(1, id);
      const double mc = mean_of(0, id);
      double vt = 0;
      double vc = 0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (w[i] == 1) vt += (y[i] - mt) * (y[i] - mt);
        else vc += (y[i] - mc) * (y[i] - mc);
      }
      if (n_t < 2 || n_c < 2) throw Error(Errc::ArmTooSmall, "oracle: arm too small");
      vt /= (n_t - 1);
      vc /= (n_c - 1);
      const double se = std::sqrt(vt / n_t + vc / n_c);
      if (se == 0) throw Error(Errc::ZeroVariance, "oracle: zero variance");
      return (mt - mc) / se;
    }
  }
  return 0.0;
}

PValue exhaustive_p(const Dataset& d, const EffectSpec& e, const Statistic& stat, const Design& design, Tail tail) {
  const auto size = design.enumeration_size();
  if (!size || *size > kMaxOracleAssignments) throw Error(Errc::TooLargeForOracle, "more than 10^6 assignments");
  e.check_length(d.size());

  const std::size_t n = d.size();
  Schedule s;
  for (std::size_t i = 0; i < n; ++i) {
    const Unit& u = d[i];
    const double tau = e.at(i);
    s.y0.push_back(u.w == 1 ? u.y - tau : u.y);
    s.y1.push_back(u.w == 1 ? u.y : u.y + tau);
  }
  Assignment observed;
  for (const Unit& u : d.units()) observed.push_back(u.w);
  const double t_obs = naive_statistic(stat, observed, s);
  const bool exact = stat.kind() == StatKind::RankSum || stat.kind() == StatKind::Stephenson;
  const double slack = exact ? 0.0 : 1e-12 * std::max(1.0, std::fabs(t_obs));

  std::uint64_t count = 0;
  std::uint64_t total = 0;
  auto visit = [&](const Assignment& w) {
    const double t = naive_statistic(stat, w, s);
    ++total;
    if (tail == Tail::Upper ? t >= t_obs - slack : t <= t_obs + slack) ++count;
  };

  Assignment w(n, 0);
  if (const auto* pb = design.paired_blocks()) {
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == pb->pairs.size()) {
        visit(w);
        return;
      }
      for (int first = 0; first < 2; ++first) {
        w[pb->pairs[k][0]] = static_cast<std::uint8_t>(first);
        w[pb->pairs[k][1]] = static_cast<std::uint8_t>(1 - first);
        rec(k + 1);
      }
    };
    rec(0);
  } else {
    const std::size_t k = design.complete_randomization()->n_treated;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
      if (i == n) {
        if (left == 0) visit(w);
        return;
      }
      if (left > 0) {
        w[i] = 1;
        rec(i + 1, left - 1);
        w[i] = 0;
      }
      if (n - i - 1 >= left) rec(i + 1, left);
    };
    rec(0, k);
  }
  return PValue{static_cast<double>(count) / static_cast<double>(total), count, total, tail, true};
}

bool values_agree(double optimized, double oracle, bool integer_valued) noexcept {
  if (integer_valued) return optimized == oracle;
  return std::fabs(optimized - oracle) <= 1e-10 * std::max(1.0, std::fabs(oracle));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<Assignment> all_assignments(const Design& design) {
  std::vector<Assignment> out;
  const std::size_t n = design.n();
  Assignment w(n, 0);
  if (const auto* pb = design.paired_blocks()) {
    const std::size_t k = pb->pairs.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      for (std::size_t b = 0; b < k; ++b) {
        w[pb->pairs[b][0]] = (mask >> b) & 1U;
        w[pb->pairs[b][1]] = 1 - ((mask >> b) & 1U);
      }
      out.push_back(w);
    }
    return out;
  }
  const std::size_t k = design.complete_randomization()->n_treated;
  for_each_subset(n, k, [&](const std::vector<std::size_t>& treated) {
    std::fill(w.begin(), w.end(), 0);
    for (std::size_t i : treated) w[i] = 1;
    out.push_back(w);
  });
  return out;
}

double draw_value(random::Stream& rng, bool ties) {
  return ties ? static_cast<double>(rng.below(5)) : rng.normal();
}

double draw_nudge(random::Stream& rng, bool ties) {
  if (rng.below(2) == 0) return 0.0;
  return ties ? static_cast<double>(1 + rng.below(3)) : std::fabs(rng.normal()) * 2.0;
}

}  // namespace

OracleReport ei_property_check(const Statistic& stat, std::size_t trials, const Design& design, std::uint64_t seed,
                               bool inject_ties) {
  const std::size_t n = design.n();
  const auto assignments = all_assignments(design);
  OracleReport report;
  report.description = "effect-increasing check for " + stat.name() + " on " + design.describe();

  for (std::size_t trial = 0; trial < trials; ++trial) {
    random::Stream rng(seed, trial);
    const bool ties = inject_ties && rng.below(2) == 0;
    Schedule a;
    Schedule b;
    for (std::size_t i = 0; i < n; ++i) {
      a.y0.push_back(draw_value(rng, ties));
      a.y1.push_back(draw_value(rng, ties));
    }
    b = a;
    for (std::size_t i = 0; i < n; ++i) {
      b.y1[i] += draw_nudge(rng, ties);
      b.y0[i] -= draw_nudge(rng, ties);
    }
    Evaluator eval_a(stat, a);
    Evaluator eval_b(stat, b);
    for (const auto& w : assignments) {
      double ta;
      double tb;
      try {
        ta = eval_a(w);
        tb = eval_b(w);
      } catch (const Error&) {
        continue;  // statistic undefined here (e.g. zero variance)
      }
      ++report.cases;
      if (ta > tb) {
        ++report.violations;
        if (!report.witness) report.witness = EiWitness{a, b, w, ta, tb};
      }
    }
  }
  report.agree = report.violations == 0;
  if (report.witness) {
    report.optimized = report.witness->t_lower;
    report.oracle = report.witness->t_upper;
    report.discrepancy = report.witness->t_lower - report.witness->t_upper;
  }
  return report;
}

OracleReport check_stephenson(std::size_t trials, std::size_t max_n, std::size_t max_subset, std::uint64_t seed) {
  OracleReport report;
  report.description = "stephenson closed form vs subset enumeration";
  for (std::size_t trial = 0; trial < trials; ++trial) {
    random::Stream rng(seed, trial);
    const std::size_t n = 3 + rng.below(max_n - 2);  // 3..max_n
    const std::size_t s = 2 + rng.below(std::min(max_subset, n) - 1);
    const std::size_t levels = 1 + rng.below(n);  // few levels means many ties
    Schedule sched;
    Assignment w(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sched.y0.push_back(static_cast<double>(rng.below(levels)));
      sched.y1.push_back(static_cast<double>(rng.below(levels)));
      w[i] = static_cast<std::uint8_t>(rng.below(2));
    }
    const double fast = stephenson(w, sched, s);
    const double slow = static_cast<double>(stephenson_subset_count(w, sched, s));
    ++report.cases;
    if (!values_agree(fast, slow, true)) {
      ++report.violations;
      if (report.agree) {
        report.agree = false;
        report.optimized = fast;
        report.oracle = slow;
        report.discrepancy = fast - slow;
        std::ostringstream os;
        os << report.description << "; first mismatch at trial " << trial << " (n=" << n << ", s=" << s << ")";
        report.description = os.str();
      }
    }
  }
  return report;
}

OracleReport check_p_values(std::size_t trials, std::uint64_t seed) {
  OracleReport report;
  report.description = "refdist p_value vs exhaustive_p";
  for (std::size_t trial = 0; trial < trials; ++trial) {
    random::Stream rng(seed, trial);
    const bool paired = rng.below(4) == 0;
    const bool ties = rng.below(3) == 0;
    std::size_t n;
    std::vector<RawRow> rows;
    if (paired) {
      const std::size_t blocks = 2 + rng.below(5);
      n = 2 * blocks;
      for (std::size_t b = 0; b < blocks; ++b) {
        const auto first = static_cast<long long>(rng.below(2));
        for (long long j = 0; j < 2; ++j) {
          const double y = ties ? static_cast<double>(rng.below(4)) : rng.normal();
          rows.push_back(RawRow{std::to_string(rows.size()), j == 0 ? first : 1 - first, y, "b" + std::to_string(b)});
        }
      }
    } else {
      n = 4 + rng.below(7);  // 4..10
      const std::size_t n_t = 1 + rng.below(n - 1);
      Assignment w(n, 0);
      for (std::size_t i = 0; i < n_t; ++i) w[i] = 1;
      for (std::size_t i = n; i > 1; --i) std::swap(w[i - 1], w[rng.below(i)]);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = ties ? static_cast<double>(rng.below(4)) : rng.normal();
        rows.push_back(RawRow{std::to_string(i), w[i], y, std::nullopt});
      }
    }
    const Dataset d = validate_dataset(rows);
    const Design design = Design::from_dataset(d);

    Statistic stat = Statistic::diff_means();
    switch (rng.below(4)) {
      case 0: break;
      case 1: stat = Statistic::rank_sum(); break;
      case 2: stat = Statistic::stephenson(2 + rng.below(std::min<std::size_t>(n, 6) - 1)); break;
      case 3: stat = Statistic::threshold_proportion(ties ? 1.0 : 0.0); break;
    }
    EffectSpec e = EffectSpec::constant(0.0);
    switch (rng.below(3)) {
      case 0: break;
      case 1: e = EffectSpec::constant(ties ? -static_cast<double>(rng.below(3)) : -rng.uniform()); break;
      case 2: {
        std::vector<double> tau(n);
        for (double& t : tau) t = ties ? -static_cast<double>(rng.below(2)) : -rng.uniform();
        e = EffectSpec::per_unit(tau);
        break;
      }
    }
    const Tail tail = rng.below(2) == 0 ? Tail::Upper : Tail::Lower;

    const PValue fast = p_value(d, e, stat, design, ExactMode{}, tail, RunOptions{1, false}).p;
    const PValue slow = exhaustive_p(d, e, stat, design, tail);
    ++report.cases;
    if (fast.count != slow.count || fast.total != slow.total) {
      ++report.violations;
      if (report.agree) {
        report.agree = false;
        report.optimized = fast.p;
        report.oracle = slow.p;
        report.discrepancy = fast.p - slow.p;
        std::ostringstream os;
        os << report.description << "; first mismatch at trial " << trial << " (" << stat.name() << ", "
           << design.describe() << ", " << to_string(tail) << ")";
        report.description = os.str();
      }
    }
  }
  return report;
}

}  // namespace ribound::oracle
