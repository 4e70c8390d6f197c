#pragma once

// Template bodies for AssignmentEnumerator; included from refdist.hpp.

namespace ribound {

template <typename F>
void AssignmentEnumerator::for_range(std::uint64_t begin, std::uint64_t end, F&& visit) const {
  if (end > size_) end = size_;
  if (begin >= end) return;
  const std::size_t n = design_->n();
  Assignment w(n, 0);

  if (const auto* pb = design_->paired_blocks()) {
    for (std::uint64_t mask = begin; mask < end; ++mask) {
      for (std::size_t k = 0; k < pb->pairs.size(); ++k) {
        const std::uint8_t bit = (mask >> k) & 1U;
        w[pb->pairs[k][0]] = bit;
        w[pb->pairs[k][1]] = bit ^ 1U;
      }
      visit(AssignmentView(w));
    }
    return;
  }

  const std::size_t k = design_->complete_randomization()->n_treated;
  std::vector<std::size_t> chosen(k);
  unrank_combination(begin, chosen);
  for (std::size_t i : chosen) w[i] = 1;

  for (std::uint64_t index = begin;;) {
    visit(AssignmentView(w));
    if (++index == end) break;
    // advance to the next combination in lexicographic order
    std::size_t pos = k;
    while (pos > 0 && chosen[pos - 1] == n - k + (pos - 1)) --pos;
    --pos;
    for (std::size_t j = pos; j < k; ++j) w[chosen[j]] = 0;
    ++chosen[pos];
    for (std::size_t j = pos + 1; j < k; ++j) chosen[j] = chosen[j - 1] + 1;
    for (std::size_t j = pos; j < k; ++j) w[chosen[j]] = 1;
  }
}

}  // namespace ribound
