#include "ribound/impute.hpp"

#include <string>

namespace ribound {

ImputationVariant parse_imputation(std::string_view text) {
  if (text == "both") return ImputationVariant::BothSides;
  if (text == "control-baseline") return ImputationVariant::ControlBaseline;
  if (text == "treated-baseline") return ImputationVariant::TreatedBaseline;
  throw Error(Errc::InvalidArgument,
              "unknown imputation '" + std::string(text) + "' (expected both, control-baseline, treated-baseline)");
}

const char* to_string(ImputationVariant v) noexcept {
  switch (v) {
    case ImputationVariant::BothSides: return "both";
    case ImputationVariant::ControlBaseline: return "control-baseline";
    case ImputationVariant::TreatedBaseline: return "treated-baseline";
  }
  return "?";
}

Schedule impute_schedule(const Dataset& d, const EffectSpec& e) {
  e.check_length(d.size());
  const std::size_t n = d.size();
  Schedule s;
  s.y0.resize(n);
  s.y1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = d[i].y;
    const double tau = e.at(i);
    if (d[i].w) {
      s.y1[i] = y;
      s.y0[i] = y - tau;
    } else {
      s.y0[i] = y;
      s.y1[i] = y + tau;
    }
  }
  return s;
}

Schedule impute_variant(const Dataset& d, const EffectSpec& e, ImputationVariant v) {
  if (v == ImputationVariant::BothSides) return impute_schedule(d, e);
  e.check_length(d.size());
  const std::size_t n = d.size();
  std::vector<double> adjusted(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = d[i].y;
    const double tau = e.at(i);
    if (v == ImputationVariant::ControlBaseline)
      adjusted[i] = d[i].w ? y - tau : y;
    else
      adjusted[i] = d[i].w ? y : y + tau;
  }
  return Schedule{adjusted, adjusted};
}

}  // namespace ribound
