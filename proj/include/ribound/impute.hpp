#pragma once

#include <string_view>

#include "ribound/core.hpp"

namespace ribound {

/// BothSides fills each unit's missing potential outcome from the hypothesized
/// effect. The baseline variants instead shift observed outcomes onto one arm
/// and test them against the no-effects null.
enum class ImputationVariant { BothSides, ControlBaseline, TreatedBaseline };

ImputationVariant parse_imputation(std::string_view text);
const char* to_string(ImputationVariant v) noexcept;

/// Treated units keep y1 = y and get y0 = y - tau0; control units keep
/// y0 = y and get y1 = y + tau0. Errors: LengthMismatch.
Schedule impute_schedule(const Dataset& d, const EffectSpec& e);

/// ControlBaseline: y0 = y1 = y - w * tau0. TreatedBaseline: y0 = y1 = y + (1 - w) * tau0.
Schedule impute_variant(const Dataset& d, const EffectSpec& e, ImputationVariant v);

}  // namespace ribound
