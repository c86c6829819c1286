#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ehrenc/serializer.hpp"

namespace ehrenc {

/// Fraction of positions where the hypothesis token equals the reference.
/// Reference padding is skipped unless include_pads; nullopt when no position
/// is left to compare.
std::optional<double> token_accuracy(const TokenStream& reference, const TokenStream& hypothesis, bool include_pads = false);
std::optional<double> token_accuracy(std::span<const TokenId> reference, std::span<const TokenId> hypothesis,
                                     bool include_pads = false);

/// Area under the ROC curve from the Mann-Whitney rank sum with midranks for ties.
double auroc(std::span<const double> scores, std::span<const int> labels);

}  // namespace ehrenc
