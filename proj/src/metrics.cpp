#include "ehrenc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ehrenc/common.hpp"

namespace ehrenc {

std::optional<double> token_accuracy(std::span<const TokenId> reference, std::span<const TokenId> hypothesis,
                                     bool include_pads)
{
    if (reference.size() != hypothesis.size()) {
        throw Error("token streams differ in length: " + std::to_string(reference.size()) + " vs " +
                    std::to_string(hypothesis.size()));
    }
    std::size_t considered = 0;
    std::size_t matches = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        if (!include_pads && reference[i] == kPadId) continue;
        ++considered;
        matches += reference[i] == hypothesis[i] ? 1 : 0;
    }
    if (considered == 0) return std::nullopt;
    return static_cast<double>(matches) / static_cast<double>(considered);
}

std::optional<double> token_accuracy(const TokenStream& reference, const TokenStream& hypothesis, bool include_pads)
{
    if (reference.rows != hypothesis.rows || reference.cols != hypothesis.cols) {
        throw Error("token stream shapes differ: " + std::to_string(reference.rows) + "x" + std::to_string(reference.cols) +
                    " vs " + std::to_string(hypothesis.rows) + "x" + std::to_string(hypothesis.cols));
    }
    return token_accuracy(std::span<const TokenId>(reference.tokens), std::span<const TokenId>(hypothesis.tokens), include_pads);
}

double auroc(std::span<const double> scores, std::span<const int> labels)
{
    if (scores.size() != labels.size()) throw Error("auroc: scores and labels differ in length");
    std::size_t positives = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) throw Error("auroc: non-finite score at index " + std::to_string(i));
        if (labels[i] != 0 && labels[i] != 1) throw Error("auroc: labels must be 0 or 1");
        positives += labels[i] == 1 ? 1 : 0;
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) throw Error("auroc needs both positive and negative labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Ranks are 1-based; tied runs share the mean of their ranks.
    double positive_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) positive_rank_sum += midrank;
        }
        i = j;
    }
    const double p = static_cast<double>(positives);
    const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(negatives));
}

}  // namespace ehrenc
