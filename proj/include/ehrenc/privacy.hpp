#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ehrenc/vocab.hpp"

namespace ehrenc {

struct HammingDistance {
    std::size_t raw = 0;
    double normalized = 0.0;  ///< raw / length; 0 for empty sequences
};

HammingDistance hamming(std::span<const TokenId> a, std::span<const TokenId> b);

struct AttackConfig {
    std::size_t n_r = 100;
    std::vector<double> thresholds{0.0};
    std::uint64_t seed = 0;

    void validate() const;
};

struct ThresholdResult {
    double threshold = 0.0;
    double precision = 0.0;  ///< 0 when nothing is flagged
    double recall = 0.0;
    std::size_t flagged = 0;
    std::size_t true_positives = 0;
    std::vector<std::size_t> flagged_records;  ///< pool indices
};

struct PoolRecord {
    bool member = false;
    std::size_t source_index = 0;  ///< index into train or held-out input
    double min_distance = 1.0;     ///< nearest synthetic record, normalized
};

struct PrivacyReport {
    std::vector<PoolRecord> pool;  ///< n_r members then n_r non-members
    std::vector<ThresholdResult> results;
};

/// Samples n_r training and n_r held-out records, infers "member" when the
/// nearest synthetic record is within the normalized Hamming threshold, and
/// scores the inference against true membership.
PrivacyReport membership_attack(const std::vector<std::vector<TokenId>>& train,
                                const std::vector<std::vector<TokenId>>& heldout,
                                const std::vector<std::vector<TokenId>>& synthetic, const AttackConfig& config);

/// Two-sided exact binomial test p-value for k successes in n trials at p.
double binomial_two_sided_p(std::size_t k, std::size_t n, double p);

}  // namespace ehrenc
