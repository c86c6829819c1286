#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "ehrenc/metrics.hpp"
#include "ehrenc/privacy.hpp"

using namespace ehrenc;

namespace {

using Records = std::vector<std::vector<TokenId>>;

std::size_t scan_hamming(const std::vector<TokenId>& a, const std::vector<TokenId>& b)
{
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) ++d;
    }
    return d;
}

Records random_records(std::size_t n, std::size_t len, TokenId lo, TokenId hi, Rng& rng)
{
    Records r(n, std::vector<TokenId>(len));
    for (auto& rec : r) {
        for (auto& t : rec) t = static_cast<TokenId>(rng.between(lo, hi));
    }
    return r;
}

/// Fraction of (positive, negative) pairs ordered correctly, ties counted half.
double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y)
{
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            pairs += 1.0;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / pairs;
}

}  // namespace

TEST(Hamming, Examples)
{
    const std::vector<TokenId> a{1, 2, 3, 4}, b{1, 9, 3, 4};
    EXPECT_EQ(hamming(a, a).raw, 0u);
    EXPECT_EQ(hamming(a, a).normalized, 0.0);
    EXPECT_EQ(hamming(a, b).raw, 1u);
    EXPECT_EQ(hamming(a, b).normalized, 0.25);
    EXPECT_THROW(hamming(a, std::vector<TokenId>{1, 2}), Error);
}

TEST(Hamming, SymmetryTriangleAndScanOracle)
{
    Rng rng(8);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = random_records(3, 32, 0, 3, rng);
        const auto ab = hamming(r[0], r[1]).raw;
        EXPECT_EQ(ab, scan_hamming(r[0], r[1]));
        EXPECT_EQ(ab, hamming(r[1], r[0]).raw);
        EXPECT_LE(hamming(r[0], r[2]).raw, ab + hamming(r[1], r[2]).raw);
    }
}

TEST(Attack, ExactCopyIsFlaggedAtZero)
{
    Rng rng(3);
    const auto train = random_records(20, 64, 10, 500, rng);
    const auto held = random_records(20, 64, 10, 500, rng);
    auto synthetic = random_records(10, 64, 600, 900, rng);
    AttackConfig cfg{5, {0.0, 0.5, 1.0}, 42};
    const auto probe = membership_attack(train, held, synthetic, cfg);
    const auto copied = probe.pool[0].source_index;
    synthetic.push_back(train[copied]);

    const auto r = membership_attack(train, held, synthetic, cfg);
    const auto& at0 = r.results[0];
    EXPECT_GE(at0.recall, 1.0 / cfg.n_r);
    EXPECT_TRUE(std::find(at0.flagged_records.begin(), at0.flagged_records.end(), 0u) != at0.flagged_records.end());
    for (auto i : at0.flagged_records) {
        const auto& rec = r.pool[i].member ? train[r.pool[i].source_index] : held[r.pool[i].source_index];
        EXPECT_TRUE(std::find(synthetic.begin(), synthetic.end(), rec) != synthetic.end());
    }
}

TEST(Attack, DisjointSyntheticFlagsNothing)
{
    Rng rng(5);
    const auto train = random_records(30, 16, 10, 20, rng);
    const auto held = random_records(30, 16, 10, 20, rng);
    const auto synthetic = random_records(30, 16, 100, 200, rng);
    const auto r = membership_attack(train, held, synthetic, {10, {0.0, 0.25, 0.5, 0.9}, 1});
    for (const auto& t : r.results) {
        EXPECT_EQ(t.precision, 0.0);
        EXPECT_EQ(t.recall, 0.0);
        EXPECT_EQ(t.flagged, 0u);
    }
}

TEST(Attack, ThresholdOneFlagsEverything)
{
    Rng rng(6);
    const auto train = random_records(30, 16, 10, 20, rng);
    const auto held = random_records(30, 16, 10, 20, rng);
    const auto synthetic = random_records(5, 16, 100, 200, rng);
    const auto r = membership_attack(train, held, synthetic, {12, {1.0}, 1});
    EXPECT_EQ(r.results[0].flagged, 24u);
    EXPECT_EQ(r.results[0].recall, 1.0);
    EXPECT_EQ(r.results[0].precision, 0.5);
}

TEST(Attack, FlaggedSetsAreNestedInThreshold)
{
    Rng rng(7);
    const auto train = random_records(50, 20, 0, 3, rng);
    const auto held = random_records(50, 20, 0, 3, rng);
    const auto synthetic = random_records(40, 20, 0, 3, rng);
    std::vector<double> thresholds;
    for (int i = 0; i <= 20; ++i) thresholds.push_back(i / 20.0);
    const auto r = membership_attack(train, held, synthetic, {25, thresholds, 9});
    for (std::size_t i = 1; i < r.results.size(); ++i) {
        EXPECT_GE(r.results[i].recall, r.results[i - 1].recall);
        const std::set<std::size_t> small(r.results[i - 1].flagged_records.begin(), r.results[i - 1].flagged_records.end());
        const std::set<std::size_t> big(r.results[i].flagged_records.begin(), r.results[i].flagged_records.end());
        EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    }
}

TEST(Attack, SameSeedSamePool)
{
    Rng rng(1);
    const auto train = random_records(40, 8, 0, 9, rng);
    const auto held = random_records(40, 8, 0, 9, rng);
    const auto syn = random_records(10, 8, 0, 9, rng);
    const auto a = membership_attack(train, held, syn, {10, {0.5}, 3});
    const auto b = membership_attack(train, held, syn, {10, {0.5}, 3});
    for (std::size_t i = 0; i < a.pool.size(); ++i) EXPECT_EQ(a.pool[i].source_index, b.pool[i].source_index);
}

TEST(Attack, Preconditions)
{
    const Records few(3, std::vector<TokenId>(4, 1));
    EXPECT_THROW(membership_attack(few, few, few, {5, {0.0}, 0}), Error);
    EXPECT_THROW(membership_attack(few, few, few, {0, {0.0}, 0}), Error);
    EXPECT_THROW(membership_attack(few, few, few, {2, {0.5, 0.1}, 0}), Error);
}

TEST(Binomial, KnownValues)
{
    EXPECT_NEAR(binomial_two_sided_p(5, 10, 0.5), 1.0, 1e-12);
    // P(X <= 1) + P(X >= 9) for n=10: 2 * 11 / 1024.
    EXPECT_NEAR(binomial_two_sided_p(1, 10, 0.5), 22.0 / 1024.0, 1e-12);
    EXPECT_NEAR(binomial_two_sided_p(0, 4, 0.5), 2.0 / 16.0, 1e-12);
}

TEST(TokenAccuracy, Examples)
{
    const std::vector<TokenId> ref{5, 6, 7, 8, kPadId, kPadId};
    EXPECT_EQ(token_accuracy(ref, ref), 1.0);
    const std::vector<TokenId> hyp{5, 6, 7, 9, kPadId, 3};
    EXPECT_EQ(token_accuracy(ref, hyp), 0.75);
    EXPECT_EQ(token_accuracy(ref, hyp, true), 4.0 / 6.0);
    const std::vector<TokenId> pads(4, kPadId);
    EXPECT_FALSE(token_accuracy(pads, pads).has_value());
    EXPECT_THROW(token_accuracy(ref, pads), Error);

    TokenStream a, b;
    a.rows = b.rows = 1;
    a.cols = 4;
    b.cols = 4;
    a.tokens = {1, 2, 3, 4};
    b.tokens = {1, 2, 3, 4};
    EXPECT_EQ(token_accuracy(a, b), 1.0);
    b.rows = 2;
    b.cols = 2;
    EXPECT_THROW(token_accuracy(a, b), Error);
}

TEST(Auroc, Examples)
{
    EXPECT_EQ(auroc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<int>{0, 0, 1, 1}), 1.0);
    EXPECT_EQ(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
    EXPECT_EQ(auroc(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{0, 1, 1}), 0.5);
    EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);
    EXPECT_THROW(auroc(std::vector<double>{NAN, 0.2}, std::vector<int>{0, 1}), Error);
}

TEST(Auroc, MatchesPairwiseOracle)
{
    Rng rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng.below(60);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = static_cast<double>(rng.below(12)) / 4.0;  // coarse grid forces ties
            y[i] = static_cast<int>(rng.below(2));
        }
        y[0] = 0;
        y[1] = 1;
        ASSERT_NEAR(auroc(s, y), pairwise_auroc(s, y), 1e-12);
    }
}

TEST(Auroc, InvariantUnderMonotoneTransform)
{
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> s(30), t(30);
        std::vector<int> y(30);
        for (std::size_t i = 0; i < 30; ++i) {
            s[i] = rng.unit() * 4.0 - 2.0;
            t[i] = std::exp(3.0 * s[i]) + 7.0;
            y[i] = static_cast<int>(rng.below(2));
        }
        y[0] = 0;
        y[1] = 1;
        EXPECT_EQ(auroc(s, y), auroc(t, y));
    }
}
