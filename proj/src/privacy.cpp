#include "ehrenc/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ehrenc/common.hpp"

namespace ehrenc {

HammingDistance hamming(std::span<const TokenId> a, std::span<const TokenId> b)
{
    if (a.size() != b.size()) {
        throw Error("hamming distance needs equal lengths, got " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    HammingDistance h;
    for (std::size_t i = 0; i < a.size(); ++i) h.raw += a[i] != b[i] ? 1 : 0;
    h.normalized = a.empty() ? 0.0 : static_cast<double>(h.raw) / static_cast<double>(a.size());
    return h;
}

void AttackConfig::validate() const
{
    if (n_r < 1) throw Error("n_r must be >= 1");
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (thresholds[i] < 0.0 || thresholds[i] > 1.0) throw Error("thresholds must lie in [0, 1]");
        if (i > 0 && thresholds[i] < thresholds[i - 1]) throw Error("thresholds must be sorted ascending");
    }
}

namespace {

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n, Rng& rng)
{
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(population - i)]);
    idx.resize(n);
    return idx;
}

double nearest(const std::vector<TokenId>& record, const std::vector<std::vector<TokenId>>& synthetic)
{
    double best = 1.0;
    for (const auto& s : synthetic) {
        best = std::min(best, hamming(record, s).normalized);
        if (best == 0.0) break;
    }
    return best;
}

}  // namespace

PrivacyReport membership_attack(const std::vector<std::vector<TokenId>>& train,
                                const std::vector<std::vector<TokenId>>& heldout,
                                const std::vector<std::vector<TokenId>>& synthetic, const AttackConfig& config)
{
    config.validate();
    if (train.size() < config.n_r || heldout.size() < config.n_r) {
        throw Error("need at least n_r=" + std::to_string(config.n_r) + " train and held-out records (have " +
                    std::to_string(train.size()) + " and " + std::to_string(heldout.size()) + ")");
    }

    Rng rng(config.seed);
    PrivacyReport report;
    for (auto i : sample_indices(train.size(), config.n_r, rng)) report.pool.push_back({true, i, 1.0});
    for (auto i : sample_indices(heldout.size(), config.n_r, rng)) report.pool.push_back({false, i, 1.0});
    for (auto& rec : report.pool) {
        // With no synthetic records nothing can match, even at threshold 1.
        rec.min_distance = synthetic.empty() ? std::numeric_limits<double>::infinity()
                                             : nearest(rec.member ? train[rec.source_index] : heldout[rec.source_index], synthetic);
    }

    for (double t : config.thresholds) {
        ThresholdResult r;
        r.threshold = t;
        for (std::size_t i = 0; i < report.pool.size(); ++i) {
            if (report.pool[i].min_distance <= t) {
                r.flagged_records.push_back(i);
                ++r.flagged;
                r.true_positives += report.pool[i].member ? 1 : 0;
            }
        }
        r.precision = r.flagged == 0 ? 0.0 : static_cast<double>(r.true_positives) / static_cast<double>(r.flagged);
        r.recall = static_cast<double>(r.true_positives) / static_cast<double>(config.n_r);
        report.results.push_back(std::move(r));
    }
    return report;
}

double binomial_two_sided_p(std::size_t k, std::size_t n, double p)
{
    if (k > n) throw Error("binomial: k > n");
    auto log_pmf = [&](std::size_t i) {
        return std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(p) +
               (n - i) * std::log1p(-p);
    };
    const double observed = log_pmf(k);
    double total = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double lp = log_pmf(i);
        if (lp <= observed + 1e-9) total += std::exp(lp);
    }
    return std::min(1.0, total);
}

}  // namespace ehrenc
