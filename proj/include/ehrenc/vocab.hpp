#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ehrenc {

using TokenId = std::int32_t;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kStartId = 1;
inline constexpr TokenId kEndId = 2;
inline constexpr TokenId kUnknownId = 3;
inline constexpr TokenId kFirstTimeGapId = 4;

/// Marker prefix of word-internal (continuation) units.
inline constexpr std::string_view kContinuation = "##";

struct VocabOptions {
    std::size_t timegap_tokens = 9;
    std::size_t min_count = 2;        ///< words seen fewer times fall back to characters
    std::size_t max_words = 30000;
};

/// Subword inventory. Layout by id: [PAD] [START] [END] [UNK] [TG0..TGk],
/// then byte fallbacks (word-initial and "##" continuation forms for every
/// non-whitespace printable ASCII and every byte >= 0x80), then word units.
class Vocabulary {
public:
    Vocabulary() : Vocabulary(9, {}) {}

    /// `extra_units` are appended after the reserved block and fallbacks;
    /// duplicates of existing units are ignored.
    Vocabulary(std::size_t timegap_tokens, const std::vector<std::string>& extra_units);

    /// Frequency-ranked words (ties broken lexicographically) with count >= min_count.
    static Vocabulary build(const std::vector<std::string>& texts, const VocabOptions& options = {});

    std::size_t size() const { return units_.size(); }
    std::size_t timegap_tokens() const { return timegap_tokens_; }

    std::optional<TokenId> find(std::string_view unit) const;
    const std::string& unit(TokenId id) const;

    /// Unit text without its continuation marker.
    std::string surface(TokenId id) const;
    bool is_continuation(TokenId id) const;
    bool is_reserved(TokenId id) const { return id >= 0 && id < first_fallback_id(); }

    TokenId timegap_token(std::size_t bucket) const;
    std::optional<std::size_t> timegap_bucket(TokenId id) const;

    /// Greedy longest match inside each whitespace-delimited word. Total: a
    /// byte no unit covers (control characters) becomes [UNK].
    std::vector<TokenId> tokenize(std::string_view text) const;
    std::vector<std::string> tokenize_units(std::string_view text) const;

    /// Plain text, one unit per line after a header line; bytes >= 0x80 and
    /// backslashes are escaped so the file stays valid UTF-8.
    std::string to_text() const;
    static Vocabulary from_text(std::string_view text);

    bool operator==(const Vocabulary& other) const { return units_ == other.units_; }

private:
    TokenId first_fallback_id() const { return kFirstTimeGapId + static_cast<TokenId>(timegap_tokens_); }
    void add(std::string unit);
    void tokenize_word(std::string_view word, std::vector<TokenId>& out) const;

    std::size_t timegap_tokens_ = 0;
    std::size_t max_unit_len_ = 0;
    std::vector<std::string> units_;
    std::unordered_map<std::string, TokenId> index_;
};

}  // namespace ehrenc
