#include "ehrenc/vocab.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "ehrenc/common.hpp"

namespace ehrenc {

namespace {

bool has_fallback(unsigned char c) { return (c >= 0x21 && c <= 0x7E) || c >= 0x80; }

bool continuation_unit(std::string_view u)
{
    return u.size() > kContinuation.size() && u.substr(0, kContinuation.size()) == kContinuation;
}

}  // namespace

Vocabulary::Vocabulary(std::size_t timegap_tokens, const std::vector<std::string>& extra_units)
    : timegap_tokens_(timegap_tokens)
{
    if (timegap_tokens == 0) throw Error("vocabulary needs at least one time-gap token");
    add("[PAD]");
    add("[START]");
    add("[END]");
    add("[UNK]");
    for (std::size_t i = 0; i < timegap_tokens; ++i) add("[TG" + std::to_string(i) + "]");
    for (int b = 0; b < 256; ++b) {
        const auto c = static_cast<unsigned char>(b);
        if (has_fallback(c)) add(std::string(1, static_cast<char>(c)));
    }
    for (int b = 0; b < 256; ++b) {
        const auto c = static_cast<unsigned char>(b);
        if (has_fallback(c)) add(std::string(kContinuation) + static_cast<char>(c));
    }
    for (const auto& u : extra_units) {
        const auto words = split_words(u);
        if (words.size() != 1 || words.front().size() != u.size()) {
            throw Error("vocabulary unit '" + u + "' is empty or contains whitespace");
        }
        if (!index_.contains(u)) add(u);
    }
}

void Vocabulary::add(std::string unit)
{
    const auto id = static_cast<TokenId>(units_.size());
    max_unit_len_ = std::max(max_unit_len_, unit.size());
    index_.emplace(unit, id);
    units_.push_back(std::move(unit));
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, const VocabOptions& options)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& t : texts) {
        for (auto& w : split_words(t)) {
            if (w.size() < 2 || continuation_unit(w) || w.substr(0, kContinuation.size()) == kContinuation) continue;
            ++counts[w];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> words;
    for (const auto& [w, n] : ranked) {
        if (n < options.min_count || words.size() >= options.max_words) break;
        words.push_back(w);
    }
    return Vocabulary(options.timegap_tokens, words);
}

std::optional<TokenId> Vocabulary::find(std::string_view unit) const
{
    auto it = index_.find(std::string(unit));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::unit(TokenId id) const
{
    if (id < 0 || static_cast<std::size_t>(id) >= units_.size()) {
        throw Error("token id " + std::to_string(id) + " outside vocabulary of size " + std::to_string(units_.size()));
    }
    return units_[static_cast<std::size_t>(id)];
}

bool Vocabulary::is_continuation(TokenId id) const { return !is_reserved(id) && continuation_unit(unit(id)); }

std::string Vocabulary::surface(TokenId id) const
{
    const auto& u = unit(id);
    return is_continuation(id) ? u.substr(kContinuation.size()) : u;
}

TokenId Vocabulary::timegap_token(std::size_t bucket) const
{
    if (bucket >= timegap_tokens_) throw Error("time-gap bucket " + std::to_string(bucket) + " has no token");
    return kFirstTimeGapId + static_cast<TokenId>(bucket);
}

std::optional<std::size_t> Vocabulary::timegap_bucket(TokenId id) const
{
    if (id < kFirstTimeGapId || id >= first_fallback_id()) return std::nullopt;
    return static_cast<std::size_t>(id - kFirstTimeGapId);
}

void Vocabulary::tokenize_word(std::string_view word, std::vector<TokenId>& out) const
{
    std::size_t pos = 0;
    std::string candidate;
    while (pos < word.size()) {
        const std::string_view prefix = pos == 0 ? std::string_view{} : kContinuation;
        const std::size_t longest = std::min(word.size() - pos, max_unit_len_);
        bool matched = false;
        for (std::size_t len = longest; len > 0; --len) {
            candidate.assign(prefix);
            candidate.append(word.substr(pos, len));
            if (auto it = index_.find(candidate); it != index_.end() && !is_reserved(it->second)) {
                out.push_back(it->second);
                pos += len;
                matched = true;
                break;
            }
        }
        if (!matched) {
            out.push_back(kUnknownId);
            ++pos;
        }
    }
}

std::vector<TokenId> Vocabulary::tokenize(std::string_view text) const
{
    std::vector<TokenId> out;
    for (const auto& w : split_words(text)) tokenize_word(w, out);
    return out;
}

std::vector<std::string> Vocabulary::tokenize_units(std::string_view text) const
{
    std::vector<std::string> out;
    for (auto id : tokenize(text)) out.push_back(unit(id));
    return out;
}

std::string Vocabulary::to_text() const
{
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out = "#ehrenc-vocab timegap=" + std::to_string(timegap_tokens_) + "\n";
    for (const auto& u : units_) {
        for (char ch : u) {
            const auto c = static_cast<unsigned char>(ch);
            if (c == '\\') {
                out += "\\\\";
            } else if (c >= 0x80) {
                out += "\\x";
                out += kHex[c >> 4];
                out += kHex[c & 0xF];
            } else {
                out += ch;
            }
        }
        out += '\n';
    }
    return out;
}

Vocabulary Vocabulary::from_text(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line.rfind("#ehrenc-vocab timegap=", 0) != 0) {
        throw Error("vocabulary file: missing '#ehrenc-vocab timegap=N' header");
    }
    std::size_t timegaps = 0;
    try {
        timegaps = std::stoul(line.substr(line.find('=') + 1));
    } catch (const std::exception&) {
        throw Error("vocabulary file: bad time-gap count");
    }
    auto unescape = [](const std::string& s) {
        std::string out;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s[i] != '\\') {
                out += s[i];
                continue;
            }
            if (i + 1 < s.size() && s[i + 1] == '\\') {
                out += '\\';
                ++i;
            } else if (i + 3 < s.size() && s[i + 1] == 'x') {
                out += static_cast<char>(std::stoi(s.substr(i + 2, 2), nullptr, 16));
                i += 3;
            } else {
                throw Error("vocabulary file: bad escape in '" + s + "'");
            }
        }
        return out;
    };
    std::vector<std::string> units;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        units.push_back(unescape(line));
    }
    Vocabulary base(timegaps, {});
    if (units.size() < base.size()) throw Error("vocabulary file: truncated reserved/fallback block");
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (units[i] != base.units_[i]) {
            throw Error("vocabulary file: line " + std::to_string(i + 2) + " does not match the reserved layout");
        }
    }
    std::vector<std::string> extra(units.begin() + static_cast<std::ptrdiff_t>(base.size()), units.end());
    Vocabulary v(timegaps, extra);
    if (v.size() != units.size()) throw Error("vocabulary file: duplicate units");
    return v;
}

}  // namespace ehrenc
