#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace genoseq {

using TokenId = std::int32_t;

class TokenizerError : public std::runtime_error {
public:
    enum class Code {
        SequenceTooShort,
        KTooLarge,
        EmptyCorpus,
        ParseError,
        InvariantViolation,
        UnknownTokenizer,
    };

    TokenizerError(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// Ordered pair of symbols joined by one BPE merge step.
struct Merge {
    std::string left;
    std::string right;

    friend bool operator==(const Merge&, const Merge&) = default;
    friend auto operator<=>(const Merge&, const Merge&) = default;
};

/// Token <-> id table. Ids 0..3 are always PAD, UNK, CLS, SEP in that order.
/// A BPE vocabulary additionally carries its ordered merge list; replaying
/// the merges over {A,C,G,T} yields exactly the non-special tokens.
class Vocabulary {
public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kUnk = 1;
    static constexpr TokenId kCls = 2;
    static constexpr TokenId kSep = 3;
    static constexpr TokenId kNumSpecials = 4;

    static constexpr std::string_view kPadToken = "[PAD]";
    static constexpr std::string_view kUnkToken = "[UNK]";
    static constexpr std::string_view kClsToken = "[CLS]";
    static constexpr std::string_view kSepToken = "[SEP]";

    Vocabulary() = default;

    /// `tokens` excludes the specials; they are prepended here. Throws
    /// TokenizerError(InvariantViolation) on duplicates or merges that do not
    /// regenerate the token set.
    static Vocabulary from_base_tokens(std::vector<std::string> tokens,
                                       std::optional<std::vector<Merge>> merges = std::nullopt);

    /// `tokens` includes the four specials at the front.
    static Vocabulary from_full_tokens(std::vector<std::string> tokens,
                                       std::optional<std::vector<Merge>> merges = std::nullopt);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }

    /// Unknown strings map to kUnk.
    TokenId id(std::string_view token) const;
    std::optional<TokenId> find(std::string_view token) const;

    bool has_merges() const noexcept { return merges_.has_value(); }
    const std::vector<Merge>& merges() const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.tokens_ == b.tokens_ && a.merges_ == b.merges_;
    }

private:
    void build_index_and_validate();

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, TokenId> index_;
    std::optional<std::vector<Merge>> merges_;
};

std::string vocabulary_to_json(const Vocabulary& vocab);
Vocabulary vocabulary_from_json(std::string_view text);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace genoseq
