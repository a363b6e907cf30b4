#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "genoseq/bpe.hpp"
#include "genoseq/corpus.hpp"
#include "genoseq/vocabulary.hpp"

namespace genoseq {

/// Model input: CLS, tokens, SEP, then PAD up to the requested length.
/// Positions >= valid_len are padding.
struct TokenSequence {
    std::vector<TokenId> ids;
    std::size_t valid_len = 0;

    /// Copy without the padding tail.
    TokenSequence trimmed() const {
        return {std::vector<TokenId>(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(valid_len)),
                valid_len};
    }

    friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Maps token strings to ids (unknown -> UNK), truncates to max_len - 2,
/// frames with CLS/SEP and pads to max_len. Requires max_len >= 3.
TokenSequence encode_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                         std::size_t max_len);

/// Same framing for already-mapped ids.
TokenSequence frame_ids(std::vector<TokenId> ids, std::size_t max_len);

struct KmerSpec {
    int k = 3;
};

struct BpeSpec {
    Vocabulary vocabulary;
    std::string source;  // file the vocabulary came from, for labels
};

using TokenizerSpec = std::variant<KmerSpec, BpeSpec>;

/// Parses a grid descriptor: `<k>mer` (k in 1..8) or `bpe:<vocab.json>`.
TokenizerSpec parse_tokenizer_spec(std::string_view descriptor);

/// Immutable, thread-safe after construction.
class Tokenizer {
public:
    explicit Tokenizer(TokenizerSpec spec);

    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    bool is_bpe() const noexcept { return std::holds_alternative<BpeSpec>(spec_); }
    int k() const;

    /// Table label: "3-mer" or "BPE".
    std::string label() const;

    std::vector<std::string> tokenize(const DnaSequence& sequence) const;
    std::vector<TokenId> token_ids(const DnaSequence& sequence) const;
    TokenSequence encode(const DnaSequence& sequence, std::size_t max_len) const;

private:
    TokenizerSpec spec_;
    Vocabulary vocab_;
    std::unique_ptr<BpeEncoder> bpe_;
};

}  // namespace genoseq
