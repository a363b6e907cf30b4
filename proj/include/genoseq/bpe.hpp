#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "genoseq/corpus.hpp"
#include "genoseq/vocabulary.hpp"

namespace genoseq {

/// Number of merges that gives 4,096 DNA tokens (4 bases + merges), i.e. a
/// 4,100-entry vocabulary once the specials are included.
inline constexpr std::size_t kDefaultBpeMerges = 4096 - 4;

/// Learns up to `num_merges` merges from the corpus.
///
/// Each iteration counts every adjacent symbol pair over the whole corpus and
/// merges the most frequent one, breaking ties by the lexicographically
/// smallest (left, right) string pair. Training stops early once no pair
/// occurs at least twice. N is never merged and splits sequences into
/// independent words.
///
/// Two different merges can spell the same string (A+AC and AA+C); the
/// string gets one vocabulary entry, so the vocabulary size is
/// 8 + number of distinct merged strings <= 8 + merges().size().
Vocabulary bpe_train(std::span<const DnaSequence> corpus, std::size_t num_merges);

/// Replays a vocabulary's merges in learned order over a sequence.
class BpeEncoder {
public:
    explicit BpeEncoder(const Vocabulary& vocab);

    /// Each merge replaces all non-overlapping occurrences left to right.
    /// N becomes [UNK] and is never merged. The output has no CLS/SEP.
    std::vector<TokenId> encode(std::string_view sequence) const;

private:
    struct PairRanks {
        std::vector<std::size_t> ranks;  // ascending
    };

    static std::uint64_t key(TokenId left, TokenId right) noexcept {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(left)) << 32) |
               static_cast<std::uint32_t>(right);
    }

    TokenId base_ids_[4];
    std::unordered_map<std::uint64_t, PairRanks> ranks_;
    std::vector<TokenId> merged_id_;  // per rank
    std::vector<std::uint64_t> rank_key_;
};

/// Convenience wrapper returning token strings.
std::vector<std::string> bpe_encode(std::string_view sequence, const Vocabulary& vocab);

}  // namespace genoseq
