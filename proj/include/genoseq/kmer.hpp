#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "genoseq/vocabulary.hpp"

namespace genoseq {

inline constexpr int kMaxK = 8;

/// Stride-1 sliding window of width k: len - k + 1 tokens. Windows that
/// contain an N become "[UNK]".
std::vector<std::string> kmer_tokenize(std::string_view sequence, int k);

/// Specials followed by all 4^k strings over {A,C,G,T} in lexicographic
/// order, so token id = 4 + (base-4 value of the k-mer with A=0..T=3).
Vocabulary kmer_vocabulary(int k);

/// Direct id computation equivalent to looking up kmer_tokenize() output in
/// kmer_vocabulary(k). Does not add CLS/SEP.
std::vector<TokenId> kmer_token_ids(std::string_view sequence, int k);

}  // namespace genoseq
