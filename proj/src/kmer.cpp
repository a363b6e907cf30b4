#include "genoseq/kmer.hpp"

namespace genoseq {

namespace {

int base_index(char c) noexcept {
    switch (c) {
        case 'A':
            return 0;
        case 'C':
            return 1;
        case 'G':
            return 2;
        case 'T':
            return 3;
        default:
            return -1;
    }
}

void check_k(std::size_t len, int k) {
    if (k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (k > kMaxK) {
        throw TokenizerError(TokenizerError::Code::KTooLarge,
                             "k=" + std::to_string(k) + " exceeds the maximum of 8");
    }
    if (len < static_cast<std::size_t>(k)) {
        throw TokenizerError(TokenizerError::Code::SequenceTooShort,
                             "sequence of length " + std::to_string(len) +
                                 " is shorter than k=" + std::to_string(k));
    }
}

}  // namespace

std::vector<std::string> kmer_tokenize(std::string_view sequence, int k) {
    check_k(sequence.size(), k);
    const std::size_t width = static_cast<std::size_t>(k);
    std::vector<std::string> tokens;
    tokens.reserve(sequence.size() - width + 1);
    for (std::size_t i = 0; i + width <= sequence.size(); ++i) {
        const auto window = sequence.substr(i, width);
        if (window.find('N') != std::string_view::npos) {
            tokens.emplace_back(Vocabulary::kUnkToken);
        } else {
            tokens.emplace_back(window);
        }
    }
    return tokens;
}

Vocabulary kmer_vocabulary(int k) {
    if (k < 1) {
        throw std::invalid_argument("k must be at least 1");
    }
    if (k > kMaxK) {
        throw TokenizerError(TokenizerError::Code::KTooLarge,
                             "k=" + std::to_string(k) + " exceeds the maximum of 8");
    }
    static constexpr char kBases[4] = {'A', 'C', 'G', 'T'};
    const std::size_t count = std::size_t{1} << (2 * k);
    std::vector<std::string> tokens;
    tokens.reserve(count);
    std::string kmer(static_cast<std::size_t>(k), 'A');
    for (std::size_t value = 0; value < count; ++value) {
        std::size_t v = value;
        for (int pos = k - 1; pos >= 0; --pos) {
            kmer[static_cast<std::size_t>(pos)] = kBases[v & 3U];
            v >>= 2;
        }
        tokens.push_back(kmer);
    }
    return Vocabulary::from_base_tokens(std::move(tokens));
}

std::vector<TokenId> kmer_token_ids(std::string_view sequence, int k) {
    check_k(sequence.size(), k);
    const std::size_t width = static_cast<std::size_t>(k);
    const std::uint32_t mask = (1U << (2 * k)) - 1U;
    std::vector<TokenId> ids;
    ids.reserve(sequence.size() - width + 1);

    std::uint32_t value = 0;
    // Number of trailing bases since the most recent N.
    std::size_t clean_run = 0;
    for (std::size_t i = 0; i < sequence.size(); ++i) {
        const int b = base_index(sequence[i]);
        if (b < 0) {
            clean_run = 0;
            value = 0;
        } else {
            value = ((value << 2) | static_cast<std::uint32_t>(b)) & mask;
            ++clean_run;
        }
        if (i + 1 >= width) {
            ids.push_back(clean_run >= width
                              ? Vocabulary::kNumSpecials + static_cast<TokenId>(value)
                              : Vocabulary::kUnk);
        }
    }
    return ids;
}

}  // namespace genoseq
