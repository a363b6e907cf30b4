#include "genoseq/tokenizer.hpp"

#include <charconv>
#include <stdexcept>

#include "genoseq/kmer.hpp"

namespace genoseq {

TokenSequence frame_ids(std::vector<TokenId> ids, std::size_t max_len) {
    if (max_len < 3) {
        throw std::invalid_argument("max_len must be at least 3");
    }
    if (ids.size() > max_len - 2) {
        ids.resize(max_len - 2);
    }
    TokenSequence out;
    out.ids.reserve(max_len);
    out.ids.push_back(Vocabulary::kCls);
    out.ids.insert(out.ids.end(), ids.begin(), ids.end());
    out.ids.push_back(Vocabulary::kSep);
    out.valid_len = out.ids.size();
    out.ids.resize(max_len, Vocabulary::kPad);
    return out;
}

TokenSequence encode_ids(const std::vector<std::string>& tokens, const Vocabulary& vocab,
                         std::size_t max_len) {
    std::vector<TokenId> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) {
        ids.push_back(vocab.id(t));
    }
    return frame_ids(std::move(ids), max_len);
}

TokenizerSpec parse_tokenizer_spec(std::string_view descriptor) {
    if (descriptor.starts_with("bpe:")) {
        const std::string path(descriptor.substr(4));
        return BpeSpec{load_vocabulary(path), path};
    }
    if (descriptor.ends_with("mer")) {
        const auto digits = descriptor.substr(0, descriptor.size() - 3);
        int k = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
        if (ec == std::errc{} && ptr == digits.data() + digits.size() && k >= 1) {
            if (k > kMaxK) {
                throw TokenizerError(TokenizerError::Code::KTooLarge,
                                     "k = " + std::to_string(k) + " exceeds " +
                                         std::to_string(kMaxK));
            }
            return KmerSpec{k};
        }
    }
    throw TokenizerError(TokenizerError::Code::UnknownTokenizer,
                         "unknown tokenizer '" + std::string(descriptor) +
                             "' (expected 1mer..8mer or bpe:<vocab.json>)");
}

Tokenizer::Tokenizer(TokenizerSpec spec) : spec_(std::move(spec)) {
    if (const auto* kmer = std::get_if<KmerSpec>(&spec_)) {
        vocab_ = kmer_vocabulary(kmer->k);
    } else {
        const auto& bpe = std::get<BpeSpec>(spec_);
        if (!bpe.vocabulary.has_merges()) {
            throw TokenizerError(TokenizerError::Code::InvariantViolation,
                                 "BPE tokenizer needs a vocabulary with merges");
        }
        vocab_ = bpe.vocabulary;
        bpe_ = std::make_unique<BpeEncoder>(vocab_);
    }
}

int Tokenizer::k() const {
    if (const auto* kmer = std::get_if<KmerSpec>(&spec_)) {
        return kmer->k;
    }
    return 0;
}

std::string Tokenizer::label() const {
    if (is_bpe()) {
        return "BPE";
    }
    return std::to_string(k()) + "-mer";
}

std::vector<TokenId> Tokenizer::token_ids(const DnaSequence& sequence) const {
    if (bpe_) {
        return bpe_->encode(sequence.bases());
    }
    return kmer_token_ids(sequence.bases(), k());
}

std::vector<std::string> Tokenizer::tokenize(const DnaSequence& sequence) const {
    std::vector<std::string> tokens;
    for (const auto id : token_ids(sequence)) {
        tokens.push_back(vocab_.token(id));
    }
    return tokens;
}

TokenSequence Tokenizer::encode(const DnaSequence& sequence, std::size_t max_len) const {
    return frame_ids(token_ids(sequence), max_len);
}

}  // namespace genoseq
