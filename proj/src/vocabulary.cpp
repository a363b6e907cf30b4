#include "genoseq/vocabulary.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace genoseq {

namespace {

constexpr int kFormatVersion = 1;

[[noreturn]] void invariant(const std::string& message) {
    throw TokenizerError(TokenizerError::Code::InvariantViolation, message);
}

}  // namespace

Vocabulary Vocabulary::from_base_tokens(std::vector<std::string> tokens,
                                        std::optional<std::vector<Merge>> merges) {
    std::vector<std::string> full;
    full.reserve(tokens.size() + kNumSpecials);
    full.emplace_back(kPadToken);
    full.emplace_back(kUnkToken);
    full.emplace_back(kClsToken);
    full.emplace_back(kSepToken);
    for (auto& t : tokens) {
        full.push_back(std::move(t));
    }
    return from_full_tokens(std::move(full), std::move(merges));
}

Vocabulary Vocabulary::from_full_tokens(std::vector<std::string> tokens,
                                        std::optional<std::vector<Merge>> merges) {
    Vocabulary vocab;
    vocab.tokens_ = std::move(tokens);
    vocab.merges_ = std::move(merges);
    vocab.build_index_and_validate();
    return vocab;
}

void Vocabulary::build_index_and_validate() {
    if (tokens_.size() < static_cast<std::size_t>(kNumSpecials) || tokens_[0] != kPadToken ||
        tokens_[1] != kUnkToken || tokens_[2] != kClsToken || tokens_[3] != kSepToken) {
        invariant("vocabulary must start with [PAD], [UNK], [CLS], [SEP]");
    }
    index_.clear();
    index_.reserve(tokens_.size());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].empty()) {
            invariant("empty token at id " + std::to_string(i));
        }
        if (!index_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
            invariant("duplicate token '" + tokens_[i] + "'");
        }
    }

    if (!merges_) {
        return;
    }
    std::set<std::string> known{"A", "C", "G", "T"};
    for (const auto& m : *merges_) {
        if (!known.contains(m.left) || !known.contains(m.right)) {
            invariant("merge (" + m.left + "," + m.right + ") uses a symbol not yet created");
        }
        known.insert(m.left + m.right);
    }
    const std::set<std::string> actual(tokens_.begin() + kNumSpecials, tokens_.end());
    if (actual != known) {
        invariant("merges do not regenerate the vocabulary's token set");
    }
}

TokenId Vocabulary::id(std::string_view token) const {
    return find(token).value_or(kUnk);
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

const std::vector<Merge>& Vocabulary::merges() const {
    if (!merges_) {
        throw std::logic_error("vocabulary has no merge list");
    }
    return *merges_;
}

std::string vocabulary_to_json(const Vocabulary& vocab) {
    nlohmann::ordered_json j;
    j["version"] = kFormatVersion;
    j["specials"] = {{"pad", Vocabulary::kPad},
                     {"unk", Vocabulary::kUnk},
                     {"cls", Vocabulary::kCls},
                     {"sep", Vocabulary::kSep}};
    j["tokens"] = vocab.tokens();
    if (vocab.has_merges()) {
        auto merges = nlohmann::ordered_json::array();
        for (const auto& m : vocab.merges()) {
            merges.push_back({m.left, m.right});
        }
        j["merges"] = std::move(merges);
    }
    return j.dump(1);
}

Vocabulary vocabulary_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw TokenizerError(TokenizerError::Code::ParseError, e.what());
    }

    try {
        if (j.at("version").get<int>() != kFormatVersion) {
            throw TokenizerError(TokenizerError::Code::ParseError,
                                 "unsupported vocabulary version " + j.at("version").dump());
        }
        const auto& specials = j.at("specials");
        if (specials.at("pad").get<int>() != Vocabulary::kPad ||
            specials.at("unk").get<int>() != Vocabulary::kUnk ||
            specials.at("cls").get<int>() != Vocabulary::kCls ||
            specials.at("sep").get<int>() != Vocabulary::kSep) {
            invariant("special token ids must be pad=0, unk=1, cls=2, sep=3");
        }
        auto tokens = j.at("tokens").get<std::vector<std::string>>();
        std::optional<std::vector<Merge>> merges;
        if (j.contains("merges")) {
            merges.emplace();
            for (const auto& pair : j.at("merges")) {
                if (!pair.is_array() || pair.size() != 2) {
                    throw TokenizerError(TokenizerError::Code::ParseError,
                                         "each merge must be a two-element array");
                }
                merges->push_back({pair[0].get<std::string>(), pair[1].get<std::string>()});
            }
        }
        return Vocabulary::from_full_tokens(std::move(tokens), std::move(merges));
    } catch (const nlohmann::json::exception& e) {
        throw TokenizerError(TokenizerError::Code::ParseError, e.what());
    }
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw TokenizerError(TokenizerError::Code::ParseError, "cannot write " + path.string());
    }
    out << vocabulary_to_json(vocab) << '\n';
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TokenizerError(TokenizerError::Code::ParseError, "cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return vocabulary_from_json(buffer.str());
}

}  // namespace genoseq
