#include "genoseq/bpe.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_set>

namespace genoseq {

namespace {

using Symbol = std::uint32_t;

std::uint64_t pair_key(Symbol left, Symbol right) noexcept {
    return (static_cast<std::uint64_t>(left) << 32) | right;
}
Symbol key_left(std::uint64_t key) noexcept { return static_cast<Symbol>(key >> 32); }
Symbol key_right(std::uint64_t key) noexcept { return static_cast<Symbol>(key & 0xffffffffU); }

class SymbolTable {
public:
    Symbol intern(const std::string& s) {
        const auto [it, inserted] = index_.emplace(s, static_cast<Symbol>(strings_.size()));
        if (inserted) {
            strings_.push_back(s);
        }
        return it->second;
    }
    const std::string& str(Symbol s) const { return strings_[s]; }
    const std::vector<std::string>& strings() const noexcept { return strings_; }

private:
    std::vector<std::string> strings_;
    std::unordered_map<std::string, Symbol> index_;
};

struct Word {
    std::vector<Symbol> symbols;
    std::int64_t count = 0;
};

struct HeapEntry {
    std::int64_t count;
    Symbol left;
    Symbol right;
};

// Max-heap order: higher count first, then the smaller (left, right) strings.
struct HeapOrder {
    const SymbolTable* table;
    bool operator()(const HeapEntry& x, const HeapEntry& y) const {
        if (x.count != y.count) {
            return x.count < y.count;
        }
        return std::tie(table->str(x.left), table->str(x.right)) >
               std::tie(table->str(y.left), table->str(y.right));
    }
};

// Left-to-right non-overlapping replacement of (left, right) by merged.
void merge_in_place(std::vector<Symbol>& symbols, Symbol left, Symbol right, Symbol merged) {
    std::size_t out = 0;
    std::size_t i = 0;
    while (i < symbols.size()) {
        if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
            symbols[out++] = merged;
            i += 2;
        } else {
            symbols[out++] = symbols[i++];
        }
    }
    symbols.resize(out);
}

bool contains_pair(const std::vector<Symbol>& symbols, Symbol left, Symbol right) {
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
        if (symbols[i] == left && symbols[i + 1] == right) {
            return true;
        }
    }
    return false;
}

}  // namespace

Vocabulary bpe_train(std::span<const DnaSequence> corpus, std::size_t num_merges) {
    if (corpus.empty()) {
        throw TokenizerError(TokenizerError::Code::EmptyCorpus, "BPE corpus is empty");
    }

    SymbolTable table;
    for (const char* base : {"A", "C", "G", "T"}) {
        table.intern(base);
    }

    // Identical N-free segments share one entry weighted by multiplicity.
    std::unordered_map<std::string, std::int64_t> segment_counts;
    for (const auto& seq : corpus) {
        const std::string& bases = seq.bases();
        std::size_t start = 0;
        while (start < bases.size()) {
            const std::size_t stop = std::min(bases.find('N', start), bases.size());
            if (stop > start) {
                ++segment_counts[bases.substr(start, stop - start)];
            }
            start = stop + 1;
        }
    }
    std::vector<std::pair<std::string, std::int64_t>> segments(segment_counts.begin(),
                                                               segment_counts.end());
    std::sort(segments.begin(), segments.end());

    std::vector<Word> words;
    words.reserve(segments.size());
    for (const auto& [text, count] : segments) {
        Word w;
        w.count = count;
        w.symbols.reserve(text.size());
        for (char c : text) {
            w.symbols.push_back(table.intern(std::string(1, c)));
        }
        words.push_back(std::move(w));
    }

    std::unordered_map<std::uint64_t, std::int64_t> pair_counts;
    // Words that may contain a pair. Entries can be stale; they are re-checked.
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> pair_words;
    for (std::uint32_t wi = 0; wi < words.size(); ++wi) {
        const auto& s = words[wi].symbols;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const auto k = pair_key(s[i], s[i + 1]);
            pair_counts[k] += words[wi].count;
            pair_words[k].push_back(wi);
        }
    }

    std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapOrder> heap(HeapOrder{&table});
    for (const auto& [k, count] : pair_counts) {
        heap.push({count, key_left(k), key_right(k)});
    }

    std::vector<Merge> merges;
    merges.reserve(num_merges);
    std::unordered_set<std::uint64_t> touched;
    while (merges.size() < num_merges) {
        // Discard heap entries whose count is out of date.
        while (!heap.empty()) {
            const auto& top = heap.top();
            const auto it = pair_counts.find(pair_key(top.left, top.right));
            if (it != pair_counts.end() && it->second == top.count) {
                break;
            }
            heap.pop();
        }
        if (heap.empty() || heap.top().count < 2) {
            break;
        }
        const Symbol left = heap.top().left;
        const Symbol right = heap.top().right;
        heap.pop();

        const Symbol merged = table.intern(table.str(left) + table.str(right));
        merges.push_back({table.str(left), table.str(right)});

        const auto chosen = pair_key(left, right);
        std::vector<std::uint32_t> candidates = std::move(pair_words[chosen]);
        pair_words.erase(chosen);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        touched.clear();
        for (const auto wi : candidates) {
            Word& w = words[wi];
            if (!contains_pair(w.symbols, left, right)) {
                continue;
            }
            for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
                const auto k = pair_key(w.symbols[i], w.symbols[i + 1]);
                pair_counts[k] -= w.count;
                touched.insert(k);
            }
            merge_in_place(w.symbols, left, right, merged);
            for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
                const auto k = pair_key(w.symbols[i], w.symbols[i + 1]);
                pair_counts[k] += w.count;
                touched.insert(k);
                if (w.symbols[i] == merged || w.symbols[i + 1] == merged) {
                    pair_words[k].push_back(wi);
                }
            }
        }
        for (const auto k : touched) {
            const auto it = pair_counts.find(k);
            if (it->second <= 0) {
                pair_counts.erase(it);
                pair_words.erase(k);
            } else {
                heap.push({it->second, key_left(k), key_right(k)});
            }
        }
    }

    return Vocabulary::from_base_tokens(table.strings(), std::move(merges));
}

BpeEncoder::BpeEncoder(const Vocabulary& vocab) {
    const char* bases[4] = {"A", "C", "G", "T"};
    for (int b = 0; b < 4; ++b) {
        const auto id = vocab.find(bases[b]);
        if (!id) {
            throw TokenizerError(TokenizerError::Code::InvariantViolation,
                                 "BPE vocabulary lacks base token " + std::string(bases[b]));
        }
        base_ids_[b] = *id;
    }
    const auto& merges = vocab.merges();
    merged_id_.reserve(merges.size());
    rank_key_.reserve(merges.size());
    for (std::size_t r = 0; r < merges.size(); ++r) {
        const auto left = vocab.find(merges[r].left);
        const auto right = vocab.find(merges[r].right);
        const auto merged = vocab.find(merges[r].left + merges[r].right);
        if (!left || !right || !merged) {
            throw TokenizerError(TokenizerError::Code::InvariantViolation,
                                 "merge " + std::to_string(r) + " refers to unknown tokens");
        }
        const auto k = key(*left, *right);
        ranks_[k].ranks.push_back(r);
        merged_id_.push_back(*merged);
        rank_key_.push_back(k);
    }
}

std::vector<TokenId> BpeEncoder::encode(std::string_view sequence) const {
    std::vector<TokenId> symbols;
    symbols.reserve(sequence.size());
    for (char c : sequence) {
        switch (c) {
            case 'A':
                symbols.push_back(base_ids_[0]);
                break;
            case 'C':
                symbols.push_back(base_ids_[1]);
                break;
            case 'G':
                symbols.push_back(base_ids_[2]);
                break;
            case 'T':
                symbols.push_back(base_ids_[3]);
                break;
            default:
                symbols.push_back(Vocabulary::kUnk);
                break;
        }
    }

    // Skipping straight to the lowest applicable rank is equivalent to
    // running every merge pass in order: passes for absent pairs are no-ops.
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::size_t next_rank = 0;
    while (symbols.size() > 1) {
        std::size_t best = kNone;
        for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
            if (symbols[i] == Vocabulary::kUnk || symbols[i + 1] == Vocabulary::kUnk) {
                continue;
            }
            const auto it = ranks_.find(key(symbols[i], symbols[i + 1]));
            if (it == ranks_.end()) {
                continue;
            }
            const auto& ranks = it->second.ranks;
            const auto r = std::lower_bound(ranks.begin(), ranks.end(), next_rank);
            if (r != ranks.end() && *r < best) {
                best = *r;
            }
        }
        if (best == kNone) {
            break;
        }
        const auto k = rank_key_[best];
        const auto left = static_cast<TokenId>(k >> 32);
        const auto right = static_cast<TokenId>(k & 0xffffffffU);
        const TokenId merged = merged_id_[best];
        std::size_t out = 0;
        std::size_t i = 0;
        while (i < symbols.size()) {
            if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
                symbols[out++] = merged;
                i += 2;
            } else {
                symbols[out++] = symbols[i++];
            }
        }
        symbols.resize(out);
        next_rank = best + 1;
    }
    return symbols;
}

std::vector<std::string> bpe_encode(std::string_view sequence, const Vocabulary& vocab) {
    const BpeEncoder encoder(vocab);
    std::vector<std::string> tokens;
    for (const auto id : encoder.encode(sequence)) {
        tokens.push_back(vocab.token(id));
    }
    return tokens;
}

}  // namespace genoseq
