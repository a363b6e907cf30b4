#include "genoseq/perturb.hpp"

#include <charconv>
#include <stdexcept>

namespace genoseq {

namespace {

constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

// 2^64 is divisible by 4, so the low bits of a full-width draw are unbiased.
char random_base(Rng& rng) { return kBases[rng() & 3U]; }

std::size_t parse_count(std::string_view text, std::string_view whole) {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw std::invalid_argument("bad perturbation count in '" + std::string(whole) + "'");
    }
    return value;
}

}  // namespace

Perturbation Perturbation::parse(std::string_view text) {
    if (text == "original") {
        return original();
    }
    const auto colon = text.find(':');
    const auto head = text.substr(0, colon);
    const std::size_t n =
        colon == std::string_view::npos ? 3 : parse_count(text.substr(colon + 1), text);
    if (head == "end-sub") {
        return end_substitution(n);
    }
    if (head == "head-del") {
        return head_delete_tail_fill(n);
    }
    throw std::invalid_argument("unknown perturbation '" + std::string(text) + "'");
}

std::string Perturbation::name() const {
    switch (kind) {
        case Kind::Original:
            return "original";
        case Kind::EndSubstitution:
            return "end-sub:" + std::to_string(n);
        case Kind::HeadDeleteTailFill:
            return "head-del:" + std::to_string(n);
    }
    return "unknown";
}

DnaSequence perturb(const DnaSequence& sequence, const Perturbation& kind, Rng& rng) {
    if (kind.kind == Perturbation::Kind::Original) {
        return sequence;
    }
    const std::size_t len = sequence.size();
    if (kind.n >= len) {
        throw CorpusError(CorpusError::Code::PerturbationTooLarge,
                          kind.name() + " needs a sequence longer than " +
                              std::to_string(kind.n) + " bases, got " + std::to_string(len));
    }

    std::string out = sequence.bases();
    if (kind.kind == Perturbation::Kind::EndSubstitution) {
        for (std::size_t i = 0; i < kind.n; ++i) {
            out[i] = random_base(rng);
        }
        for (std::size_t i = len - kind.n; i < len; ++i) {
            out[i] = random_base(rng);
        }
    } else {
        out.erase(0, kind.n);
        for (std::size_t i = 0; i < kind.n; ++i) {
            out.push_back(random_base(rng));
        }
    }
    return DnaSequence(std::move(out));
}

}  // namespace genoseq
