#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "genoseq/corpus.hpp"
#include "genoseq/random.hpp"

namespace genoseq {

/// Sequence alteration used for robustness evaluation.
///
///  - Original: identity.
///  - EndSubstitution(n): the first n and last n bases are each redrawn
///    uniformly from {A,C,G,T}. A draw may reproduce the original base, so
///    the expected change rate per position is 3/4.
///  - HeadDeleteTailFill(n): drop the first n bases, shift left, and fill the
///    last n positions with uniform random bases. Length is preserved.
struct Perturbation {
    enum class Kind { Original, EndSubstitution, HeadDeleteTailFill };

    Kind kind = Kind::Original;
    std::size_t n = 0;

    static constexpr Perturbation original() { return {Kind::Original, 0}; }
    static constexpr Perturbation end_substitution(std::size_t n_per_end = 3) {
        return {Kind::EndSubstitution, n_per_end};
    }
    static constexpr Perturbation head_delete_tail_fill(std::size_t n = 3) {
        return {Kind::HeadDeleteTailFill, n};
    }

    /// `original`, `end-sub:<n>` or `head-del:<n>`; the count defaults to 3.
    static Perturbation parse(std::string_view text);
    std::string name() const;

    friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

/// Never emits N. Throws CorpusError(PerturbationTooLarge) when n >= length.
DnaSequence perturb(const DnaSequence& sequence, const Perturbation& kind, Rng& rng);

}  // namespace genoseq
