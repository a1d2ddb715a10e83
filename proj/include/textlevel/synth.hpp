#ifndef TEXTLEVEL_SYNTH_HPP_
#define TEXTLEVEL_SYNTH_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>

#include "textlevel/corpus.hpp"
#include "textlevel/templates.hpp"

namespace textlevel {

// Target number of identified templates per 100 sentences, indexed
// (template level, text level) via level_index.
struct SynthProfile {
  Eigen::Matrix<double, 5, 5> per100 = Eigen::Matrix<double, 5, 5>::Zero();
};

// Reads the CSV shape emitted by `stats` for the per-100 table.
SynthProfile load_profile(std::istream& in);

// The fixed marker-pair library the generator writes against: eight
// templates per level, each matching a unique adjacent token pair whose
// parts are shared across levels.
TemplateLibrary synthetic_library();

// Deterministic corpus of parse trees whose realized per-100-sentence
// template statistics track the profile (quota allocation, so the
// deviation is rounding only). Throws InvariantError on infeasible
// profiles (negative targets, or more distinct templates per sentence
// than the library holds).
Corpus generate_synthetic(const SynthProfile& profile, int docs_per_level,
                          int sentences_per_doc, std::uint64_t seed);

}  // namespace textlevel

#endif  // TEXTLEVEL_SYNTH_HPP_
