#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "test_util.hpp"
#include "textlevel/extractor.hpp"
#include "textlevel/features.hpp"
#include "textlevel/synth.hpp"

using namespace textlevel;

namespace {

SynthProfile profile_from_file(const std::string& rel) {
  std::ifstream in(std::string(TEXTLEVEL_DATA_DIR) + "/" + rel);
  REQUIRE(in.good());
  return load_profile(in);
}

}  // namespace

TEST_CASE("the synthetic library pairs parts across levels") {
  const TemplateLibrary lib = synthetic_library();
  CHECK(lib.size() == 40);
  for (Level l : kLevelsEasyFirst) CHECK(lib.at_level(l).size() == 8);
  // Distinct templates never share a marker pair.
  std::set<std::pair<std::string, std::string>> pairs;
  for (const LibraryEntry& e : lib.entries()) {
    REQUIRE(e.spec.elements.size() == 2);
    CHECK(pairs.emplace(e.spec.elements[0].surface, e.spec.elements[1].surface)
              .second);
  }
}

TEST_CASE("zero profile generates a corpus that matches nothing") {
  const Corpus corpus = generate_synthetic(SynthProfile{}, 4, 6, 1);
  const TemplateLibrary lib = synthetic_library();
  CHECK(corpus.documents.size() == 20);
  for (const Document& doc : corpus.documents)
    for (const ExtractionResult& r : extract_document(doc, lib))
      CHECK(r.identified.empty());
}

TEST_CASE("a single nonzero cell fills exactly that cell") {
  SynthProfile profile;
  profile.per100(level_index(Level::N3), level_index(Level::N2)) = 40.0;
  const Corpus corpus = generate_synthetic(profile, 5, 10, 2);
  const StatTables tables = corpus_stats(corpus, synthetic_library());
  for (int tpl = 0; tpl < 5; ++tpl)
    for (int text = 0; text < 5; ++text) {
      const double got = tables.per100(tpl, text);
      if (tpl == level_index(Level::N3) && text == level_index(Level::N2))
        CHECK(got == doctest::Approx(40.0));
      else
        CHECK(got == 0.0);
    }
}

TEST_CASE("realized statistics stay within ten percent of the profile") {
  const SynthProfile profile = profile_from_file("profiles/reference_per100.csv");
  const Corpus corpus = generate_synthetic(profile, 50, 40, 7);
  const StatTables tables = corpus_stats(corpus, synthetic_library());
  for (int tpl = 0; tpl < 5; ++tpl)
    for (int text = 0; text < 5; ++text) {
      const double target = profile.per100(tpl, text);
      const double got = tables.per100(tpl, text);
      if (target == 0.0) {
        CHECK(got == 0.0);
      } else {
        CHECK(std::fabs(got - target) / target <= 0.10);
      }
    }
}

TEST_CASE("generated corpora are valid and deterministic") {
  const SynthProfile profile = profile_from_file("profiles/synthetic_eval.csv");
  const Corpus corpus = generate_synthetic(profile, 6, 8, 99);
  std::ostringstream first;
  save_corpus(first, corpus);
  {
    std::istringstream in(first.str());
    CHECK(load_corpus(in) == corpus);  // all invariants hold on reload
  }
  std::ostringstream second;
  save_corpus(second, generate_synthetic(profile, 6, 8, 99));
  CHECK(second.str() == first.str());
}

TEST_CASE("infeasible profiles are rejected") {
  SynthProfile negative;
  negative.per100(0, 0) = -1.0;
  CHECK_THROWS_WITH_AS(generate_synthetic(negative, 2, 2, 0),
                       doctest::Contains("negative"), InvariantError);

  SynthProfile too_dense;
  too_dense.per100(0, 0) = 900.0;  // more than 8 distinct templates/sentence
  CHECK_THROWS_WITH_AS(generate_synthetic(too_dense, 2, 2, 0),
                       doctest::Contains("infeasible"), InvariantError);

  CHECK_THROWS_AS(generate_synthetic(SynthProfile{}, 0, 2, 0), InvariantError);
}
