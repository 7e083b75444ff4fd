#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "asrpost/rescore.hpp"
#include "support/test_util.hpp"

using namespace asrpost;

namespace {

// Counts backend calls; used for the score-exactly-once and caching checks.
class CountingScorer final : public LmScorer {
 public:
  explicit CountingScorer(std::map<std::string, double> table) : table_(std::move(table)) {}

  double score(const std::string& text) override {
    ++calls_;
    auto it = table_.find(text);
    if (it == table_.end()) {
      throw ScorerError("unknown text: " + text);
    }
    return it->second;
  }

  std::string id() const override { return "counting"; }
  int calls() const { return calls_; }

 private:
  std::map<std::string, double> table_;
  int calls_ = 0;
};

NBestList make_list(std::vector<std::pair<std::string, double>> hyps) {
  NBestList list;
  list.utterance_id = "u";
  for (auto& [text, score] : hyps) {
    list.hypotheses.push_back({std::move(text), score});
  }
  return list;
}

}  // namespace

TEST_SUITE("rescore") {

TEST_CASE("combine is the weighted log-linear sum") {
  CHECK(combine(-5.0, -2.0, {0.0}) == -5.0);
  CHECK(combine(-5.0, -2.0, {3.0}) == -11.0);
  CHECK(combine(0.0, 0.0, {4.5}) == 0.0);
}

TEST_CASE("combine rejects non-finite input and bad alpha") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(combine(nan, -1.0, {1.0}), ValidationError);
  CHECK_THROWS_AS(combine(-1.0, -inf, {1.0}), ValidationError);
  CHECK_THROWS_AS(combine(-1.0, -1.0, {-0.5}), ValidationError);
  CHECK_THROWS_AS(combine(-1.0, -1.0, {nan}), ValidationError);
}

TEST_CASE("single-hypothesis list rescoring") {
  CountingScorer scorer({{"only", -2.0}});
  const RescoredList rescored = rescore_list(make_list({{"only", -1.0}}), scorer, {2.0});
  REQUIRE(rescored.entries.size() == 1);
  CHECK(rescored.entries[0].text == "only");
  CHECK(rescored.entries[0].combined_score == -5.0);
  CHECK(scorer.calls() == 1);
}

TEST_CASE("alpha zero degenerates to the ASR ranking") {
  CountingScorer scorer({{"a", -9.0}, {"b", -1.0}, {"c", -5.0}});
  const RescoredList rescored =
      rescore_list(make_list({{"a", -3.0}, {"b", -1.0}, {"c", -2.0}}), scorer, {0.0});
  REQUIRE(rescored.entries.size() == 3);
  CHECK(rescored.entries[0].text == "b");
  CHECK(rescored.entries[1].text == "c");
  CHECK(rescored.entries[2].text == "a");
}

TEST_CASE("LM can flip the top hypothesis") {
  // Independent brute-force check of the argmax of the combined score.
  const std::vector<std::pair<double, double>> scores = {
      {-1.0, -8.0}, {-1.5, -2.0}, {-2.0, -3.0}};  // (asr, lm)
  const double alpha = 1.0;
  size_t expected_top = 0;
  double best = -1e300;
  for (size_t i = 0; i < scores.size(); ++i) {
    const double combined = scores[i].first + alpha * scores[i].second;
    if (combined > best) {
      best = combined;
      expected_top = i;
    }
  }
  CHECK(expected_top == 1);  // hand check: -9, -3.5, -5

  CountingScorer scorer({{"h0", scores[0].second}, {"h1", scores[1].second}, {"h2", scores[2].second}});
  const RescoredList rescored = rescore_list(
      make_list({{"h0", scores[0].first}, {"h1", scores[1].first}, {"h2", scores[2].first}}),
      scorer, {alpha});
  CHECK(rescored.entries[0].text == "h1");
  CHECK(scorer.calls() == 3);
}

TEST_CASE("ties break by original decoder rank") {
  CountingScorer scorer({{"first", -1.0}, {"second", -1.0}});
  const RescoredList rescored =
      rescore_list(make_list({{"first", -2.0}, {"second", -2.0}}), scorer, {1.0});
  CHECK(rescored.entries[0].text == "first");
  CHECK(rescored.entries[0].original_rank == 0);
  CHECK(rescored.entries[1].original_rank == 1);
}

TEST_CASE("permutation invariance up to tie order") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> asr(-10.0, 0.0);
  std::uniform_real_distribution<double> lm(-8.0, -0.1);
  for (int round = 0; round < 50; ++round) {
    std::map<std::string, double> table;
    NBestList list;
    list.utterance_id = "p";
    for (int k = 0; k < 6; ++k) {
      const std::string text = "hyp" + std::to_string(k);
      table[text] = lm(rng);
      list.hypotheses.push_back({text, asr(rng)});
    }
    CountingScorer scorer(table);
    const RescoredList base = rescore_list(list, scorer, {1.7});

    NBestList shuffled = list;
    std::shuffle(shuffled.hypotheses.begin(), shuffled.hypotheses.end(), rng);
    CountingScorer scorer2(table);
    const RescoredList permuted = rescore_list(shuffled, scorer2, {1.7});

    // Distinct scores almost surely: same text order out.
    for (size_t i = 0; i < base.entries.size(); ++i) {
      CHECK(base.entries[i].text == permuted.entries[i].text);
    }
  }
}

TEST_CASE("raising one hypothesis's LM score never lowers its rank") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> asr(-10.0, 0.0);
  std::uniform_real_distribution<double> lm(-8.0, -0.1);
  std::uniform_real_distribution<double> bump(0.1, 4.0);
  for (int round = 0; round < 200; ++round) {
    std::map<std::string, double> table;
    NBestList list;
    list.utterance_id = "m";
    const int n = 2 + static_cast<int>(rng() % 7);
    for (int k = 0; k < n; ++k) {
      const std::string text = "hyp" + std::to_string(k);
      table[text] = lm(rng);
      list.hypotheses.push_back({text, asr(rng)});
    }
    const int target = static_cast<int>(rng() % n);
    const std::string target_text = "hyp" + std::to_string(target);

    CountingScorer before(table);
    const RescoredList base = rescore_list(list, before, {2.5});
    auto rank_of = [&](const RescoredList& rescored) {
      for (size_t i = 0; i < rescored.entries.size(); ++i) {
        if (rescored.entries[i].text == target_text) {
          return i;
        }
      }
      return rescored.entries.size();
    };
    const size_t rank_before = rank_of(base);

    table[target_text] = std::min(0.0, table[target_text] + bump(rng));
    CountingScorer after(table);
    const size_t rank_after = rank_of(rescore_list(list, after, {2.5}));
    CHECK(rank_after <= rank_before);
  }
}

TEST_CASE("shifting all LM scores leaves the ranking unchanged") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> asr(-10.0, 0.0);
  std::uniform_real_distribution<double> lm(-9.0, -3.0);
  for (int round = 0; round < 50; ++round) {
    std::map<std::string, double> table;
    NBestList list;
    list.utterance_id = "s";
    for (int k = 0; k < 5; ++k) {
      const std::string text = "hyp" + std::to_string(k);
      table[text] = lm(rng);
      list.hypotheses.push_back({text, asr(rng)});
    }
    CountingScorer scorer(table);
    const RescoredList base = rescore_list(list, scorer, {2.0});

    std::map<std::string, double> shifted = table;
    for (auto& [text, value] : shifted) {
      value -= 2.5;  // keeps scores <= 0
    }
    CountingScorer scorer2(shifted);
    const RescoredList moved = rescore_list(list, scorer2, {2.0});
    for (size_t i = 0; i < base.entries.size(); ++i) {
      CHECK(base.entries[i].text == moved.entries[i].text);
    }
  }
}

TEST_CASE("scorer failure aborts the list with the utterance id") {
  CountingScorer scorer({{"known", -1.0}});
  NBestList list = make_list({{"known", -1.0}, {"unknown", -2.0}});
  list.utterance_id = "u42";
  try {
    rescore_list(list, scorer, {1.0});
    FAIL("expected ScorerError");
  } catch (const ScorerError& e) {
    CHECK(e.utterance_id() == "u42");
  }
}

TEST_CASE("scorer contract violations are rejected") {
  class BadScorer final : public LmScorer {
   public:
    double score(const std::string&) override { return 0.5; }
    std::string id() const override { return "bad"; }
  } bad;
  CHECK_THROWS_AS(rescore_list(make_list({{"a", -1.0}}), bad, {1.0}), ScorerError);
}

TEST_CASE("truncate keeps the top entries") {
  CountingScorer scorer({{"a", -1.0}, {"b", -2.0}, {"c", -3.0}});
  RescoredList rescored = rescore_list(make_list({{"a", -1.0}, {"b", -1.0}, {"c", -1.0}}), scorer, {1.0});
  const RescoredList cut = truncate_to(std::move(rescored), 2);
  REQUIRE(cut.entries.size() == 2);
  CHECK(cut.entries[0].text == "a");
  CHECK(cut.entries[1].text == "b");
  CHECK_THROWS_AS(truncate_to(RescoredList{}, 0), ValidationError);
}

TEST_CASE("hash scorer is deterministic, finite, and non-positive") {
  HashScorer scorer;
  for (const auto* text : {"", "a", "hello world", "don't stop"}) {
    const double first = scorer.score(text);
    CHECK(first == scorer.score(text));
    CHECK(std::isfinite(first));
    CHECK(first <= 0.0);
  }
  CHECK(scorer.score("a") != scorer.score("b"));
}

TEST_CASE("file scorer loads, serves, and reports missing texts") {
  using testsupport::TempDir;
  using testsupport::write_file;
  TempDir dir;
  const std::string path = dir.file("scores.jsonl");
  write_file(path, "{\"text\":\"a b\",\"log_prob\":-1.25}\n{\"text\":\"c\",\"log_prob\":-3.5}\n");
  TableScorer scorer = TableScorer::from_jsonl(path);
  CHECK(scorer.score("a b") == -1.25);
  CHECK_THROWS_AS(scorer.score("zzz"), ScorerError);
  CHECK_THROWS_AS(TableScorer::from_jsonl("/nonexistent.jsonl"), IoError);
  CHECK_THROWS_AS(TableScorer({{"bad", 1.0}}), ValidationError);
}

TEST_CASE("caching scorer calls the backend once per unique text") {
  auto counting = std::make_shared<CountingScorer>(
      std::map<std::string, double>{{"x", -1.0}, {"y", -2.0}});
  CachingScorer cache(counting);
  CHECK(cache.score("x") == -1.0);
  CHECK(cache.score("x") == -1.0);
  CHECK(cache.score("y") == -2.0);
  CHECK(cache.score("x") == -1.0);
  CHECK(counting->calls() == 2);
  CHECK(cache.cache_size() == 2);
}

}  // TEST_SUITE
