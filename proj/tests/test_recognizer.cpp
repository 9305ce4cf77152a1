#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"

using namespace railtalk;

namespace {

bool contains_word(const CnSlot& s, const std::string& w) {
  return std::any_of(s.alternatives.begin(), s.alternatives.end(), [&](const Alternative& a) { return a.word == w; });
}

std::vector<std::string> words_of(const std::string& text) {
  return token_texts(tokenize(text, oracle::shipped().lexicon));
}

}  // namespace

TEST(ConfusionNetwork, TextRoundTrip) {
  const std::string text =
      "# seed 42\n"
      "# reference to milan\n"
      "0 to 0\n"
      "1 million -0.05\n"
      "1 milan -0.4\n"
      "2 <eps> -0.1 INS\n"
      "2 please -0.02 INS\n";
  const auto cn = ConfusionNetwork::from_string(text);
  ASSERT_EQ(cn.slots.size(), 3u);
  EXPECT_EQ(cn.seed, 42u);
  ASSERT_TRUE(cn.reference.has_value());
  EXPECT_EQ(*cn.reference, (std::vector<std::string>{"to", "milan"}));
  EXPECT_TRUE(cn.slots[2].insertion);
  EXPECT_TRUE(cn.slots[2].has_epsilon());
  EXPECT_EQ(cn.top_path(), (std::vector<std::string>{"to", "million", "please"}));
  EXPECT_EQ(ConfusionNetwork::from_string(cn.to_string()), cn);
}

TEST(ConfusionNetwork, RejectsBrokenInvariants) {
  EXPECT_THROW(ConfusionNetwork::from_string("0 to 0\n2 milan 0\n"), std::exception);
  EXPECT_THROW(ConfusionNetwork::from_string("0 please -0.1 INS\n"), std::exception);
  EXPECT_THROW(ConfusionNetwork::from_string("0 to nan\n"), std::exception);
  EXPECT_THROW(ConfusionNetwork::from_string("0 to\n"), std::exception);
  ConfusionNetwork cn;
  cn.slots.push_back({});
  EXPECT_THROW(cn.validate(), std::invalid_argument);
}

TEST(Corrupt, NoiselessIsIdentity) {
  const auto& r = oracle::shipped();
  const auto ref = words_of("i want to go to milan on friday");
  const auto cn = corrupt(ref, {}, 3, *r.confuser);
  ASSERT_EQ(cn.slots.size(), ref.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ASSERT_EQ(cn.slots[i].alternatives.size(), 1u);
    EXPECT_EQ(cn.slots[i].alternatives[0], (Alternative{ref[i], 0.0}));
  }
  EXPECT_EQ(cn.top_path(), ref);
}

TEST(Corrupt, TrueWordAlwaysPresentAndSeedDeterministic) {
  const auto& r = oracle::shipped();
  const auto ref = words_of("leaving from florence arriving in naples at nine pm");
  NoiseConfig noise{0.4, 0.2, 0.3, "edit", 4};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto cn = corrupt(ref, noise, seed, *r.confuser);
    EXPECT_NO_THROW(cn.validate());
    EXPECT_EQ(cn, corrupt(ref, noise, seed, *r.confuser));
    std::size_t k = 0;
    for (const auto& s : cn.slots) {
      EXPECT_LE(s.alternatives.size(), noise.max_alternatives);
      EXPECT_TRUE(std::is_sorted(s.alternatives.begin(), s.alternatives.end(),
                                 [](const Alternative& a, const Alternative& b) { return a.score > b.score; }));
      if (s.insertion) continue;
      ASSERT_LT(k, ref.size());
      EXPECT_TRUE(contains_word(s, ref[k])) << "seed " << seed << " word " << ref[k];
      ++k;
    }
    EXPECT_EQ(k, ref.size());
  }
}

TEST(Corrupt, RatesFollowTheConfiguration) {
  const auto& r = oracle::shipped();
  const auto ref = words_of("from milan to rome on monday at nine");
  std::size_t sub = 0, del = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const auto cn = corrupt(ref, {0.3, 0.1, 0.0, "edit", 4}, seed, *r.confuser);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      const auto& top = cn.slots[i].alternatives.front();
      ++total;
      if (top.is_epsilon()) {
        ++del;
      } else if (top.word != ref[i]) {
        ++sub;
      }
    }
  }
  EXPECT_NEAR(static_cast<double>(del) / static_cast<double>(total), 0.1, 0.02);
  EXPECT_NEAR(static_cast<double>(sub) / static_cast<double>(total), 0.3, 0.03);
}

TEST(Corrupt, InvalidNoiseIsRejected) {
  const auto& r = oracle::shipped();
  EXPECT_THROW(corrupt({"milan"}, {1.2, 0, 0, "edit", 4}, 1, *r.confuser), ConfigError);
  EXPECT_THROW(corrupt({"milan"}, {0.6, 0.6, 0, "edit", 4}, 1, *r.confuser), ConfigError);
  EXPECT_THROW(corrupt({"milan"}, {0.1, 0, 0, "phonetic", 4}, 1, *r.confuser), ConfigError);
  EXPECT_THROW(corrupt({"milan"}, {0.1, 0, 0, "edit", 0}, 1, *r.confuser), ConfigError);
}

TEST(Confuser, RanksBySimilarityWithLexicographicTies) {
  const auto& r = oracle::shipped();
  const auto c = r.confuser->confusable("milan", 5);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(std::count(c.begin(), c.end(), "milan"), 0);
  for (std::size_t i = 1; i < c.size(); ++i) {
    const double a = edit_similarity("milan", c[i - 1]), b = edit_similarity("milan", c[i]);
    EXPECT_TRUE(a > b || (a == b && c[i - 1] < c[i]));
  }
}

TEST(Decoder, MatchesExhaustiveEnumeration) {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto d = oracle::random_domain(rng.next(), 30);
    const auto lm = train_class_bigram(d->corpus, d->lexicon, {0.7, 1e-7});
    const auto cn = oracle::random_network(rng, d->words, 6, 4);
    DecodeOptions opt;
    opt.alpha = rng.chance(0.5) ? 1.0 : 0.5;
    if (rng.chance(0.3)) opt.class_bonus[d->lexicon.class_of(d->words[0])] = 0.5;
    const auto got = decode_continuous(cn, lm, opt);
    const auto want = oracle::enumerate_decode(cn, lm, opt);
    ASSERT_TRUE(got.ok);
    EXPECT_EQ(got.words, want.words) << cn.to_string();
    EXPECT_NEAR(got.total_log_score, want.total, 1e-9);
    double sum = got.boundary_score;
    for (double s : got.per_word_scores) sum += s;
    EXPECT_NEAR(sum, got.total_log_score, 1e-9);
  }
}

TEST(Decoder, ConstraintCanPruneTheTruth) {
  const auto& r = oracle::shipped();
  const auto cn = ConfusionNetwork::from_string("0 to 0\n1 milan -0.1\n1 million -0.5\n");
  DecodeOptions opt;
  opt.constraint = Vocabulary{"million", "to"};
  const auto d = decode_continuous(cn, r.family.global(), opt);
  ASSERT_TRUE(d.ok);
  EXPECT_EQ(d.words, (std::vector<std::string>{"to", "million"}));
  opt.constraint = Vocabulary{"to"};
  const auto fail = decode_continuous(cn, r.family.global(), opt);
  EXPECT_FALSE(fail.ok);
  EXPECT_FALSE(fail.failure.empty());
}

TEST(Decoder, EmptyNetworkDecodesToNothing) {
  const auto& r = oracle::shipped();
  const auto d = decode_continuous(ConfusionNetwork{}, r.family.global());
  EXPECT_TRUE(d.ok);
  EXPECT_TRUE(d.words.empty());
}

TEST(Decoder, LanguageModelRepairsSubstitution) {
  // The channel prefers a confusable word; the context model recovers the city.
  const auto& r = oracle::shipped();
  const auto ref = words_of("to milan");
  const auto& lm = r.family.select("ask_arrival");
  ConfusionNetwork cn;
  cn.slots.push_back({{{"to", 0.0}}, false});
  cn.slots.push_back({{{"million", -0.1}, {"milan", -0.6}}, false});
  const auto d = decode_continuous(cn, lm);
  EXPECT_EQ(d.words, ref);
}

TEST(Decoder, BatchParallelEqualsSerial) {
  const auto& r = oracle::shipped();
  std::vector<ConfusionNetwork> nets;
  for (std::uint64_t s = 0; s < 200; ++s) {
    nets.push_back(corrupt(words_of("i want to go to rome on the third of june"), {0.3, 0.1, 0.1, "edit", 4}, s,
                           *r.confuser));
  }
  const auto serial = decode_batch_serial(nets, r.family.global());
  EXPECT_EQ(decode_batch_parallel(nets, r.family.global(), {}, 4), serial);
  EXPECT_EQ(decode_batch_parallel(nets, r.family.global(), {}, 1), serial);
}

TEST(IsolatedDecoder, PicksBestVocabularyWord) {
  const auto cn = ConfusionNetwork::from_string("0 uhm -0.1\n1 milano -0.2\n1 million -0.1\n");
  const Vocabulary v{"milan", "rome", "turin"};
  const auto d = decode_isolated(cn, v);
  ASSERT_TRUE(d.ok);
  EXPECT_EQ(d.words, (std::vector<std::string>{"milan"}));
  EXPECT_NEAR(d.total_log_score, std::max(-0.2 + std::log(edit_similarity("milano", "milan")),
                                          -0.1 + std::log(edit_similarity("million", "milan"))),
              1e-12);
  EXPECT_EQ(d.mode, DecodeMode::isolated);

  const auto none = decode_isolated(ConfusionNetwork::from_string("0 xyzzy 0\n"), v);
  EXPECT_FALSE(none.ok);
  EXPECT_FALSE(decode_isolated(cn, {}).ok);
}

TEST(IsolatedDecoder, TiesGoToSmallestWord) {
  const auto cn = ConfusionNetwork::from_string("0 bari 0\n0 pisa 0\n");
  const auto d = decode_isolated(cn, Vocabulary{"pisa", "bari"});
  EXPECT_EQ(d.words, (std::vector<std::string>{"bari"}));
}

TEST(Predictions, SelectModelAndBuildConstraints) {
  const auto& r = oracle::shipped();
  Predictions p;
  p.state_tag = "ask_arrival";
  p.classes = {"city", "w:to"};
  auto ctx = apply_predictions(r.family, p);
  EXPECT_EQ(ctx.selected_tag, "ask_arrival");
  EXPECT_EQ(ctx.lm, &r.family.select("ask_arrival"));
  EXPECT_FALSE(ctx.options.constraint.has_value());
  EXPECT_DOUBLE_EQ(ctx.options.bonus(*r.lexicon.find_class("city")), 0.5);

  p.isolated = true;
  p.classes = {"city"};
  ctx = apply_predictions(r.family, p);
  ASSERT_TRUE(ctx.options.constraint.has_value());
  EXPECT_TRUE(ctx.options.constraint->count("milan"));
  EXPECT_FALSE(ctx.options.constraint->count("to"));
  EXPECT_TRUE(ctx.options.class_bonus.empty());

  p.classes = {"no-such-class"};
  EXPECT_THROW(apply_predictions(r.family, p), ConfigError);

  Predictions global;
  EXPECT_EQ(apply_predictions(r.family, global).lm, &r.family.global());
  EXPECT_EQ(apply_predictions(r.family, global).selected_tag, "");
}

TEST(Predictions, RecognizeDispatchesOnMode) {
  const auto& r = oracle::shipped();
  Predictions p;
  p.classes = {"city"};
  p.isolated = true;
  const auto cn = ConfusionNetwork::from_string("0 to 0\n1 millan -0.2\n");
  const auto d = recognize(cn, apply_predictions(r.family, p));
  EXPECT_EQ(d.mode, DecodeMode::isolated);
  EXPECT_EQ(d.words, (std::vector<std::string>{"milan"}));
}
