#include <gtest/gtest.h>

#include <set>

#include "adhint/errors.hpp"
#include "adhint/task_world.hpp"

namespace adhint {
namespace {

const Vocab kVocab{};

TokenSeq syms(std::initializer_list<int> idx) {
  TokenSeq out;
  for (int i : idx) out.push_back(kVocab.symbol(i));
  return out;
}

TaskInstance make_task(Family f, TokenSeq query) {
  TaskInstance t;
  t.family = f;
  t.answer = derive_answer(f, query, kVocab);
  t.length = static_cast<int>(query.size());
  t.query = std::move(query);
  t.split = split_of(f, t.query);
  return t;
}

TEST(DeriveAnswer, Families) {
  EXPECT_EQ(derive_answer(Family::kReverse, syms({0, 1, 2}), kVocab), syms({2, 1, 0}));
  EXPECT_EQ(derive_answer(Family::kCyclicShift, syms({0, 1, 2}), kVocab), syms({1, 2, 0}));
  // running sums 2, 5, 9 taken mod 8
  EXPECT_EQ(derive_answer(Family::kModSum, syms({2, 3, 4}), kVocab), syms({2, 5, 1}));
}

TEST(DeriveAnswer, ModSumAlphabetFive) {
  Vocab v;
  v.alphabet = 5;
  TokenSeq q = {v.symbol(2), v.symbol(3), v.symbol(4)};
  TokenSeq want = {v.symbol(2), v.symbol(0), v.symbol(4)};
  EXPECT_EQ(derive_answer(Family::kModSum, q, v), want);
}

TEST(Verify, CorrectAndFormatOnly) {
  const auto task = make_task(Family::kReverse, syms({0, 1}));
  const TokenSeq good = {Vocab::kAnsOpen, kVocab.symbol(1), kVocab.symbol(0), Vocab::kAnsClose, Vocab::kEos};
  EXPECT_EQ(verify(task, good), (RewardBreakdown{1, 1, 1.0}));
  const TokenSeq wrong = {Vocab::kAnsOpen, kVocab.symbol(0), kVocab.symbol(1), Vocab::kAnsClose};
  const auto r = verify(task, wrong);
  EXPECT_EQ(r.answer_correct, 0);
  EXPECT_EQ(r.format_ok, 1);
  EXPECT_DOUBLE_EQ(r.total, 0.1);
}

TEST(Verify, MalformedScoresZero) {
  const auto task = make_task(Family::kReverse, syms({0, 1}));
  const Token o = Vocab::kAnsOpen, c = Vocab::kAnsClose;
  const Token a = kVocab.symbol(1), b = kVocab.symbol(0);
  for (const TokenSeq& resp : std::vector<TokenSeq>{{},
                                                     {a, b},
                                                     {c, a, b, o},
                                                     {o, a, b},
                                                     {o, o, a, b, c},
                                                     {o, a, b, c, c},
                                                     {Vocab::kEos, o, a, b, c}}) {
    const auto r = verify(task, resp);
    EXPECT_EQ(r.format_ok, 0);
    EXPECT_EQ(r.answer_correct, 0);
    EXPECT_EQ(r.total, 0.0);
  }
}

TEST(Verify, IgnoresTokensAfterEos) {
  const auto task = make_task(Family::kReverse, syms({0, 1}));
  const TokenSeq resp = {Vocab::kAnsOpen, kVocab.symbol(1), kVocab.symbol(0), Vocab::kAnsClose,
                         Vocab::kEos,    Vocab::kAnsOpen,  Vocab::kAnsOpen};
  EXPECT_EQ(verify(task, resp).total, 1.0);
}

TEST(Teacher, ReverseExample) {
  const auto task = make_task(Family::kReverse, syms({0, 1}));  // a b
  const auto e = teacher_trajectory(task);
  const Token a = kVocab.symbol(0), b = kVocab.symbol(1);
  const TokenSeq want = {Vocab::kFiller, b, Vocab::kFiller, a, Vocab::kAnsOpen, b, a, Vocab::kAnsClose, Vocab::kEos};
  EXPECT_EQ(e.teacher_trajectory, want);
  EXPECT_EQ(e.teacher_len, 9);
}

TEST(Teacher, AlwaysVerifies) {
  for (Family f : {Family::kReverse, Family::kCyclicShift, Family::kModSum})
    for (Split s : {Split::kTrain, Split::kHeldout})
      for (const auto& t : generate_tasks(f, 50, {2, 8}, 4, s, kVocab, 8)) {
        const auto e = teacher_trajectory(t);
        EXPECT_EQ(verify(t, e.teacher_trajectory).total, 1.0);
        EXPECT_EQ(e.teacher_len, 3 * t.length + 3);
      }
}

TEST(Generate, DeterministicAndInRange) {
  const auto a = generate_tasks(Family::kModSum, 100, {3, 5}, 9, Split::kTrain, kVocab, 8);
  const auto b = generate_tasks(Family::kModSum, 100, {3, 5}, 9, Split::kTrain, kVocab, 8);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 100u);
  for (const auto& t : a) {
    EXPECT_GE(t.length, 3);
    EXPECT_LE(t.length, 5);
    EXPECT_EQ(t.query.size(), static_cast<std::size_t>(t.length));
    for (Token s : t.query) EXPECT_TRUE(kVocab.is_symbol(s));
    EXPECT_EQ(t.answer, derive_answer(t.family, t.query, kVocab));
  }
  EXPECT_NE(a, generate_tasks(Family::kModSum, 100, {3, 5}, 10, Split::kTrain, kVocab, 8));
}

TEST(Generate, SplitsAreDisjoint) {
  for (Family f : {Family::kReverse, Family::kCyclicShift, Family::kModSum}) {
    std::set<TokenSeq> train;
    for (std::uint64_t seed : {0, 1, 2})
      for (const auto& t : generate_tasks(f, 300, {2, 4}, seed, Split::kTrain, kVocab, 8)) {
        EXPECT_EQ(t.split, Split::kTrain);
        train.insert(t.query);
      }
    for (std::uint64_t seed : {0, 1, 2})
      for (const auto& t : generate_tasks(f, 300, {2, 4}, seed, Split::kHeldout, kVocab, 8)) {
        EXPECT_EQ(t.split, Split::kHeldout);
        EXPECT_FALSE(train.count(t.query));
      }
  }
}

TEST(Generate, RejectsBadInput) {
  EXPECT_THROW(generate_tasks(Family::kReverse, 5, {1, 4}, 0, Split::kTrain, kVocab, 8), ConfigError);
  EXPECT_THROW(generate_tasks(Family::kReverse, 5, {5, 4}, 0, Split::kTrain, kVocab, 8), ConfigError);
  EXPECT_THROW(generate_tasks(Family::kReverse, 5, {2, 9}, 0, Split::kTrain, kVocab, 8), ConfigError);
  EXPECT_THROW(generate_tasks(Family::kReverse, -1, {2, 4}, 0, Split::kTrain, kVocab, 8), ConfigError);
  Vocab small;
  small.size = 10;
  EXPECT_THROW(generate_tasks(Family::kReverse, 5, {2, 4}, 0, Split::kTrain, small, 8), ConfigError);
  EXPECT_TRUE(generate_tasks(Family::kReverse, 0, {2, 4}, 0, Split::kTrain, kVocab, 8).empty());
}

TEST(Names, RoundTrip) {
  for (Family f : {Family::kReverse, Family::kCyclicShift, Family::kModSum})
    EXPECT_EQ(parse_family(to_string(f)), f);
  EXPECT_EQ(parse_split("heldout"), Split::kHeldout);
  EXPECT_THROW(parse_family("sort"), ConfigError);
  EXPECT_THROW(parse_split("test"), ConfigError);
}

}  // namespace
}  // namespace adhint
