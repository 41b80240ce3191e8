#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "patpoisson/errors.hpp"
#include "patpoisson/overlap.hpp"

using namespace patpoisson;

namespace {

std::vector<int> naive_reduce(std::vector<int> w) {
  std::vector<int> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  for (int& x : w) x = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) + 1;
  return w;
}

// Every sigma in S_{2m-s}, checked window by window.
std::set<std::string> brute_sequential(const std::vector<int>& tau, int s) {
  const int m = static_cast<int>(tau.size()), n = 2 * m - s;
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  std::set<std::string> out;
  do {
    const std::vector<int> head(v.begin(), v.begin() + m), tail(v.end() - m, v.end());
    if (naive_reduce(head) == tau && naive_reduce(tail) == tau) out.insert(Permutation(v).to_string());
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

// Pairs of m-subsets of [2m-s] meeting in s points, both reducing to tau.
std::pair<std::size_t, std::uint64_t> brute_classical(const std::vector<int>& tau, int s) {
  const int m = static_cast<int>(tau.size()), n = 2 * m - s;
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 1);
  std::size_t perms = 0;
  std::uint64_t pairs = 0;
  do {
    std::vector<std::uint32_t> hits;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      if (std::popcount(mask) != m) continue;
      std::vector<int> sub;
      for (int i = 0; i < n; ++i)
        if (mask >> i & 1) sub.push_back(v[static_cast<std::size_t>(i)]);
      if (naive_reduce(sub) == tau) hits.push_back(mask);
    }
    std::uint64_t here = 0;
    for (std::size_t a = 0; a < hits.size(); ++a)
      for (std::size_t b = a + 1; b < hits.size(); ++b) here += std::popcount(hits[a] & hits[b]) == s;
    perms += here > 0;
    pairs += here;
  } while (std::next_permutation(v.begin(), v.end()));
  return {perms, pairs};
}

std::vector<std::pair<std::string, int>> listing(const OverlapTable& t) {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& w : t.witnesses) out.emplace_back(w.perm.to_string(), w.inv_count);
  return out;
}

}  // namespace

TEST(SequentialOverlap, Pattern2341) {
  const auto t = sequential_overlap(Pattern::parse("2341"), 1);
  const std::vector<std::pair<std::string, int>> expected{
      {"3452671", 9},  {"3462571", 10}, {"3472561", 11}, {"3562471", 11}, {"3572461", 12},
      {"3672451", 13}, {"4562371", 12}, {"4572361", 13}, {"4672351", 14}, {"5672341", 15}};
  EXPECT_EQ(listing(t), expected);
  EXPECT_EQ(inversion_polynomial(t).to_string(), "q^9(1+q+2q^2+2q^3+2q^4+q^5+q^6)");
}

TEST(SequentialOverlap, Pattern23451) {
  const auto t = sequential_overlap(Pattern::parse("23451"), 1);
  const std::vector<std::pair<std::string, int>> expected{
      {"345627891", 12}, {"345726891", 13}, {"345826791", 14}, {"345926781", 15}, {"346725891", 14},
      {"346825791", 15}, {"346925781", 16}, {"347825691", 16}, {"347925681", 17}, {"348925671", 18},
      {"356724891", 15}, {"356824791", 16}, {"356924781", 17}, {"357824691", 17}, {"357924681", 18},
      {"358924671", 19}, {"367824591", 18}, {"367924581", 19}, {"368924571", 20}, {"378924561", 21},
      {"456723891", 16}, {"456823791", 17}, {"456923781", 18}, {"457823691", 18}, {"457923681", 19},
      {"458923671", 20}, {"467823591", 19}, {"467923581", 20}, {"468923571", 21}, {"478923561", 22},
      {"567823491", 20}, {"567923481", 21}, {"568923471", 22}, {"578923461", 23}, {"678923451", 24}};
  EXPECT_EQ(listing(t), expected);
  EXPECT_EQ(inversion_polynomial(t).to_string(), "q^12(1+q+2q^2+3q^3+4q^4+4q^5+5q^6+4q^7+4q^8+3q^9+2q^10+q^11+q^12)");
}

TEST(SequentialOverlap, MisprintedListingsAreNotPermutations) {
  // Two entries of the printed 23451 listing repeat a digit; the corrected
  // forms differ in one position and are the witnesses above.
  EXPECT_THROW(Permutation::parse("346924781"), InvalidInput);
  EXPECT_THROW(Permutation::parse("356824781"), InvalidInput);
}

TEST(SequentialOverlap, LargerOverlapsAreEmpty) {
  for (int s : {2, 3}) EXPECT_EQ(sequential_overlap(Pattern::parse("2341"), s).size(), 0u);
  for (int s : {2, 3, 4}) EXPECT_EQ(sequential_overlap(Pattern::parse("23451"), s).size(), 0u);
}

TEST(SequentialOverlap, SmallPatterns) {
  EXPECT_EQ(sequential_overlap(Pattern::parse("123"), 1).size(), 1u);
  EXPECT_EQ(sequential_overlap(Pattern::parse("123"), 2).size(), 1u);
  const auto t = sequential_overlap(Pattern::parse("132"), 1);
  EXPECT_EQ(inversion_polynomial(t).to_string(), "q^2(1+q+q^2)");
  EXPECT_EQ(sequential_overlap(Pattern::parse("132"), 2).size(), 0u);
}

TEST(SequentialOverlap, MatchesBruteForceForAllShortPatterns) {
  for (int m : {3, 4}) {
    std::vector<int> tau(static_cast<std::size_t>(m));
    std::iota(tau.begin(), tau.end(), 1);
    do {
      for (int s = 1; s < m; ++s) {
        const auto t = sequential_overlap(Pattern(Permutation(tau)), s);
        std::set<std::string> got;
        for (const auto& w : t.witnesses) {
          got.insert(w.perm.to_string());
          EXPECT_EQ(w.inv_count, inversion_count(w.perm.values()));
        }
        EXPECT_EQ(got, brute_sequential(tau, s)) << Permutation(tau).to_string() << " s=" << s;
        EXPECT_TRUE(std::is_sorted(t.witnesses.begin(), t.witnesses.end(),
                                   [](const auto& a, const auto& b) { return a.perm < b.perm; }));
      }
    } while (std::next_permutation(tau.begin(), tau.end()));
  }
}

TEST(SequentialOverlap, WorkerCountDoesNotChangeResult) {
  OverlapOptions parallel;
  parallel.workers = 3;
  EXPECT_EQ(listing(sequential_overlap(Pattern::parse("23451"), 1, parallel)),
            listing(sequential_overlap(Pattern::parse("23451"), 1)));
}

TEST(SequentialOverlap, GuardsAndArguments) {
  EXPECT_THROW(sequential_overlap(Pattern::parse("2341"), 0), InvalidInput);
  EXPECT_THROW(sequential_overlap(Pattern::parse("2341"), 4), InvalidInput);
  EXPECT_THROW(sequential_overlap(Pattern::parse("1234567"), 1), ResourceLimit);
}

TEST(ClassicalOverlap, DescendingPairOfLengthTwo) {
  const auto t = classical_overlap(Pattern::parse("21"), 1);
  EXPECT_EQ(t.size(), 3u);
  EXPECT_EQ(t.pair_multiplicity, 5u);
}

TEST(ClassicalOverlap, MatchesBruteForce) {
  for (const char* p : {"12", "123", "132", "231"}) {
    const Pattern tau = Pattern::parse(p);
    const std::vector<int> t(tau.values().begin(), tau.values().end());
    for (int s = 1; s < tau.size(); ++s) {
      const auto table = classical_overlap(tau, s);
      const auto [perms, pairs] = brute_classical(t, s);
      EXPECT_EQ(table.size(), perms) << p << " s=" << s;
      EXPECT_EQ(table.pair_multiplicity, pairs) << p << " s=" << s;
    }
  }
}

TEST(ClassicalOverlap, Guard) {
  OverlapOptions tight;
  tight.max_classical_length = 6;
  EXPECT_THROW(classical_overlap(Pattern::parse("1234"), 1, tight), ResourceLimit);
}

TEST(InversionPolynomialTest, EvaluationAgreesWithWitnesses) {
  const auto t = sequential_overlap(Pattern::parse("2341"), 1);
  const auto poly = inversion_polynomial(t);
  EXPECT_EQ(poly.total(), 10u);
  EXPECT_EQ(poly.evaluate(Rational(1)), Rational(10));
  Rational direct = 0;
  for (const auto& w : t.witnesses) {
    Rational term = 1;
    for (int i = 0; i < w.inv_count; ++i) term *= Rational(1, 2);
    direct += term;
  }
  EXPECT_EQ(poly.evaluate(Rational(1, 2)), direct);
  EXPECT_EQ(poly.evaluate(BigScalar(Rational(1, 2))).rational(), direct);
  EXPECT_EQ(poly.coefficient(11), 2u);
  EXPECT_EQ(poly.coefficient(3), 0u);
}

TEST(InversionPolynomialTest, Formatting) {
  EXPECT_EQ(InversionPolynomial().to_string(), "0");
  EXPECT_EQ(InversionPolynomial(std::map<int, std::uint64_t>{{0, 1}}).to_string(), "1");
  EXPECT_EQ(InversionPolynomial(std::map<int, std::uint64_t>{{3, 1}}).to_string(), "q^3");
  EXPECT_EQ(InversionPolynomial(std::map<int, std::uint64_t>{{3, 2}}).to_string(), "2q^3");
  EXPECT_EQ(InversionPolynomial({{0, 1}, {1, 2}}).to_string(), "1+2q");
}

class OverlapCache : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = std::filesystem::temp_directory_path() /
          ("patpoisson_cache_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::remove_all(dir);
  }
  void TearDown() override { std::filesystem::remove_all(dir); }
  std::filesystem::path dir;
};

TEST_F(OverlapCache, RoundTrip) {
  OverlapOptions options;
  options.cache_dir = dir;
  const auto first = sequential_overlap(Pattern::parse("2341"), 1, options);
  const auto file = dir / overlap_cache_name(Pattern::parse("2341"), 1, OverlapMode::sequential);
  EXPECT_EQ(file.filename(), "sequential_2341_s1.json");
  ASSERT_TRUE(std::filesystem::exists(file));
  const auto loaded = load_overlap_table(file);
  ASSERT_TRUE(loaded);
  EXPECT_EQ(listing(*loaded), listing(first));
}

TEST_F(OverlapCache, CorruptEntriesAreRejected) {
  std::filesystem::create_directories(dir);
  const auto file = dir / "bad.json";
  {
    std::ofstream(file) << "{not json";
  }
  EXPECT_FALSE(load_overlap_table(file));
  {
    std::ofstream(file) << R"({"tau":"2341","s":1,"mode":"sequential","witnesses":[{"perm":"3452671","inv":8}]})";
  }
  EXPECT_FALSE(load_overlap_table(file));
  {
    // Right inversion count, but the last window is not an occurrence.
    std::ofstream(file) << R"({"tau":"2341","s":1,"mode":"sequential","witnesses":[{"perm":"1234567","inv":0}]})";
  }
  EXPECT_FALSE(load_overlap_table(file));
  EXPECT_FALSE(load_overlap_table(dir / "missing.json"));
}

TEST_F(OverlapCache, CorruptCacheIsRecomputed) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "sequential_2341_s1.json") << "garbage";
  }
  OverlapOptions options;
  options.cache_dir = dir;
  EXPECT_EQ(sequential_overlap(Pattern::parse("2341"), 1, options).size(), 10u);
}
