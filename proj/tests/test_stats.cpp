#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "geocorpus/frequency.hpp"
#include "geocorpus/similarity.hpp"

using namespace geocorpus;

namespace {

FrequencyList make_list(const std::string& language, const std::string& country,
                        std::vector<std::pair<std::string, std::uint64_t>> counts) {
  FrequencyList fl;
  fl.register_tag = "web";
  fl.language = language;
  fl.country = country;
  for (const auto& [token, count] : counts) {
    fl.counts[token] = count;
    fl.total_tokens += count;
  }
  return fl;
}

// Brute-force rank correlation: ranks computed by counting, O(n^2), written
// independently of the production path.
double spearman_oracle(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  const std::size_t n = a.size();
  auto naive_ranks = [n](const std::vector<std::uint64_t>& v) {
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t less = 0;
      std::size_t equal = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (v[j] < v[i]) ++less;
        if (v[j] == v[i]) ++equal;
      }
      // average of positions less+1 .. less+equal
      ranks[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
    }
    return ranks;
  };
  const auto ra = naive_ranks(a);
  const auto rb = naive_ranks(b);
  double ma = 0;
  double mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0;
  double da = 0;
  double db = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("frequency list counting") {
  FrequencyList fl = make_list("eng", "CAN", {});
  fl.add_text("a b a", ScriptClass::alphabetic);
  CHECK(fl.counts.at("a") == 2);
  CHECK(fl.counts.at("b") == 1);
  CHECK(fl.total_tokens == 3);

  FrequencyList two = make_list("eng", "CAN", {});
  two.add_text("x", ScriptClass::alphabetic);
  two.add_text("x", ScriptClass::alphabetic);
  CHECK(two.counts.at("x") == 2);
  CHECK(two.total_tokens == 2);
}

TEST_CASE("frequency list case folds tokens") {
  FrequencyList fl = make_list("deu", "DEU", {});
  fl.add_text("Wort wort WORT Straße", ScriptClass::alphabetic);
  CHECK(fl.counts.at("wort") == 3);
  CHECK(fl.counts.at("straße") == 1);
  CHECK(fl.total_tokens == 4);
}

TEST_CASE("synthetic zipf counts match an independent tally") {
  std::mt19937_64 rng(17);
  std::vector<std::string> tokens;
  for (int i = 0; i < 1000; ++i) {
    // zipf-ish: token id skewed toward small values
    const auto id = static_cast<int>(1000.0 / (1.0 + static_cast<double>(rng() % 999)));
    tokens.push_back("t" + std::to_string(id));
  }
  std::string text;
  for (const auto& t : tokens) {
    if (!text.empty()) text.push_back(' ');
    text += t;
  }
  FrequencyList fl = make_list("eng", "USA", {});
  fl.add_text(text, ScriptClass::alphabetic);
  // independent recount
  std::map<std::string, std::uint64_t> truth;
  for (const auto& t : tokens) ++truth[t];
  CHECK(fl.total_tokens == tokens.size());
  for (const auto& [token, count] : truth) {
    CHECK(fl.counts.at(token) == count);
  }
}

TEST_CASE("threshold boundary is 5 per 10 million, inclusive") {
  FrequencyThreshold thr;
  CHECK(thr.retains(5, 10'000'000));
  CHECK_FALSE(thr.retains(4, 10'000'000));
  CHECK(thr.retains(1, 1'000));  // 1e-3 rate far above 5e-7
  CHECK_FALSE(thr.retains(0, 10));
  CHECK_FALSE(thr.retains(1, 0));
}

TEST_CASE("threshold monotonicity: raising the threshold never grows the alignment") {
  std::mt19937_64 rng(23);
  FrequencyList a = make_list("eng", "CAN", {});
  FrequencyList b = make_list("eng", "GBR", {});
  for (int i = 0; i < 200; ++i) {
    a.counts["w" + std::to_string(rng() % 120)] += 1 + rng() % 9;
    b.counts["w" + std::to_string(rng() % 120)] += 1 + rng() % 9;
  }
  for (const auto& [t, c] : a.counts) a.total_tokens += 0;  // totals set below
  a.total_tokens = 0;
  for (const auto& [t, c] : a.counts) a.total_tokens += c;
  b.total_tokens = 0;
  for (const auto& [t, c] : b.counts) b.total_tokens += c;

  std::size_t prev = SIZE_MAX;
  for (std::uint64_t num : {1, 2, 5, 20, 100}) {
    FrequencyThreshold thr{num, 1000};
    const auto aligned = align(a, b, thr);
    CHECK(aligned.size() <= prev);
    prev = aligned.size();
  }
}

TEST_CASE("align intersects thresholded vocabularies") {
  const FrequencyList a = make_list("eng", "CAN", {{"x", 5}, {"y", 3}, {"z", 2}});
  const FrequencyList b = make_list("eng", "GBR", {{"y", 7}, {"z", 1}, {"w", 2}});
  FrequencyThreshold loose{1, 1000000};
  const auto aligned = align(a, b, loose);
  REQUIRE(aligned.tokens == std::vector<std::string>{"y", "z"});
  CHECK(aligned.counts_a == std::vector<std::uint64_t>{3, 2});
  CHECK(aligned.counts_b == std::vector<std::uint64_t>{7, 1});

  const FrequencyList c = make_list("eng", "IRL", {{"q", 4}});
  CHECK(align(a, c, loose).size() == 0);

  const auto self = align(a, a, loose);
  CHECK(self.size() == 3);

  const FrequencyList other = make_list("fra", "FRA", {{"x", 1}});
  CHECK_THROWS_AS(align(a, other, loose), ContractError);
}

TEST_CASE("spearman basics") {
  AlignedVocab v;
  v.tokens = {"a", "b", "c", "d", "e"};
  v.counts_a = {1, 2, 3, 4, 5};
  v.counts_b = {1, 2, 3, 4, 5};
  CHECK(spearman(v) == 1.0);
  v.counts_b = {5, 4, 3, 2, 1};
  CHECK(spearman(v) == -1.0);
}

TEST_CASE("spearman self-similarity is exactly one") {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 20; ++iter) {
    AlignedVocab v;
    const std::size_t n = 3 + rng() % 40;
    bool constant = true;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t c = 1 + rng() % 10;
      v.tokens.push_back("t" + std::to_string(i));
      v.counts_a.push_back(c);
      v.counts_b.push_back(c);
      if (c != v.counts_a[0]) constant = false;
    }
    if (constant) v.counts_a[0] = v.counts_b[0] = 11;
    CHECK(spearman(v) == 1.0);
  }
}

TEST_CASE("spearman is undefined on tiny or constant input") {
  AlignedVocab one;
  one.tokens = {"a"};
  one.counts_a = {1};
  one.counts_b = {1};
  CHECK_THROWS_AS(spearman(one), UndefinedStatError);

  AlignedVocab constant;
  constant.tokens = {"a", "b", "c"};
  constant.counts_a = {4, 4, 4};
  constant.counts_b = {1, 2, 3};
  CHECK_THROWS_AS(spearman(constant), UndefinedStatError);
}

TEST_CASE("spearman with ties matches the brute-force oracle") {
  AlignedVocab v;
  v.tokens.resize(20);
  v.counts_a = {3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5, 8, 9, 7, 9, 3, 2, 3, 8, 4};
  v.counts_b = {2, 7, 1, 8, 2, 8, 1, 8, 2, 8, 4, 5, 9, 0, 4, 5, 2, 3, 5, 6};
  for (std::size_t i = 0; i < 20; ++i) v.tokens[i] = "t" + std::to_string(i);
  CHECK(spearman(v) == Catch::Approx(spearman_oracle(v.counts_a, v.counts_b)).margin(1e-9));
}

TEST_CASE("spearman oracle equivalence over random tied pairs") {
  std::mt19937_64 rng(77);
  for (int iter = 0; iter < 250; ++iter) {
    const std::size_t n = 2 + rng() % 99;
    AlignedVocab v;
    bool ca = true;
    bool cb = true;
    for (std::size_t i = 0; i < n; ++i) {
      v.tokens.push_back("t" + std::to_string(i));
      v.counts_a.push_back(rng() % 12);  // small range forces ties
      v.counts_b.push_back(rng() % 12);
      if (v.counts_a[i] != v.counts_a[0]) ca = false;
      if (v.counts_b[i] != v.counts_b[0]) cb = false;
    }
    if (ca || cb) continue;
    CHECK(spearman(v) == Catch::Approx(spearman_oracle(v.counts_a, v.counts_b)).margin(1e-9));
  }
}

TEST_CASE("spearman symmetry and scale invariance") {
  std::mt19937_64 rng(41);
  for (int iter = 0; iter < 30; ++iter) {
    FrequencyList a = make_list("eng", "CAN", {});
    FrequencyList b = make_list("eng", "GBR", {});
    for (int i = 0; i < 40; ++i) {
      a.counts["w" + std::to_string(i)] = 1 + rng() % 20;
      b.counts["w" + std::to_string(i)] = 1 + rng() % 20;
    }
    for (const auto& [t, c] : a.counts) a.total_tokens += c;
    for (const auto& [t, c] : b.counts) b.total_tokens += c;
    FrequencyThreshold loose{1, 1'000'000};
    const double ab = spearman(align(a, b, loose));
    const double ba = spearman(align(b, a, loose));
    CHECK(ab == ba);

    // scaling one side by a positive integer leaves ranks unchanged
    FrequencyList scaled = b;
    for (auto& [t, c] : scaled.counts) c *= 7;
    scaled.total_tokens = b.total_tokens * 7;
    CHECK(spearman(align(a, scaled, loose)) == ab);
  }
}

TEST_CASE("chi-square is zero for identical and proportional corpora") {
  const FrequencyList a = make_list("eng", "CAN", {{"x", 10}, {"y", 20}, {"z", 30}});
  FrequencyThreshold loose{1, 1'000'000};
  CHECK(chi_square_similarity(align(a, a, loose)).statistic == Catch::Approx(0.0).margin(1e-12));

  FrequencyList doubled = a;
  for (auto& [t, c] : doubled.counts) c *= 2;
  doubled.total_tokens = a.total_tokens * 2;
  CHECK(chi_square_similarity(align(a, doubled, loose)).statistic ==
        Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("chi-square matches a hand computation") {
  // a: x=8, y=2 (total 10); b: x=4, y=6 (total 10)
  const FrequencyList a = make_list("eng", "CAN", {{"x", 8}, {"y", 2}});
  const FrequencyList b = make_list("eng", "GBR", {{"x", 4}, {"y", 6}});
  FrequencyThreshold loose{1, 1'000'000};
  // expected x: (12)*0.5 = 6 each side; y: (8)*0.5 = 4 each side
  // chi2 = (8-6)^2/6 + (4-6)^2/6 + (2-4)^2/4 + (6-4)^2/4 = 4/6+4/6+1+1 = 10/3
  CHECK(chi_square_similarity(align(a, b, loose)).statistic ==
        Catch::Approx(10.0 / 3.0).epsilon(1e-12));

  const double ab = chi_square_similarity(align(a, b, loose)).statistic;
  const double ba = chi_square_similarity(align(b, a, loose)).statistic;
  CHECK(ab == ba);
}

TEST_CASE("cross-source similarity with the inner-circle fixture") {
  // six observations for one language; the aggregation is exercised directly
  std::vector<SimilarityObservation> obs = {
      {"eng", "AUS", 0.513, 21970}, {"eng", "CAN", 0.775, 32482},
      {"eng", "IRL", 0.761, 30741}, {"eng", "NZL", 0.752, 30732},
      {"eng", "GBR", 0.636, 23809}, {"eng", "USA", 0.731, 29517},
  };
  const auto summary = summarize_by_language(obs);
  REQUIRE(summary.count("eng") == 1);
  const auto& eng = summary.at("eng");
  CHECK(eng.n_observations == 6);
  // mean of the six printed values
  CHECK(eng.mean == Catch::Approx(4.168 / 6.0).epsilon(1e-12));
}

TEST_CASE("cross-source similarity single observation has zero stddev") {
  const std::vector<SimilarityObservation> obs = {{"cat", "ESP", 0.741, 1000}};
  const auto summary = summarize_by_language(obs);
  CHECK(summary.at("cat").mean == Catch::Approx(0.741));
  CHECK(summary.at("cat").stddev == 0.0);
}

TEST_CASE("cross-source per-language mean and stddev match hand arithmetic") {
  const std::vector<SimilarityObservation> obs = {
      {"fra", "FRA", 0.6, 10}, {"fra", "BEL", 0.7, 10}, {"fra", "CHE", 0.8, 10}};
  const auto summary = summarize_by_language(obs);
  CHECK(summary.at("fra").mean == Catch::Approx(0.7).epsilon(1e-12));
  // population stddev of {0.6,0.7,0.8} = sqrt((0.01+0+0.01)/3)
  CHECK(summary.at("fra").stddev == Catch::Approx(std::sqrt(0.02 / 3.0)).epsilon(1e-12));
}

TEST_CASE("cross-source similarity applies the word floor to both registers") {
  std::mt19937_64 rng(55);
  auto fill = [&](FrequencyList& fl, std::uint64_t scale) {
    for (int i = 0; i < 50; ++i) fl.counts["w" + std::to_string(i)] = scale * (1 + rng() % 50);
    fl.total_tokens = 0;
    for (const auto& [t, c] : fl.counts) fl.total_tokens += c;
  };
  FrequencyList big_a = make_list("eng", "CAN", {});
  fill(big_a, 1'000'000);
  FrequencyList big_b = make_list("eng", "CAN", {});
  fill(big_b, 1'000'000);
  FrequencyList small_a = make_list("eng", "IRL", {});
  fill(small_a, 1);  // way below 1M words
  FrequencyList small_b = make_list("eng", "IRL", {});
  fill(small_b, 1);

  const auto result = cross_source_similarity({big_a, small_a}, {big_b, small_b});
  REQUIRE(result.observations.size() == 1);
  CHECK(result.observations[0].country == "CAN");

  // identical registers give rho 1 per observation
  const auto self = cross_source_similarity({big_a}, {big_a});
  REQUIRE(self.observations.size() == 1);
  CHECK(self.observations[0].rho == 1.0);
}

TEST_CASE("within-source similarity over country pairs") {
  std::mt19937_64 rng(66);
  auto fill = [&](FrequencyList& fl) {
    for (int i = 0; i < 60; ++i) {
      fl.counts["w" + std::to_string(i)] = 1'000'000 + rng() % 5'000'000;
    }
    fl.total_tokens = 0;
    for (const auto& [t, c] : fl.counts) fl.total_tokens += c;
  };
  FrequencyList a = make_list("ara", "EGY", {});
  FrequencyList b = make_list("ara", "SAU", {});
  FrequencyList c = make_list("ara", "MAR", {});
  fill(a);
  fill(b);
  fill(c);

  const auto result = within_source_similarity({a, b, c});
  REQUIRE(result.rows.size() == 1);
  const auto& row = result.rows[0];
  CHECK(row.language == "ara");
  CHECK(row.n_countries == 3);
  CHECK(row.n_pairs == 3);
  // mean over the three pairwise rhos matches hand computation
  FrequencyThreshold thr;
  const double r_ab = spearman(align(a, b, thr));
  const double r_ac = spearman(align(a, c, thr));
  const double r_bc = spearman(align(b, c, thr));
  const double mean = (r_ab + r_ac + r_bc) / 3.0;
  CHECK(row.mean == Catch::Approx(mean).epsilon(1e-12));

  // a two-country language yields a single pair with stddev exactly 0
  const auto two = within_source_similarity({a, b});
  REQUIRE(two.rows.size() == 1);
  CHECK(two.rows[0].n_pairs == 1);
  CHECK(two.rows[0].stddev == 0.0);

  // identical corpora across k countries: mean 1, stddev 0
  FrequencyList c1 = a;
  c1.country = "DZA";
  FrequencyList c2 = a;
  c2.country = "TUN";
  const auto identical = within_source_similarity({a, c1, c2});
  REQUIRE(identical.rows.size() == 1);
  CHECK(identical.rows[0].mean == 1.0);
  CHECK(identical.rows[0].stddev == 0.0);

  // single-country language is skipped with notice
  const auto skipped = within_source_similarity({a});
  CHECK(skipped.rows.empty());
  REQUIRE(skipped.skipped_languages == std::vector<std::string>{"ara"});
}

TEST_CASE("frequency csv round trip and ordering") {
  const auto dir = std::filesystem::temp_directory_path() / "geocorpus-freq-test";
  std::filesystem::remove_all(dir);
  const FrequencyList fl =
      make_list("eng", "CAN", {{"the", 50}, {"a", 50}, {"zebra", 3}, {"and", 20}});
  write_frequency_csv(dir, fl);

  const auto path = dir / "web" / "eng" / "CAN.csv";
  REQUIRE(std::filesystem::exists(path));
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "token,count");
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,50");  // ties broken by token
  std::getline(in, line);
  CHECK(line == "the,50");

  const auto loaded = read_frequency_csv(path, "web", "eng", "CAN");
  CHECK(loaded.counts == fl.counts);
  CHECK(loaded.total_tokens == fl.total_tokens);

  const auto tree = read_frequency_tree(dir, "web");
  REQUIRE(tree.size() == 1);
  CHECK(tree[0].language == "eng");
  CHECK(tree[0].country == "CAN");
  std::filesystem::remove_all(dir);
}
