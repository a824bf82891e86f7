#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "geocorpus/clean.hpp"
#include "geocorpus/dedup.hpp"

using namespace geocorpus;

TEST_CASE("strip_noise removes urls, tags, mentions and emoji") {
  CHECK(strip_noise("see http://x.y #tag @me hi") == "see hi");
  CHECK(strip_noise("hello world") == "hello world");
  CHECK(strip_noise("hello   world") == "hello world");
  CHECK(strip_noise("visit www.example.com now") == "visit now");
}

TEST_CASE("strip_noise hand-cleaned fixture with emoji and urls") {
  // 3 emoji + 2 urls, expected output built by applying the removal rules by hand
  const std::string raw =
      "wow 🙂 check https://a.b/c and 🎉 also http://d.e end 🚀 fine";
  CHECK(strip_noise(raw) == "wow check and also end fine");
}

TEST_CASE("strip_noise preserves line breaks and drops emptied lines") {
  CHECK(strip_noise("line one\nline two") == "line one\nline two");
  CHECK(strip_noise("keep\n🙂 🙂\nalso") == "keep\nalso");
  CHECK(strip_noise("tail\n🙂") == "tail");
}

TEST_CASE("strip_noise drops isolated symbol tokens but keeps mixed ones") {
  CHECK(strip_noise("a | b & c") == "a b c");
  CHECK(strip_noise("AT&T works") == "AT&T works");
  CHECK(strip_noise("price $5") == "price $5");
}

TEST_CASE("classify_script majority vote") {
  CHECK(classify_script("hello there friend") == ScriptClass::alphabetic);
  CHECK(classify_script("漢字漢字漢字") == ScriptClass::cjk);
  CHECK(classify_script("สวัสดีครับ") == ScriptClass::other_nonalphabetic);
  // 6 CJK vs 4 latin -> cjk
  CHECK(classify_script("漢字漢字漢字abcd") == ScriptClass::cjk);
  // tie 2 vs 2 -> cjk wins
  CHECK(classify_script("漢字ab") == ScriptClass::cjk);
}

TEST_CASE("count_words by script") {
  CHECK(count_words("a b  c", ScriptClass::alphabetic) == 3);
  CHECK(count_words("漢字漢字", ScriptClass::cjk) == 4);
  CHECK(count_words("abc 漢字", ScriptClass::cjk) == 3);  // one latin run + two cjk units
  CHECK(count_words("สวัสดี ครับ", ScriptClass::other_nonalphabetic) == 2);
}

TEST_CASE("custom segmenter is honored") {
  const Segmenter halves = [](std::u32string_view text) {
    return std::vector<std::string>{utf8_encode(text.substr(0, text.size() / 2)),
                                    utf8_encode(text.substr(text.size() / 2))};
  };
  CHECK(count_words("漢字漢字", ScriptClass::cjk, halves) == 2);
}

namespace {

std::string words(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += "word" + std::to_string(i);
  }
  return out;
}

}  // namespace

TEST_CASE("passes_filters applies rules in order") {
  const FilterConfig cfg;

  SECTION("clean 20-word text passes") {
    const std::string text = words(20);
    CHECK(passes_filters(text, ScriptClass::alphabetic, 20, cfg).passed);
  }
  SECTION("short alphabetic text fails on word count") {
    const auto v = passes_filters(words(5), ScriptClass::alphabetic, 5, cfg);
    CHECK_FALSE(v.passed);
    CHECK(v.reason == RejectReason::min_words);
  }
  SECTION("error words reject at two case-insensitive hits") {
    const std::string text = words(20) + " error happened and then Error again";
    const auto v = passes_filters(text, ScriptClass::alphabetic, 26, cfg);
    CHECK_FALSE(v.passed);
    CHECK(v.reason == RejectReason::error_words);
  }
  SECTION("single error word passes") {
    const std::string text = words(20) + " error once";
    CHECK(passes_filters(text, ScriptClass::alphabetic, 22, cfg).passed);
  }
  SECTION("five nav chars reject, four pass") {
    const std::string five = words(20) + " a|b|c|d|e|f";
    const auto v = passes_filters(five, ScriptClass::alphabetic, 21, cfg);
    CHECK_FALSE(v.passed);
    CHECK(v.reason == RejectReason::nav_chars);
    const std::string four = words(20) + " a|b|c|d|e";
    CHECK(passes_filters(four, ScriptClass::alphabetic, 21, cfg).passed);
  }
  SECTION("non-alphabetic uses the character threshold") {
    std::string cjk40;
    for (int i = 0; i < 40; ++i) cjk40 += "字";
    const auto v = passes_filters(cjk40, ScriptClass::cjk, 40, cfg);
    CHECK_FALSE(v.passed);
    CHECK(v.reason == RejectReason::min_chars);
    std::string cjk50;
    for (int i = 0; i < 50; ++i) cjk50 += "字";
    CHECK(passes_filters(cjk50, ScriptClass::cjk, 50, cfg).passed);
  }
  SECTION("length is checked before error words") {
    const auto v = passes_filters("error error", ScriptClass::alphabetic, 2, cfg);
    CHECK(v.reason == RejectReason::min_words);
  }
}

TEST_CASE("cleaning happens before the length check") {
  // 16 raw tokens, but urls/mentions leave only 14 words post-clean
  std::string raw = words(14) + " http://x.y @me";
  const std::string cleaned = strip_noise(raw);
  const auto wc = count_words(cleaned, ScriptClass::alphabetic);
  CHECK(wc == 14);
  const FilterConfig cfg;  // min 15
  CHECK_FALSE(passes_filters(cleaned, ScriptClass::alphabetic, wc, cfg).passed);
}

TEST_CASE("filter monotonicity: raising thresholds never admits more samples") {
  std::mt19937_64 rng(7);
  std::vector<std::string> samples;
  for (int i = 0; i < 80; ++i) {
    std::string s = words(5 + rng() % 25);
    if (rng() % 3 == 0) s += " error";
    if (rng() % 3 == 0) s += " error Error";
    for (std::size_t k = rng() % 7; k > 0; --k) s += " |";
    samples.push_back(strip_noise(s));
  }
  FilterConfig base;
  auto count_passing = [&](const FilterConfig& cfg) {
    std::size_t n = 0;
    for (const auto& s : samples) {
      const auto wc = count_words(s, ScriptClass::alphabetic);
      if (passes_filters(s, ScriptClass::alphabetic, wc, cfg).passed) ++n;
    }
    return n;
  };
  const auto baseline = count_passing(base);
  FilterConfig harder = base;
  harder.min_words_alphabetic += 5;
  CHECK(count_passing(harder) <= baseline);
  harder = base;
  harder.nav_char_limit = 2;  // lower limit = stricter
  CHECK(count_passing(harder) <= baseline);
  harder = base;
  harder.error_word_limit = 1;
  CHECK(count_passing(harder) <= baseline);
}

TEST_CASE("digest normalization collapses whitespace only") {
  CHECK(normalize_for_digest("a  b\t c\n") == "a b c");
  CHECK(normalize_for_digest("  a b  ") == "a b");
  CHECK(content_digest("a  b") == content_digest("a b"));
  CHECK(content_digest("A b") != content_digest("a b"));  // no case folding
}

TEST_CASE("dedup removes every copy within a scope") {
  const std::vector<std::string> site = {"A", "A", "B"};
  const auto out = dedup(site, DedupScope::site, [](const std::string& s) {
    return std::string_view(s);
  });
  REQUIRE(out.size() == 1);
  CHECK(out[0] == "B");
}

TEST_CASE("dedup identity on distinct samples") {
  const std::vector<std::string> xs = {"A", "B", "C"};
  const auto out = dedup(xs, DedupScope::site, [](const std::string& s) {
    return std::string_view(s);
  });
  CHECK(out == xs);
}

TEST_CASE("keep-first mode keeps exactly one copy") {
  const std::vector<std::string> xs = {"A", "B", "A", "A", "C"};
  const auto out = dedup(xs, DedupScope::site,
                         [](const std::string& s) { return std::string_view(s); },
                         /*keep_first=*/true);
  CHECK(out == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("period scope semantics") {
  // same article on 3 sites in one period: all removed
  const std::vector<std::string> one_period = {"article", "article", "article"};
  CHECK(dedup(one_period, DedupScope::period,
              [](const std::string& s) { return std::string_view(s); })
            .empty());
  // same article once in each of two periods: both survive
  for (int period = 0; period < 2; ++period) {
    const std::vector<std::string> in_period = {"article"};
    CHECK(dedup(in_period, DedupScope::period,
                [](const std::string& s) { return std::string_view(s); })
              .size() == 1);
  }
}

TEST_CASE("dedup idempotence and uniqueness on random multisets") {
  std::mt19937_64 rng(99);
  auto text_of = [](const std::string& s) { return std::string_view(s); };
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<std::string> xs;
    const std::size_t n = rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back("t" + std::to_string(rng() % 10));
    }
    const auto once = dedup(xs, DedupScope::site, text_of);
    const auto twice = dedup(once, DedupScope::site, text_of);
    CHECK(once == twice);
    std::set<std::string> uniq(once.begin(), once.end());
    CHECK(uniq.size() == once.size());
  }
}

TEST_CASE("dedup survivor set is independent of input partitioning") {
  const std::vector<std::string> xs = {"a", "b", "a", "c", "d", "c", "e"};
  auto text_of = [](const std::string& s) { return std::string_view(s); };

  DedupState whole(DedupScope::site);
  const auto whole_idx = dedup_indices(xs, whole, text_of);

  // same digests inserted from two "workers" in interleaved order
  DedupState split(DedupScope::site);
  for (std::size_t i = 0; i < xs.size(); i += 2) split.add(content_digest(xs[i]));
  for (std::size_t i = 1; i < xs.size(); i += 2) split.add(content_digest(xs[i]));
  std::vector<std::size_t> split_idx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (split.count(content_digest(xs[i])) == 1) split_idx.push_back(i);
  }
  CHECK(whole_idx == split_idx);
}

TEST_CASE("spilling digest counter matches in-memory counting") {
  std::mt19937_64 rng(5);
  std::vector<std::uint64_t> digests;
  std::map<std::uint64_t, int> truth;
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t d = rng() % 1500;
    digests.push_back(d);
    ++truth[d];
  }
  SpillingDigestCounter counter(/*max_in_memory=*/256);  // forces spills
  for (auto d : digests) counter.add(d);
  counter.finalize();
  CHECK(counter.spill_count() > 0);
  for (const auto& [digest, count] : truth) {
    CHECK(counter.is_duplicate(digest) == (count >= 2));
  }
}

TEST_CASE("filter config validation") {
  FilterConfig cfg;
  cfg.error_words.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  FilterConfig zero;
  zero.min_words_alphabetic = 0;
  CHECK_THROWS_AS(zero.validate(), ConfigError);
}
