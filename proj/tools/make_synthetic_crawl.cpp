// Generates the bundled synthetic crawl fixture: a seeded 1,000-record jsonl
// crawl with known duplicates, known languages, planted filter violations and
// a spread of TLDs. Output is deterministic for a given seed.
//
// Usage: make_synthetic_crawl <out_dir> [records] [seed]

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace {

// three Latin-segment "languages" plus one CJK-range "language"
struct SynthLanguage {
  const char* code;
  char32_t base;
  int span;
  bool cjk;
};

constexpr SynthLanguage kLanguages[] = {
    {"aaa", U'a', 8, false},
    {"bbb", U'j', 8, false},
    {"ccc", U'q', 8, false},
    {"ddd", 0x4E00, 24, true},
};

std::string utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

struct Rng {
  std::uint64_t state;
  std::uint64_t next() {
    state ^= state << 13;
    state ^= state >> 7;
    state ^= state << 17;
    return state;
  }
  std::uint64_t below(std::uint64_t n) { return next() % n; }
};

std::string sentence(Rng& rng, const SynthLanguage& lang, int n_words) {
  std::string out;
  if (lang.cjk) {
    for (int i = 0; i < n_words; ++i) {
      out += utf8(lang.base + static_cast<char32_t>(rng.below(lang.span)));
    }
    return out;
  }
  for (int i = 0; i < n_words; ++i) {
    if (i != 0) out.push_back(' ');
    const int len = 3 + static_cast<int>(rng.below(6));
    for (int k = 0; k < len; ++k) {
      out += utf8(lang.base + static_cast<char32_t>(rng.below(lang.span)));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_synthetic_crawl <out_dir> [records] [seed]\n";
    return 1;
  }
  const std::filesystem::path out_dir = argv[1];
  const int n_records = argc > 2 ? std::stoi(argv[2]) : 1000;
  Rng rng{argc > 3 ? std::stoull(argv[3]) : 20177};

  const std::vector<std::string> periods = {"2017-03", "2017-04", "2017-05"};
  const std::vector<std::string> tlds = {"ca", "de",  "nz", "fr", "ru", "jp",
                                         "com", "io", "br", "in", "ua", "xn--p1ai"};

  // texts reused to plant duplicates
  const std::string shared_article =
      sentence(rng, kLanguages[0], 40);  // repeated across sites within one period
  const std::string cross_period_article = sentence(rng, kLanguages[1], 40);
  const std::string boilerplate = sentence(rng, kLanguages[2], 20);  // repeated within sites

  std::filesystem::create_directories(out_dir);
  std::map<std::string, std::ofstream> files;
  for (const auto& p : periods) {
    std::filesystem::create_directories(out_dir / p);
    files[p].open(out_dir / p / "crawl.jsonl", std::ios::binary);
  }

  for (int rec = 0; rec < n_records; ++rec) {
    const auto& period = periods[rng.below(periods.size())];
    const auto& tld = tlds[rng.below(tlds.size())];
    const int site_id = static_cast<int>(rng.below(40));
    const auto& lang = kLanguages[rng.below(4)];

    const std::string host = "site" + std::to_string(site_id) + "." + tld;
    const std::string url = "http://" + host + "/page" + std::to_string(rec);

    std::string payload = "<div>nav | nav | nav</div>";
    const int n_paras = 2 + static_cast<int>(rng.below(4));
    for (int p = 0; p < n_paras; ++p) {
      std::string text;
      const auto kind = rng.below(20);
      if (kind == 0) {
        text = shared_article;               // period-scope duplicate
      } else if (kind == 1) {
        text = cross_period_article;         // appears in several periods
      } else if (kind == 2) {
        text = boilerplate;                  // site-scope duplicate (repeat below)
        payload += "<p>" + text + "</p>";
      } else if (kind == 3) {
        text = "error Error ERROR " + sentence(rng, lang, 20);  // error words
      } else if (kind == 4) {
        text = sentence(rng, lang, 20) + " a|b|c|d|e|f";        // nav chars
      } else if (kind == 5) {
        text = sentence(rng, lang, 4);       // too short
      } else if (kind == 6) {
        text = "a a a a a a a a a a a a a a a a";  // passes filters, no window
      } else if (kind == 7) {
        text = "see http://spam.example/x #tag @user " + sentence(rng, lang, 20);
      } else {
        text = sentence(rng, lang, lang.cjk ? 60 : 25);
      }
      payload += "<p>" + text + "</p>";
    }
    nlohmann::json j;
    j["url"] = url;
    j["period"] = period;
    j["payload"] = payload;
    files[period] << j.dump() << "\n";
  }
  for (auto& [p, f] : files) f.close();
  std::cout << "wrote " << n_records << " records under " << out_dir.string() << "\n";
  return 0;
}
