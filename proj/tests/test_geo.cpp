#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "geocorpus/paragraphs.hpp"
#include "geocorpus/public_suffix.hpp"
#include "geocorpus/records.hpp"
#include "geocorpus/tld.hpp"

using namespace geocorpus;

namespace {

const std::filesystem::path kDataDir = std::filesystem::path(GEOCORPUS_SOURCE_DIR) / "data";

const TldTables& tables() {
  static const TldTables t = TldTables::load(kDataDir);
  return t;
}

const PublicSuffixList& psl() {
  static const PublicSuffixList p = PublicSuffixList::load(kDataDir / "public_suffix.dat");
  return p;
}

}  // namespace

TEST_CASE("url host extraction") {
  CHECK(url_host("http://example.ca/page") == "example.ca");
  CHECK(url_host("https://user@Sub.Example.COM:8080/a?b#c") == "sub.example.com");
  CHECK(url_host("not a url").empty());
  CHECK(url_host("http:///nohost").empty());
}

TEST_CASE("georeference maps ccTLDs to country and region") {
  const auto ca = tables().georeference("http://example.ca/page");
  REQUIRE(ca.has_value());
  CHECK(ca->tld == "ca");
  CHECK(ca->country == "CAN");
  CHECK(ca->region == "America, North");

  const auto de = tables().georeference("https://www.beispiel.de/x");
  REQUIRE(de.has_value());
  CHECK(de->country == "DEU");
  CHECK(de->region == "Europe, West");
}

TEST_CASE("georeference drops non-geographic and excluded TLDs") {
  CHECK_FALSE(tables().georeference("http://example.com/page").has_value());
  CHECK_FALSE(tables().georeference("http://example.org/page").has_value());
  // the six excluded ccTLDs
  for (const char* url : {"http://a.ai/", "http://a.fm/", "http://a.io/", "http://a.ly/",
                          "http://a.ag/", "http://a.tv/"}) {
    CHECK_FALSE(tables().georeference(url).has_value());
  }
}

TEST_CASE("georeference decodes punycode ccTLDs") {
  const auto ru = tables().georeference("http://xn--e1afmkfd.xn--p1ai/page");
  REQUIRE(ru.has_value());
  CHECK(ru->tld == "рф");
  CHECK(ru->country == "RUS");
  CHECK(ru->region == "Europe, Russia");

  // literal UTF-8 host form
  const auto cn = tables().georeference("http://例子.中国/");
  REQUIRE(cn.has_value());
  CHECK(cn->country == "CHN");
  CHECK(cn->region == "Asia, East");
}

TEST_CASE("georeference is a pure function") {
  for (int i = 0; i < 3; ++i) {
    const auto a = tables().georeference("http://example.nz/x");
    REQUIRE(a.has_value());
    CHECK(a->country == "NZL");
    CHECK(a->region == "Oceania");
  }
}

TEST_CASE("table referential integrity holds for the bundled data") {
  // region labels form exactly the documented 16-region inventory
  std::set<std::string> regions;
  for (const auto& [country, region] : tables().country_region()) regions.insert(region);
  CHECK(regions.size() == 16);
  CHECK(regions.count("America, Brazil") == 1);
  CHECK(regions.count("Europe, Russia") == 1);
  CHECK(tables().excluded().size() == 6);
  CHECK(tables().tld_count() > 200);
}

TEST_CASE("public suffix registrable domains") {
  CHECK(psl().registrable_domain("www.example.co.uk") == "example.co.uk");
  CHECK(psl().registrable_domain("example.co.uk") == "example.co.uk");
  CHECK(psl().registrable_domain("deep.sub.example.ca") == "example.ca");
  CHECK(psl().registrable_domain("example.de") == "example.de");
  // wildcard + exception
  CHECK(psl().registrable_domain("x.anything.ck") == "x.anything.ck");
  CHECK(psl().registrable_domain("sub.x.anything.ck") == "x.anything.ck");
  CHECK(psl().registrable_domain("www.ck") == "www.ck");
  CHECK(psl().registrable_domain("foo.www.ck") == "www.ck");
  // single label host is returned unchanged
  CHECK(psl().registrable_domain("localhost") == "localhost");
}

TEST_CASE("jsonl record parsing maps fields directly") {
  std::stringstream in;
  in << R"({"url":"http://a.ca/x","period":"2017-03","payload":"<p>hi</p>"})" << "\n";
  JsonlReader reader(in);
  RawRecord rec;
  REQUIRE(reader.next(rec));
  CHECK(rec.url == "http://a.ca/x");
  CHECK(rec.period == "2017-03");
  CHECK(rec.payload == "<p>hi</p>");
  CHECK_FALSE(reader.next(rec));
  CHECK(reader.counters().records == 1);
  CHECK(reader.counters().skipped == 0);
}

TEST_CASE("jsonl skips malformed records without derailing the stream") {
  std::stringstream in;
  in << R"({"url":"http://a.ca/1","period":"2017-03","payload":"x"})" << "\n"
     << R"({"url":"http://a.ca/2","period":"2017-03")" << "\n"  // truncated
     << R"({"url":"http://a.ca/3","period":"bad-period","payload":"x"})" << "\n"
     << R"({"url":"http://a.ca/4","period":"2017-04","payload":"y"})" << "\n";
  JsonlReader reader(in);
  RawRecord rec;
  REQUIRE(reader.next(rec));
  CHECK(rec.url == "http://a.ca/1");
  REQUIRE(reader.next(rec));
  CHECK(rec.url == "http://a.ca/4");
  CHECK_FALSE(reader.next(rec));
  CHECK(reader.counters().records == 2);
  CHECK(reader.counters().skipped == 2);
}

TEST_CASE("three-record fixture parses in file order") {
  std::stringstream in;
  for (int i = 1; i <= 3; ++i) {
    in << R"({"url":"http://a.ca/)" << i << R"(","period":"2017-03","payload":"<p>p)" << i
       << R"(</p>"})" << "\n";
  }
  JsonlReader reader(in);
  RawRecord rec;
  for (int i = 1; i <= 3; ++i) {
    REQUIRE(reader.next(rec));
    CHECK(rec.url == "http://a.ca/" + std::to_string(i));
  }
  CHECK_FALSE(reader.next(rec));
}

namespace {

std::string warc_record(const std::string& url, const std::string& date,
                        const std::string& payload) {
  return "WARC/1.0\nWARC-Target-URI: " + url + "\nWARC-Date: " + date + "\n\n" + payload + "\n";
}

}  // namespace

TEST_CASE("warc-like parsing and resynchronization") {
  const std::string good1 = warc_record("http://a.ca/1", "2017-03-02T00:00:00Z", "<p>one</p>");
  const std::string good2 = warc_record("http://a.ca/2", "2017-03-05T00:00:00Z", "<p>two</p>");
  const std::string corrupt = "WARC/1.0\nNo-Url-Header: x\n\ngarbage\n";

  auto parse_all = [](const std::string& content) {
    std::stringstream in(content);
    WarcLikeReader reader(in);
    std::vector<RawRecord> out;
    RawRecord rec;
    while (reader.next(rec)) out.push_back(rec);
    return out;
  };

  const auto plain = parse_all(good1 + good2);
  REQUIRE(plain.size() == 2);
  CHECK(plain[0].url == "http://a.ca/1");
  CHECK(plain[0].period == "2017-03");
  CHECK(plain[0].payload == "<p>one</p>");

  // splicing a corrupt record between the two leaves their parse unchanged
  const auto spliced = parse_all(good1 + corrupt + good2);
  REQUIRE(spliced.size() == 2);
  CHECK(spliced[0].url == plain[0].url);
  CHECK(spliced[0].payload == plain[0].payload);
  CHECK(spliced[1].url == plain[1].url);
  CHECK(spliced[1].payload == plain[1].payload);
}

TEST_CASE("paragraph extraction pulls <p> blocks") {
  RawRecord rec{"http://www.example.ca/x", "2017-03", "<p>a b c</p><p>d</p>"};
  const auto paras = extract_paragraphs(rec, psl());
  REQUIRE(paras.size() == 2);
  CHECK(paras[0].text == "a b c");
  CHECK(paras[1].text == "d");
  CHECK(paras[0].site == "example.ca");
  CHECK(paras[0].url == rec.url);
  CHECK(paras[0].period == "2017-03");
}

TEST_CASE("payload without <p> yields nothing") {
  RawRecord rec{"http://a.ca/x", "2017-03", "<div>text</div>"};
  CHECK(extract_paragraphs(rec, psl()).empty());
}

TEST_CASE("inner markup is stripped") {
  RawRecord rec{"http://a.ca/x", "2017-03", "<p><b>x</b> y</p>"};
  const auto paras = extract_paragraphs(rec, psl());
  REQUIRE(paras.size() == 1);
  CHECK(paras[0].text == "x y");
}

TEST_CASE("nested p blocks keep the innermost text") {
  RawRecord rec{"http://a.ca/x", "2017-03", "<p>outer <p>inner</p> tail</p>"};
  const auto paras = extract_paragraphs(rec, psl());
  REQUIRE(paras.size() == 1);
  CHECK(paras[0].text == "inner");
}

TEST_CASE("stripped tags leave no angle brackets behind") {
  RawRecord rec{"http://a.ca/x", "2017-03",
                "<p>a <b>b</b> <i attr=\"v\">c</i><br>d</p><p><span>e</span></p>"};
  for (const auto& p : extract_paragraphs(rec, psl())) {
    CHECK(p.text.find('<') == std::string::npos);
    CHECK(p.text.find('>') == std::string::npos);
  }
}

TEST_CASE("empty and whitespace-only blocks are dropped") {
  RawRecord rec{"http://a.ca/x", "2017-03", "<p>  </p><p></p><p>keep</p>"};
  const auto paras = extract_paragraphs(rec, psl());
  REQUIRE(paras.size() == 1);
  CHECK(paras[0].text == "keep");
}
