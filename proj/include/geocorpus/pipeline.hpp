#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "geocorpus/clean.hpp"
#include "geocorpus/csv.hpp"
#include "geocorpus/dedup.hpp"
#include "geocorpus/errors.hpp"
#include "geocorpus/frequency.hpp"
#include "geocorpus/gzip.hpp"
#include "geocorpus/lid_model.hpp"
#include "geocorpus/lid_train.hpp"
#include "geocorpus/manifest.hpp"
#include "geocorpus/paragraphs.hpp"
#include "geocorpus/parallel.hpp"
#include "geocorpus/public_suffix.hpp"
#include "geocorpus/records.hpp"
#include "geocorpus/tld.hpp"

namespace geocorpus {

struct PipelineConfig {
  std::filesystem::path tables_dir = "data";
  std::filesystem::path model_path;
  FilterConfig filters;
  double confidence_floor = 0.5;
  std::size_t workers = 1;
  std::uint64_t digest_seed = kDefaultHashSeed;
  bool keep_first_dedup = false;
  std::size_t row_limit = 100'000;
  std::string register_tag = "web";
  std::size_t dedup_spill_budget = 4u << 20;
  Segmenter segmenter;  // defaults to the built-in heuristic

  static PipelineConfig from_config(const KeyValueConfig& kv) {
    PipelineConfig cfg;
    cfg.tables_dir = kv.get("tables_dir", "data");
    cfg.model_path = kv.get("model_path", "");
    cfg.filters = FilterConfig::from_config(kv);
    cfg.confidence_floor = kv.get_double("confidence_floor", 0.5);
    cfg.workers = static_cast<std::size_t>(kv.get_int("workers", 1));
    cfg.digest_seed = static_cast<std::uint64_t>(kv.get_int("digest_seed",
                                                            static_cast<std::int64_t>(kDefaultHashSeed)));
    cfg.keep_first_dedup = kv.get_bool("keep_first_dedup", false);
    cfg.row_limit = static_cast<std::size_t>(kv.get_int("row_limit", 100'000));
    cfg.register_tag = kv.get("register_tag", "web");
    cfg.dedup_spill_budget = static_cast<std::size_t>(kv.get_int("dedup_spill_budget", 4 << 20));
    return cfg;
  }
};

namespace pipeline_detail {

struct GeoParagraph {
  Paragraph para;
  GeoRef geo;
  std::uint32_t para_index = 0;  // position within its record
};

struct CleanedParagraph {
  std::size_t source = 0;  // index into the GeoParagraph vector
  std::string cleaned;
  std::size_t word_count = 0;
  ScriptClass script = ScriptClass::alphabetic;
};

struct CleanStageResult {
  std::vector<CleanedParagraph> survivors;
  std::uint64_t cleaned_empty = 0;
  std::map<RejectReason, std::uint64_t> rejected;
};

inline std::uint64_t file_digest(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read input: " + p.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return stable_hash64(bytes);
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace pipeline_detail

// Cleaning + filtering as one parallel stage: pure per paragraph, results
// merged in input order. Exposed separately so throughput can be measured.
inline pipeline_detail::CleanStageResult clean_and_filter_stage(
    const std::vector<pipeline_detail::GeoParagraph>& paragraphs, const PipelineConfig& cfg) {
  using pipeline_detail::CleanedParagraph;
  struct Outcome {
    CleanedParagraph cp;
    RejectReason reason = RejectReason::none;
    bool empty = false;
    bool kept = false;
  };
  std::vector<Outcome> outcomes(paragraphs.size());
  parallel_chunks(paragraphs.size(), cfg.workers, 64,
                  [&](std::size_t, std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) {
                      Outcome& o = outcomes[i];
                      std::string cleaned = strip_noise(paragraphs[i].para.text);
                      if (cleaned.empty()) {
                        o.empty = true;
                        continue;
                      }
                      const ScriptClass script = classify_script(cleaned);
                      const std::size_t wc = count_words(cleaned, script, cfg.segmenter);
                      const auto verdict = passes_filters(cleaned, script, wc, cfg.filters);
                      if (!verdict.passed) {
                        o.reason = verdict.reason;
                        continue;
                      }
                      o.kept = true;
                      o.cp = CleanedParagraph{i, std::move(cleaned), wc, script};
                    }
                  });
  pipeline_detail::CleanStageResult result;
  for (auto& o : outcomes) {
    if (o.kept) {
      result.survivors.push_back(std::move(o.cp));
    } else if (o.empty) {
      ++result.cleaned_empty;
    } else {
      ++result.rejected[o.reason];
    }
  }
  return result;
}

struct BuildResult {
  RunManifest manifest;
  std::filesystem::path corpus_dir;
};

// End-to-end corpus build. Stage order is fixed: parse -> georeference ->
// extract paragraphs -> site-scope dedup -> clean -> filter -> period-scope
// dedup -> LID -> country ceiling -> write. Identical inputs and config
// reproduce byte-identical outputs for any worker count.
inline BuildResult run_build(const PipelineConfig& cfg,
                             const std::vector<std::filesystem::path>& inputs,
                             const std::filesystem::path& out_dir) {
  using namespace pipeline_detail;
  using Clock = std::chrono::steady_clock;
  auto ms_since = [](Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  if (cfg.model_path.empty() || !std::filesystem::exists(cfg.model_path)) {
    throw ConfigError("model file missing: " + cfg.model_path.string());
  }
  const LidModel model = LidModel::load(cfg.model_path);
  const TldTables tables = TldTables::load(cfg.tables_dir);
  const PublicSuffixList psl = PublicSuffixList::load(cfg.tables_dir / "public_suffix.dat");

  // Partial output from a crashed run gets quarantined, never merged.
  const auto staging = out_dir.parent_path() / (out_dir.filename().string() + ".staging");
  if (std::filesystem::exists(staging)) {
    std::size_t k = 0;
    std::filesystem::path q;
    do {
      q = out_dir.parent_path() /
          (out_dir.filename().string() + ".quarantine-" + std::to_string(k++));
    } while (std::filesystem::exists(q));
    std::filesystem::rename(staging, q);
  }
  if (std::filesystem::exists(out_dir) && !std::filesystem::is_empty(out_dir)) {
    throw ConfigError("output directory is not empty: " + out_dir.string());
  }
  std::filesystem::create_directories(staging / "corpus");

  RunManifest manifest;
  manifest.config["register"] = cfg.register_tag;
  manifest.config["workers"] = std::to_string(cfg.workers);
  manifest.config["confidence_floor"] = std::to_string(cfg.confidence_floor);
  manifest.config["keep_first_dedup"] = cfg.keep_first_dedup ? "true" : "false";
  manifest.config["row_limit"] = std::to_string(cfg.row_limit);
  manifest.config["model"] = cfg.model_path.string();

  // --- parse + georeference + extract ------------------------------------
  auto t0 = Clock::now();
  std::vector<std::filesystem::path> ordered_inputs = inputs;
  std::sort(ordered_inputs.begin(), ordered_inputs.end());
  std::vector<GeoParagraph> paragraphs;
  for (const auto& input : ordered_inputs) {
    manifest.inputs.emplace_back(input.string(), hex64(file_digest(input)));
    std::ifstream in(input, std::ios::binary);
    if (!in) throw IoError("cannot open input: " + input.string());
    const RecordFormat format = input.extension() == ".jsonl" ? RecordFormat::jsonl
                                                              : RecordFormat::warc_like;
    auto reader = make_record_reader(in, format);
    RawRecord record;
    while (reader->next(record)) {
      const auto geo = tables.georeference(record.url);
      if (!geo) {
        manifest.bump("records_geo_dropped");
        continue;
      }
      const auto paras = extract_paragraphs(record, psl);
      if (paras.empty()) {
        manifest.bump("records_no_paragraphs");
        continue;
      }
      manifest.bump("records_paragraph_yielding");
      std::uint32_t index = 0;
      for (const auto& p : paras) {
        paragraphs.push_back(GeoParagraph{p, *geo, index++});
      }
    }
    manifest.bump("records_read", reader->counters().records);
    manifest.bump("records_skipped", reader->counters().skipped);
    manifest.bump("utf8_replacements", reader->counters().utf8_replacements);
  }
  manifest.bump("paragraphs_extracted", paragraphs.size());
  manifest.stage_ms["parse_extract"] = ms_since(t0);

  // --- site-scope dedup (raw paragraph text) ------------------------------
  t0 = Clock::now();
  std::vector<std::size_t> site_survivors;
  {
    std::map<std::string, std::vector<std::size_t>> by_site;
    for (std::size_t i = 0; i < paragraphs.size(); ++i) {
      by_site[paragraphs[i].para.site].push_back(i);
    }
    for (const auto& [site, members] : by_site) {
      DedupState state(DedupScope::site, site);
      std::vector<std::size_t> local(members);
      const auto kept = dedup_indices(
          local, state, [&](std::size_t idx) { return std::string_view(paragraphs[idx].para.text); },
          cfg.keep_first_dedup);
      for (std::size_t k : kept) site_survivors.push_back(local[k]);
    }
    std::sort(site_survivors.begin(), site_survivors.end());
    manifest.bump("site_dedup_removed", paragraphs.size() - site_survivors.size());
  }
  manifest.stage_ms["site_dedup"] = ms_since(t0);

  // --- clean + filter ------------------------------------------------------
  t0 = Clock::now();
  std::vector<GeoParagraph> site_kept;
  site_kept.reserve(site_survivors.size());
  for (std::size_t i : site_survivors) site_kept.push_back(paragraphs[i]);
  auto clean_result = clean_and_filter_stage(site_kept, cfg);
  manifest.bump("cleaned_empty", clean_result.cleaned_empty);
  std::uint64_t rejected_total = 0;
  for (const auto& [reason, count] : clean_result.rejected) {
    manifest.bump(std::string("filter_rejected_") + std::string(to_string(reason)), count);
    rejected_total += count;
  }
  manifest.bump("filter_rejected", rejected_total);
  manifest.stage_ms["clean_filter"] = ms_since(t0);

  // --- period-scope dedup (cleaned text) -----------------------------------
  t0 = Clock::now();
  std::vector<pipeline_detail::CleanedParagraph> period_kept;
  {
    std::map<std::string, std::vector<std::size_t>> by_period;
    for (std::size_t i = 0; i < clean_result.survivors.size(); ++i) {
      by_period[site_kept[clean_result.survivors[i].source].para.period].push_back(i);
    }
    for (const auto& [period, members] : by_period) {
      SpillingDigestCounter counter(cfg.dedup_spill_budget);
      std::vector<std::uint64_t> digests(members.size());
      for (std::size_t k = 0; k < members.size(); ++k) {
        digests[k] = content_digest(clean_result.survivors[members[k]].cleaned, cfg.digest_seed);
        counter.add(digests[k]);
      }
      counter.finalize();
      std::set<std::uint64_t> emitted;
      for (std::size_t k = 0; k < members.size(); ++k) {
        const bool dup = counter.is_duplicate(digests[k]);
        if (!dup || (cfg.keep_first_dedup && emitted.insert(digests[k]).second)) {
          period_kept.push_back(std::move(clean_result.survivors[members[k]]));
        }
      }
    }
    manifest.bump("period_dedup_removed", clean_result.survivors.size() - period_kept.size());
  }
  manifest.stage_ms["period_dedup"] = ms_since(t0);

  // --- regroup into pages, LID, ceiling ------------------------------------
  t0 = Clock::now();
  struct Page {
    std::string site;
    std::string url;
    std::string period;
    GeoRef geo;
    std::string text;  // paragraph breaks preserved as line breaks
    std::size_t words = 0;
    std::size_t n_paragraphs = 0;
    std::string language;
  };
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::size_t>> by_page;
  for (std::size_t i = 0; i < period_kept.size(); ++i) {
    const auto& src = site_kept[period_kept[i].source];
    by_page[{src.para.site, src.para.url, src.para.period}].push_back(i);
  }
  std::vector<Page> pages;
  pages.reserve(by_page.size());
  for (auto& [key, members] : by_page) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return site_kept[period_kept[a].source].para_index <
             site_kept[period_kept[b].source].para_index;
    });
    Page page;
    const auto& first_src = site_kept[period_kept[members[0]].source];
    page.site = std::get<0>(key);
    page.url = std::get<1>(key);
    page.period = std::get<2>(key);
    page.geo = first_src.geo;
    for (std::size_t m : members) {
      if (!page.text.empty()) page.text.push_back('\n');
      page.text += period_kept[m].cleaned;
      page.words += period_kept[m].word_count;
      ++page.n_paragraphs;
    }
    pages.push_back(std::move(page));
  }

  std::vector<std::optional<DocumentPrediction>> predictions(pages.size());
  parallel_chunks(pages.size(), cfg.workers, 8, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      predictions[i] = predict_document(model, pages[i].text);
    }
  });
  std::vector<Page> identified;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (!predictions[i] || predictions[i]->confidence < cfg.confidence_floor) {
      manifest.bump("lid_unidentifiable_paragraphs", pages[i].n_paragraphs);
      manifest.bump("lid_unidentifiable_pages");
      continue;
    }
    pages[i].language = predictions[i]->language;
    identified.push_back(std::move(pages[i]));
  }
  manifest.stage_ms["lid"] = ms_since(t0);

  // ceiling: first-come in (site, url, period) order
  t0 = Clock::now();
  std::vector<Page> final_pages;
  {
    std::map<std::string, std::size_t> per_country;
    for (auto& page : identified) {
      if (cfg.filters.country_page_ceiling &&
          per_country[page.geo.country] >= *cfg.filters.country_page_ceiling) {
        manifest.bump("ceiling_dropped_paragraphs", page.n_paragraphs);
        manifest.bump("ceiling_dropped_pages");
        continue;
      }
      ++per_country[page.geo.country];
      final_pages.push_back(std::move(page));
    }
  }

  // --- write ----------------------------------------------------------------
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<const Page*>> buckets;
  for (const auto& page : final_pages) {
    buckets[{page.geo.region, page.geo.country, page.language}].push_back(&page);
  }
  std::map<std::pair<std::string, std::string>, std::uint64_t> words_by_country_language;
  std::uint64_t files_written = 0;
  for (const auto& [key, bucket_pages] : buckets) {
    const auto& [region, country, language] = key;
    const auto dir = staging / "corpus" / region / country / language;
    std::filesystem::create_directories(dir);
    std::size_t part = 0;
    std::size_t rows_in_part = 0;
    std::unique_ptr<GzipWriter> writer;
    std::ostringstream row_buf;
    auto open_part = [&]() {
      char name[32];
      std::snprintf(name, sizeof(name), "part-%05zu.csv.gz", part);
      writer = std::make_unique<GzipWriter>(dir / name);
      row_buf.str("");
      csv_write_row(row_buf, {"Language", "URL", "Number of Words", "Text"});
      writer->write(row_buf.str());
      ++files_written;
    };
    open_part();
    for (const Page* page : bucket_pages) {
      if (rows_in_part == cfg.row_limit) {
        writer->close();
        ++part;
        rows_in_part = 0;
        open_part();
      }
      row_buf.str("");
      csv_write_row(row_buf,
                    {page->language, page->url, std::to_string(page->words), page->text});
      writer->write(row_buf.str());
      ++rows_in_part;
      manifest.bump("written_paragraphs", page->n_paragraphs);
      manifest.bump("written_pages");
      manifest.bump("written_words", page->words);
      words_by_country_language[{country, language}] += page->words;
    }
    writer->close();
  }
  manifest.bump("written_files", files_written);
  manifest.stage_ms["write"] = ms_since(t0);

  // density + language composition tables for the demographic analyses
  {
    std::map<std::string, std::uint64_t> density;
    for (const auto& [key, words] : words_by_country_language) density[key.first] += words;
    std::ofstream d(staging / "density.csv", std::ios::binary);
    csv_write_row(d, {"country", "words"});
    for (const auto& [country, words] : density) {
      csv_write_row(d, {country, std::to_string(words)});
    }
    std::ofstream lw(staging / "language_country_words.csv", std::ios::binary);
    csv_write_row(lw, {"country", "language", "words"});
    for (const auto& [key, words] : words_by_country_language) {
      csv_write_row(lw, {key.first, key.second, std::to_string(words)});
    }
  }

  manifest.write(staging / "manifest.txt");
  if (std::filesystem::exists(out_dir)) std::filesystem::remove(out_dir);
  std::filesystem::rename(staging, out_dir);
  return BuildResult{std::move(manifest), out_dir / "corpus"};
}

// Rebuilds unigram frequency lists from a corpus tree:
// one CSV per (register, language, country) under <out>/<register>/<language>/.
inline void run_ngrams(const std::filesystem::path& corpus_dir, const std::filesystem::path& out,
                       const std::string& register_tag, const Segmenter& segmenter = nullptr) {
  if (!std::filesystem::exists(corpus_dir)) {
    throw ConfigError("corpus tree missing: " + corpus_dir.string());
  }
  std::map<std::pair<std::string, std::string>, FrequencyList> lists;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().rfind("part-", 0) == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    const auto language = file.parent_path().filename().string();
    const auto country = file.parent_path().parent_path().filename().string();
    std::istringstream content(gzip_read_all(file));
    CsvReader reader(content);
    std::vector<std::string> row;
    bool first = true;
    while (reader.read_row(row)) {
      if (first) {
        first = false;
        if (!row.empty() && row[0] == "Language") continue;
      }
      if (row.size() < 4) throw IoError("corrupt corpus row in " + file.string());
      auto& fl = lists[{language, country}];
      fl.register_tag = register_tag;
      fl.language = language;
      fl.country = country;
      const std::string& text = row[3];
      fl.add_text(text, classify_script(text), segmenter);
    }
  }
  for (const auto& [key, fl] : lists) write_frequency_csv(out, fl);
}

}  // namespace geocorpus
