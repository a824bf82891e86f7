// Command-line front end: build / ngrams / compare / demographics /
// lid-train / lid-eval / lid-predict.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "geocorpus/clean.hpp"
#include "geocorpus/config.hpp"
#include "geocorpus/csv.hpp"
#include "geocorpus/demographics.hpp"
#include "geocorpus/errors.hpp"
#include "geocorpus/frequency.hpp"
#include "geocorpus/lid_model.hpp"
#include "geocorpus/lid_train.hpp"
#include "geocorpus/pipeline.hpp"
#include "geocorpus/similarity.hpp"

namespace fs = std::filesystem;
using namespace geocorpus;

namespace {

std::vector<fs::path> collect_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::recursive_directory_iterator(p)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension();
        if (ext == ".jsonl" || ext == ".warc" || ext == ".wet" || ext == ".txt") {
          files.push_back(entry.path());
        }
      }
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Training manifest: CSV of (path, language, domain), one text file per row.
LidDataset load_training_manifest(const fs::path& manifest_path, std::uint32_t dim,
                                  std::uint64_t hash_seed, bool normalize) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open training manifest: " + manifest_path.string());
  CsvReader reader(in);
  std::vector<std::string> row;
  std::vector<std::array<std::string, 3>> entries;
  bool first = true;
  while (reader.read_row(row)) {
    if (row.size() < 3) continue;
    if (first && row[0] == "path") {
      first = false;
      continue;
    }
    first = false;
    entries.push_back({row[0], row[1], row[2]});
  }
  LidDatasetBuilder builder;
  for (const auto& e : entries) builder.note(e[1], e[2]);
  LidDataset data = builder.freeze();
  const fs::path base = manifest_path.parent_path();
  for (const auto& e : entries) {
    fs::path p(e[0]);
    if (p.is_relative()) p = base / p;
    std::ifstream text_in(p, std::ios::binary);
    if (!text_in) throw ConfigError("cannot open training file: " + p.string());
    std::string line;
    while (std::getline(text_in, line)) {
      const std::string cleaned = strip_noise(line);
      if (cleaned.empty()) continue;
      data.add_text(cleaned, e[1], e[2], dim, hash_seed, normalize);
    }
  }
  return data;
}

void write_eval_report(const EvalReport& report, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "per_domain.csv", std::ios::binary);
    csv_write_row(out, {"domain", "macro_f1", "n_samples"});
    for (const auto& [domain, f1] : report.per_domain_macro_f1) {
      csv_write_row(out, {domain, std::to_string(f1),
                          std::to_string(report.per_domain_support.at(domain))});
    }
  }
  {
    std::ofstream out(out_dir / "per_language.csv", std::ios::binary);
    csv_write_row(out, {"language", "precision", "recall", "f1", "support"});
    for (const auto& [language, m] : report.per_language) {
      csv_write_row(out, {language, std::to_string(m.precision), std::to_string(m.recall),
                          std::to_string(m.f1), std::to_string(m.support)});
    }
  }
  {
    std::ofstream out(out_dir / "confusion.csv", std::ios::binary);
    csv_write_row(out, {"true", "predicted", "count"});
    for (const auto& [truth, preds] : report.confusion) {
      for (const auto& [pred, count] : preds) {
        csv_write_row(out, {truth, pred, std::to_string(count)});
      }
    }
  }
}

int run(int argc, char** argv) {
  CLI::App app{"geo-referenced web corpus toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::size_t workers = 1;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "key = value config file");
  app.add_option("--workers", workers, "parallel workers inside stages");
  app.add_option("--seed", seed, "seed for stochastic components");

  // ---- build ----
  auto* build = app.add_subcommand("build", "construct the corpus tree from crawl records");
  std::vector<std::string> build_inputs;
  std::string build_out;
  std::string build_model;
  std::string tables_dir = "data";
  build->add_option("--input", build_inputs, "input files or directories")->required();
  build->add_option("--out", build_out, "output directory")->required();
  build->add_option("--model", build_model, "LID model file");
  build->add_option("--tables", tables_dir, "TLD/region table directory");

  // ---- ngrams ----
  auto* ngrams = app.add_subcommand("ngrams", "export unigram frequency lists");
  std::string ngrams_corpus;
  std::string ngrams_out;
  std::string ngrams_register = "web";
  ngrams->add_option("--corpus", ngrams_corpus, "corpus tree root")->required();
  ngrams->add_option("--out", ngrams_out, "frequency list output root")->required();
  ngrams->add_option("--register", ngrams_register, "register tag for the layout");

  // ---- compare ----
  auto* compare = app.add_subcommand("compare", "corpus similarity between two sources");
  std::string cmp_a;
  std::string cmp_b;
  std::string cmp_reg_a = "web";
  std::string cmp_reg_b = "twitter";
  std::uint64_t cmp_min_words = 1'000'000;
  std::string cmp_out;
  compare->add_option("--a", cmp_a, "frequency tree A root")->required();
  compare->add_option("--b", cmp_b, "frequency tree B root")->required();
  compare->add_option("--register-a", cmp_reg_a, "register tag under tree A");
  compare->add_option("--register-b", cmp_reg_b, "register tag under tree B");
  compare->add_option("--min-words", cmp_min_words, "word floor per sub-corpus");
  compare->add_option("--out", cmp_out, "report directory")->required();

  // ---- demographics ----
  auto* demo = app.add_subcommand("demographics", "correlate corpus density with census data");
  std::string census_path;
  std::vector<std::string> density_specs;
  std::vector<std::string> profile_specs;
  std::string demo_out;
  demo->add_option("--census", census_path, "census CSV")->required();
  demo->add_option("--density", density_specs, "NAME=density.csv (repeatable)")->required();
  demo->add_option("--profiles", profile_specs, "NAME=language_country_words.csv (repeatable)");
  demo->add_option("--out", demo_out, "report directory")->required();

  // ---- lid-train ----
  auto* train_cmd = app.add_subcommand("lid-train", "train the language identification model");
  std::string train_manifest;
  std::string train_out;
  TrainConfig tc;
  std::string metrics_out;
  train_cmd->add_option("--manifest", train_manifest, "CSV of path,language,domain")->required();
  train_cmd->add_option("--out", train_out, "model output file")->required();
  train_cmd->add_option("--dim", tc.dim, "hashing dimension");
  train_cmd->add_option("--epochs", tc.epochs, "epoch budget");
  train_cmd->add_option("--batch", tc.batch_size, "minibatch size");
  train_cmd->add_option("--lr", tc.learning_rate, "learning rate");
  train_cmd->add_option("--momentum", tc.momentum, "momentum");
  train_cmd->add_option("--dropout", tc.dropout, "dropout rate");
  train_cmd->add_option("--samples-per-pair", tc.samples_per_pair,
                        "observations per language-domain pair per epoch");
  train_cmd->add_option("--hidden", tc.hidden, "hidden layer sizes");
  train_cmd->add_option("--metrics", metrics_out, "per-epoch metrics CSV");

  // ---- lid-eval ----
  auto* eval_cmd = app.add_subcommand("lid-eval", "evaluate a model per domain and language");
  std::string eval_model;
  std::string eval_manifest;
  std::string eval_out;
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "CSV of path,language,domain")->required();
  eval_cmd->add_option("--out", eval_out, "report directory")->required();

  // ---- lid-predict ----
  auto* predict_cmd = app.add_subcommand("lid-predict", "predict language for stdin text");
  std::string predict_model;
  predict_cmd->add_option("--model", predict_model, "model file")->required();

  CLI11_PARSE(app, argc, argv);

  KeyValueConfig kv;
  if (!config_path.empty()) kv = KeyValueConfig::from_file(config_path);

  if (build->parsed()) {
    PipelineConfig cfg = PipelineConfig::from_config(kv);
    if (!build_model.empty()) cfg.model_path = build_model;
    if (build->count("--tables") != 0 || cfg.tables_dir.empty()) cfg.tables_dir = tables_dir;
    if (app.count("--workers") != 0) cfg.workers = workers;
    const auto result = run_build(cfg, collect_inputs(build_inputs), build_out);
    std::cout << "pages written: " << result.manifest.counter("written_pages") << "\n"
              << "manifest: " << (fs::path(build_out) / "manifest.txt").string() << "\n";
    return 0;
  }

  if (ngrams->parsed()) {
    run_ngrams(ngrams_corpus, ngrams_out, ngrams_register);
    std::cout << "frequency lists written under " << ngrams_out << "\n";
    return 0;
  }

  if (compare->parsed()) {
    const auto lists_a = read_frequency_tree(cmp_a, cmp_reg_a);
    const auto lists_b = read_frequency_tree(cmp_b, cmp_reg_b);
    const auto cross = cross_source_similarity(lists_a, lists_b, cmp_min_words);
    fs::create_directories(cmp_out);
    {
      std::ofstream out(fs::path(cmp_out) / "cross_observations.csv", std::ios::binary);
      csv_write_row(out, {"language", "country", "rho", "n_aligned"});
      for (const auto& obs : cross.observations) {
        csv_write_row(out, {obs.language, obs.country, std::to_string(obs.rho),
                            std::to_string(obs.n_aligned)});
      }
    }
    {
      std::ofstream out(fs::path(cmp_out) / "cross_summary.csv", std::ios::binary);
      csv_write_row(out, {"language", "n_countries", "avg_similarity", "std_deviation"});
      for (const auto& [language, s] : cross.per_language) {
        csv_write_row(out, {language, std::to_string(s.n_observations), std::to_string(s.mean),
                            std::to_string(s.stddev)});
      }
    }
    auto write_within = [&](const std::vector<FrequencyList>& lists, const std::string& name) {
      const auto within = within_source_similarity(lists, cmp_min_words);
      std::ofstream out(fs::path(cmp_out) / name, std::ios::binary);
      csv_write_row(out, {"language", "n_countries", "n_pairs", "similarity", "std_deviation"});
      for (const auto& row : within.rows) {
        csv_write_row(out, {row.language, std::to_string(row.n_countries),
                            std::to_string(row.n_pairs), std::to_string(row.mean),
                            std::to_string(row.stddev)});
      }
      for (const auto& skipped : within.skipped_languages) {
        std::cerr << "note: " << name << ": fewer than 2 qualifying countries for " << skipped
                  << "\n";
      }
    };
    write_within(lists_a, "within_" + cmp_reg_a + ".csv");
    write_within(lists_b, "within_" + cmp_reg_b + ".csv");
    std::cout << cross.observations.size() << " observations across "
              << cross.per_language.size() << " languages\n";
    return 0;
  }

  if (demo->parsed()) {
    const auto stats = read_census_csv(census_path);
    fs::create_directories(demo_out);
    std::map<std::string, DensityTable> densities;
    for (const auto& spec : density_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos) throw ConfigError("--density expects NAME=PATH: " + spec);
      densities[spec.substr(0, eq)] = read_density_csv(spec.substr(eq + 1));
    }
    std::ofstream out(fs::path(demo_out) / "density_correlations.csv", std::ios::binary);
    out << "# gdp_weighting = multiplicative, normalized by mean gdp over census countries\n";
    out << "# nulls are removed pairwise; n reports surviving pairs\n";
    csv_write_row(out, {"source", "variable", "r", "n", "note"});
    for (const auto& [name, density] : densities) {
      const auto report = density_correlations(name, density, stats);
      for (const auto& row : report.rows) {
        csv_write_row(out, {name, row.variable, row.error.empty() ? std::to_string(row.r) : "",
                            std::to_string(row.n), row.error});
      }
    }
    for (auto ita = densities.begin(); ita != densities.end(); ++ita) {
      for (auto itb = std::next(ita); itb != densities.end(); ++itb) {
        const auto row = cross_source_density_correlation(ita->second, itb->second);
        csv_write_row(out, {ita->first + "+" + itb->first, row.variable,
                            row.error.empty() ? std::to_string(row.r) : "",
                            std::to_string(row.n), row.error});
      }
    }

    if (!profile_specs.empty()) {
      std::map<std::string, std::map<std::string, LanguageProfile>> sources;
      for (const auto& spec : profile_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--profiles expects NAME=PATH: " + spec);
        std::ifstream in(spec.substr(eq + 1), std::ios::binary);
        if (!in) throw IoError("cannot read profile table: " + spec.substr(eq + 1));
        CsvReader reader(in);
        std::vector<std::string> row;
        std::map<std::pair<std::string, std::string>, std::uint64_t> words;
        bool first = true;
        while (reader.read_row(row)) {
          if (row.size() < 3) continue;
          if (first && row[0] == "country") {
            first = false;
            continue;
          }
          first = false;
          words[{row[0], row[1]}] += std::stoull(row[2]);
        }
        sources[spec.substr(0, eq)] = language_profiles(words);
      }
      std::ofstream pout(fs::path(demo_out) / "profile_correlations.csv", std::ios::binary);
      csv_write_row(pout, {"source_pair", "language", "r", "n", "note"});
      for (auto ita = sources.begin(); ita != sources.end(); ++ita) {
        for (auto itb = std::next(ita); itb != sources.end(); ++itb) {
          for (const auto& [language, profile_a] : ita->second) {
            const auto itp = itb->second.find(language);
            if (itp == itb->second.end()) continue;
            const auto row = profile_correlation(profile_a, itp->second);
            csv_write_row(pout, {ita->first + "+" + itb->first, language,
                                 row.error.empty() ? std::to_string(row.r) : "",
                                 std::to_string(row.n), row.error});
          }
        }
      }
    }
    std::cout << "reports written under " << demo_out << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    tc.seed = seed;
    tc.workers = static_cast<std::uint32_t>(workers);
    const auto data = load_training_manifest(train_manifest, tc.dim, tc.hash_seed,
                                             tc.normalize_features);
    LidModel model(tc.dim, tc.hidden, static_cast<std::uint32_t>(data.labels.size()), tc.dropout,
                   tc.seed, tc.hash_seed, kTrigramsPerWindow);
    model.set_labels(data.labels);
    Trainer<float> trainer(model, data, tc);
    const auto result = trainer.train();
    model.save(train_out);
    if (!metrics_out.empty()) {
      std::ofstream out(metrics_out, std::ios::binary);
      csv_write_row(out, {"epoch", "train_loss", "test_macro_f1"});
      for (const auto& m : result.epochs) {
        csv_write_row(out, {std::to_string(m.epoch), std::to_string(m.train_loss),
                            std::to_string(m.test_macro_f1)});
      }
    }
    std::cout << "best epoch " << result.best_epoch << " test macro F1 " << result.best_test_f1
              << "; model saved to " << train_out << "\n";
    return 0;
  }

  if (eval_cmd->parsed()) {
    const auto model = LidModel::load(eval_model);
    const auto data = load_training_manifest(eval_manifest, model.input_dim(), model.hash_seed(),
                                             true);
    if (data.labels != model.labels()) {
      std::cerr << "note: manifest language inventory differs from the model's\n";
    }
    const auto report = evaluate(model, data, Split::eval, workers);
    write_eval_report(report, eval_out);
    std::cout << "overall macro F1 " << report.macro_f1 << "; per-domain report under "
              << eval_out << "\n";
    return 0;
  }

  if (predict_cmd->parsed()) {
    const auto model = LidModel::load(predict_model);
    std::string text((std::istreambuf_iterator<char>(std::cin)),
                     std::istreambuf_iterator<char>());
    const auto doc = predict_document(model, strip_noise(text));
    if (!doc) {
      std::cout << "und\t0\n";
      return 0;
    }
    std::cout << doc->language << "\t" << doc->confidence << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ContractError& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return static_cast<int>(ExitCode::contract);
  } catch (const UndefinedStatError& e) {
    std::cerr << "undefined statistic: " << e.what() << "\n";
    return static_cast<int>(ExitCode::contract);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::fatal);
  }
}
