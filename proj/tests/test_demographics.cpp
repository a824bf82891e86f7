#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "geocorpus/demographics.hpp"

using namespace geocorpus;

namespace {

std::vector<std::optional<double>> boxed(std::initializer_list<double> xs) {
  std::vector<std::optional<double>> out;
  for (double v : xs) out.emplace_back(v);
  return out;
}

}  // namespace

TEST_CASE("pearson is exactly one on linear series") {
  // values chosen so every intermediate is exact in binary floating point
  std::vector<std::optional<double>> x;
  std::vector<std::optional<double>> y;
  for (int i = 1; i <= 10; ++i) {
    x.emplace_back(static_cast<double>(i));
    y.emplace_back(2.0 * i + 3.0);
  }
  const auto up = pearson(x, y);
  CHECK(up.r == 1.0);
  CHECK(up.n == 10);

  std::vector<std::optional<double>> neg;
  for (int i = 1; i <= 10; ++i) neg.emplace_back(static_cast<double>(-i));
  CHECK(pearson(x, neg).r == -1.0);
}

TEST_CASE("pearson 15-country fixture matches the closed form") {
  const auto x = boxed({12, 45, 7, 23, 56, 89, 34, 21, 9, 67, 43, 18, 76, 54, 31});
  const auto y =
      boxed({110, 460, 80, 255, 540, 870, 330, 200, 105, 640, 410, 190, 770, 520, 305});
  const auto pr = pearson(x, y);
  CHECK(pr.n == 15);
  // frozen from an independent sum-formula computation
  CHECK(pr.r == Catch::Approx(0.9983303819722579).margin(1e-12));
}

TEST_CASE("pearson removes null pairs and reports n") {
  std::vector<std::optional<double>> x = {1.0, 2.0, std::nullopt, 4.0, 5.0};
  std::vector<std::optional<double>> y = {2.0, std::nullopt, 3.0, 8.0, 10.0};
  const auto pr = pearson(x, y);
  CHECK(pr.n == 3);  // pairs (1,2) (4,8) (5,10)
  CHECK(pr.r == 1.0);
}

TEST_CASE("pearson undefined cases are errors, never silent zeros") {
  CHECK_THROWS_AS(pearson(boxed({1, 2}), boxed({2, 4})), UndefinedStatError);
  CHECK_THROWS_AS(pearson(boxed({3, 3, 3, 3}), boxed({1, 2, 3, 4})), UndefinedStatError);
  std::vector<std::optional<double>> with_nulls = {1.0, std::nullopt, std::nullopt, 2.0};
  std::vector<std::optional<double>> other = {1.0, 2.0, 3.0, 4.0};
  CHECK_THROWS_AS(pearson(with_nulls, other), UndefinedStatError);
  CHECK_THROWS_AS(pearson(boxed({1, 2, 3}), boxed({1, 2})), ContractError);
}

TEST_CASE("pearson symmetry and affine invariance") {
  const auto x = boxed({12, 45, 7, 23, 56, 89, 34, 21, 9, 67});
  const auto y = boxed({3, 14, 15, 9, 26, 5, 35, 8, 97, 93});
  const double rxy = pearson(x, y).r;
  CHECK(pearson(y, x).r == rxy);
  // positive affine transform of one side
  std::vector<std::optional<double>> scaled;
  for (const auto& v : y) scaled.emplace_back(3.5 * *v + 11.0);
  CHECK(pearson(x, scaled).r == Catch::Approx(rxy).margin(1e-12));
}

TEST_CASE("digital population worked example") {
  CHECK(digital_population(100'000'000.0, 0.5) == 50'000'000.0);
  CHECK(digital_population(8'000'000.0, 0.25) == 2'000'000.0);
  CHECK(digital_population(1'000'000.0, 0.0) == 0.0);
}

TEST_CASE("digital population never exceeds population") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const double pop = static_cast<double>(1 + rng() % 1'000'000'000);
    const double share = static_cast<double>(rng() % 1001) / 1000.0;
    CHECK(digital_population(pop, share) <= pop);
  }
}

TEST_CASE("gdp-weighted digital estimate") {
  CountryStats cs;
  cs.country = "AAA";
  cs.population = 2'000'000;
  cs.internet_share = 0.5;
  cs.gdp_per_capita = 40'000;

  // unit weight when gdp equals the normalizer
  CHECK(*weighted_digital_estimate(cs, 40'000) == Catch::Approx(1'000'000.0));
  // gdp at 2x the mean doubles the estimate
  CHECK(*weighted_digital_estimate(cs, 20'000) == Catch::Approx(2'000'000.0));
  CHECK_THROWS_AS(weighted_digital_estimate(cs, 0.0), ContractError);

  // 5-country fixture against hand arithmetic
  std::vector<CountryStats> fixture(5);
  const double pops[5] = {10e6, 20e6, 5e6, 8e6, 40e6};
  const double shares[5] = {0.5, 0.25, 0.8, 1.0, 0.1};
  const double gdps[5] = {10'000, 20'000, 30'000, 40'000, 50'000};
  for (int i = 0; i < 5; ++i) {
    fixture[i].country = "C" + std::to_string(i);
    fixture[i].population = pops[i];
    fixture[i].internet_share = shares[i];
    fixture[i].gdp_per_capita = gdps[i];
  }
  const double normalizer = mean_gdp(fixture);
  CHECK(normalizer == Catch::Approx(30'000.0));
  for (int i = 0; i < 5; ++i) {
    const double expected = pops[i] * shares[i] * (gdps[i] / 30'000.0);
    CHECK(*weighted_digital_estimate(fixture[i], normalizer) == Catch::Approx(expected));
  }
}

TEST_CASE("weighted estimate is monotone in each input") {
  CountryStats base;
  base.country = "AAA";
  base.population = 1e7;
  base.internet_share = 0.5;
  base.gdp_per_capita = 2e4;
  const double norm = 3e4;
  const double v0 = *weighted_digital_estimate(base, norm);
  CountryStats c = base;
  c.population = 2e7;
  CHECK(*weighted_digital_estimate(c, norm) > v0);
  c = base;
  c.internet_share = 0.9;
  CHECK(*weighted_digital_estimate(c, norm) > v0);
  c = base;
  c.gdp_per_capita = 2.5e4;
  CHECK(*weighted_digital_estimate(c, norm) > v0);
}

TEST_CASE("density correlations on a proportional world") {
  std::vector<CountryStats> stats;
  DensityTable density;
  for (int i = 1; i <= 12; ++i) {
    CountryStats cs;
    cs.country = "C" + std::to_string(i);
    cs.population = 1'000'000.0 * i;
    cs.gdp_per_capita = 10'000 + 500.0 * ((i * 7) % 13);
    cs.internet_share = 0.3 + 0.05 * (i % 7);
    stats.push_back(cs);
    density[cs.country] = static_cast<std::uint64_t>(2000.0 * i);  // proportional to population
  }
  const auto report = density_correlations("web", density, stats);
  for (const auto& row : report.rows) {
    if (row.variable == "population") {
      CHECK(row.r == Catch::Approx(1.0).margin(1e-9));
      CHECK(row.n == 12);
    }
  }
  // identical density tables give cross-source r of exactly 1
  const auto cross = cross_source_density_correlation(density, density);
  CHECK(cross.r == 1.0);
  CHECK(cross.n == 12);
}

TEST_CASE("density correlations report undefined variables instead of zeros") {
  std::vector<CountryStats> stats(4);
  DensityTable density;
  for (int i = 0; i < 4; ++i) {
    stats[i].country = "C" + std::to_string(i);
    stats[i].population = 5'000'000.0;  // constant -> undefined
    stats[i].gdp_per_capita = 10'000.0 + i;
    stats[i].internet_share = 0.5;
    density[stats[i].country] = static_cast<std::uint64_t>(100 + i);
  }
  const auto report = density_correlations("web", density, stats);
  bool saw_undefined_population = false;
  for (const auto& row : report.rows) {
    if (row.variable == "population") saw_undefined_population = !row.error.empty();
  }
  CHECK(saw_undefined_population);
}

TEST_CASE("language profiles normalize per country") {
  std::map<std::pair<std::string, std::string>, std::uint64_t> words;
  words[{"CAN", "eng"}] = 3'000'000;
  words[{"CAN", "fra"}] = 1'000'000;
  words[{"FRA", "fra"}] = 9'000'000;
  const auto profiles = language_profiles(words);
  CHECK(profiles.at("eng").share_by_country.at("CAN") == Catch::Approx(0.75));
  CHECK(profiles.at("fra").share_by_country.at("CAN") == Catch::Approx(0.25));
  CHECK(profiles.at("fra").share_by_country.at("FRA") == 1.0);

  // shares per country sum to one
  std::map<std::string, double> sums;
  for (const auto& [language, profile] : profiles) {
    for (const auto& [country, share] : profile.share_by_country) sums[country] += share;
  }
  for (const auto& [country, total] : sums) CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("profile correlation between sources") {
  LanguageProfile a;
  a.language = "vie";
  LanguageProfile b;
  b.language = "vie";
  const double va[10] = {0.50, 0.20, 0.90, 0.10, 0.35, 0.60, 0.75, 0.05, 0.45, 0.80};
  const double vb[10] = {0.55, 0.25, 0.85, 0.15, 0.30, 0.65, 0.70, 0.10, 0.40, 0.78};
  for (int i = 0; i < 10; ++i) {
    const std::string c = "C" + std::to_string(i);
    a.share_by_country[c] = va[i];
    b.share_by_country[c] = vb[i];
  }
  const auto row = profile_correlation(a, b);
  // frozen from an independent computation; near-uniform shares correlate highly
  CHECK(row.r == Catch::Approx(0.9886917913300652).margin(1e-12));
  CHECK(row.n == 10);

  const auto self = profile_correlation(a, a);
  CHECK(self.r == 1.0);
}

TEST_CASE("census csv ingestion with nulls") {
  const auto path = std::filesystem::temp_directory_path() / "geocorpus-census-test.csv";
  {
    std::ofstream out(path);
    out << "country,population,gdp_per_capita,internet_share\n"
        << "CAN,37000000,45000,0.91\n"
        << "XXX,,30000,0.5\n"
        << "YYY,1000000,,\n";
  }
  const auto stats = read_census_csv(path);
  REQUIRE(stats.size() == 3);
  CHECK(stats[0].population.has_value());
  CHECK_FALSE(stats[1].population.has_value());
  CHECK_FALSE(stats[2].gdp_per_capita.has_value());
  CHECK_FALSE(stats[2].internet_share.has_value());
  std::filesystem::remove(path);
}
