#include <cstdio>
#include <filesystem>
#include <fstream>
#include <omp.h>

#include "doctest.h"
#include "json.hpp"
#include "sderates/manifest.hpp"
#include "sderates/registry.hpp"

using namespace sderates;
using nlohmann::json;

TEST_CASE("sharpness manifest produces the worked example") {
  const auto m = cli::ExperimentManifest::from_json(
      json{{"experiment_kind", "Sharpness"}, {"epsilon", 0.1}, {"p", 2.0}});
  const auto result = cli::run_experiment(m);
  CHECK(result.exit_code == cli::kExitPass);
  CHECK(result.summary.at("indicator_error").get<double>() == 0.1);
  CHECK(result.summary.at("bound_value").get<double>() ==
        doctest::Approx(0.1890).epsilon(1e-3));
  CHECK(result.summary.at("assertions").at(0).at("pass").get<bool>());
  CHECK(result.csv.find("mesh,n,p,estimate,std_error,bound,slope_partial") !=
        std::string::npos);
}

TEST_CASE("validation failures carry field diagnostics") {
  CHECK_THROWS_WITH_AS(cli::ExperimentManifest::from_json(json{{"model", "gbm"}}),
                       doctest::Contains("experiment_kind"), cli::ManifestError);
  CHECK_THROWS_WITH_AS(
      cli::ExperimentManifest::from_json(
          json{{"experiment_kind", "StrongRate"}, {"scheme", "euler"}, {"epsilon", 0.7}}),
      doctest::Contains("scheme order"), cli::ManifestError);
  CHECK_THROWS_WITH_AS(
      cli::ExperimentManifest::from_json(
          json{{"experiment_kind", "StrongRate"}, {"model", "nope"}}),
      doctest::Contains("model"), cli::ManifestError);
  CHECK_THROWS_WITH_AS(
      cli::ExperimentManifest::from_json(json{{"experiment_kind", "FunctionalRate"},
                                              {"functional", "nope"}}),
      doctest::Contains("functional"), cli::ManifestError);
  CHECK_THROWS(cli::ExperimentManifest::from_json(
      json{{"experiment_kind", "StrongRate"}, {"n_grid", {8, 8}}}));
  CHECK_THROWS_WITH_AS(
      cli::ExperimentManifest::from_json(
          json{{"experiment_kind", "LowerBound"}, {"k_grid", {{"min", 0.5}}}}),
      doctest::Contains("k_grid"), cli::ManifestError);
}

TEST_CASE("set overrides use dotted paths and json parsing") {
  json doc = {{"experiment_kind", "Sharpness"}, {"outputs", {{"dir", "a"}}}};
  doc = cli::apply_overrides(doc, {"epsilon=0.25", "outputs.dir=/tmp/xyz", "model=gbm"});
  CHECK(doc.at("epsilon").get<double>() == 0.25);
  CHECK(doc.at("outputs").at("dir").get<std::string>() == "/tmp/xyz");
  CHECK(doc.at("model").get<std::string>() == "gbm");
  CHECK_THROWS_AS(cli::apply_overrides(doc, {"novalue"}), cli::ManifestError);
}

TEST_CASE("mesh grid converts to step counts") {
  const auto m = cli::ExperimentManifest::from_json(
      json{{"experiment_kind", "StrongRate"}, {"mesh_grid", {0.25, 0.125, 0.0625}}});
  CHECK(m.n_grid == std::vector<int>{4, 8, 16});
}

TEST_CASE("csv output is byte-identical across thread counts") {
  const auto m = cli::ExperimentManifest::from_json(json{{"experiment_kind", "StrongRate"},
                                                         {"model", "gbm"},
                                                         {"scheme", "euler"},
                                                         {"p", 2.0},
                                                         {"n_grid", {8, 16, 32, 64}},
                                                         {"n_paths", 4000},
                                                         {"seed", 31415},
                                                         {"no_timestamp", true}});
  omp_set_num_threads(1);
  const auto r1 = cli::run_experiment(m);
  omp_set_num_threads(omp_get_num_procs());
  const auto r2 = cli::run_experiment(m);
  CHECK(r1.csv == r2.csv);
  CHECK(r1.summary == r2.summary);
  CHECK(r1.plot == r2.plot);
  CHECK(r1.csv.rfind("mesh,n,p,", 0) == 0);  // no timestamp line
}

TEST_CASE("run_and_write places the three artifacts") {
  namespace fs = std::filesystem;
  const std::string dir = "/tmp/sderates_run_test";
  fs::remove_all(dir);
  auto doc = json{{"experiment_kind", "StrongRate"},
                  {"model", "additive"},
                  {"n_grid", {4, 8, 16}},
                  {"n_paths", 500},
                  {"seed", 5},
                  {"outputs", {{"dir", dir}}},
                  {"assertions", {{"slope_min", -10.0}, {"slope_max", 10.0}}}};
  // The additive model is exact under Euler: the strong error is zero and the
  // log-log fit must reject it.
  const auto m = cli::ExperimentManifest::from_json(doc);
  CHECK_THROWS(cli::run_and_write(m));

  doc["model"] = "gbm";
  const auto m2 = cli::ExperimentManifest::from_json(doc);
  const auto result = cli::run_and_write(m2);
  CHECK(result.exit_code == cli::kExitPass);
  CHECK(fs::exists(dir + "/results.csv"));
  CHECK(fs::exists(dir + "/summary.json"));
  CHECK(fs::exists(dir + "/plot.dat"));
  std::ifstream in(dir + "/summary.json");
  json summary;
  in >> summary;
  CHECK(summary.at("experiment_kind") == "StrongRate");
  fs::remove_all(dir);
}

TEST_CASE("registry catalog lists the advertised names") {
  const auto entries = registry::catalog();
  auto has = [&](const std::string& kind, const std::string& name) {
    for (const auto& e : entries)
      if (e.kind == kind && e.name == name) return true;
    return false;
  };
  CHECK(has("model", "gbm"));
  CHECK(has("functional", "indicator"));
  CHECK(has("bump", "euler_tail_bounded"));
  // Stable sort: kinds grouped, names ascending within a kind.
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const bool ordered = entries[i - 1].kind < entries[i].kind ||
                         (entries[i - 1].kind == entries[i].kind &&
                          entries[i - 1].name < entries[i].name);
    CHECK(ordered);
  }
}

TEST_CASE("density probe manifest flags atoms only when present") {
  // Windows must be narrow against the lognormal tail spread to resolve the
  // density peak near 0.22.
  const auto m = cli::ExperimentManifest::from_json(json{{"experiment_kind", "DensityProbe"},
                                                         {"model", "gbm"},
                                                         {"n_paths", 20000},
                                                         {"window_count", 150},
                                                         {"seed", 8}});
  const auto result = cli::run_experiment(m);
  CHECK(result.exit_code == cli::kExitPass);
  CHECK_FALSE(result.summary.at("atoms_flagged").get<bool>());
  CHECK(result.summary.at("estimate").get<double>() ==
        doctest::Approx(1.0844).epsilon(0.2));  // lognormal density peak
}

TEST_CASE("functional rate manifest accepts an inline representation") {
  const json inline_rep = registry::functional_by_name("staircase3").to_json();
  const auto m = cli::ExperimentManifest::from_json(json{{"experiment_kind", "FunctionalRate"},
                                                         {"model", "gbm"},
                                                         {"scheme", "euler"},
                                                         {"functional", inline_rep},
                                                         {"p", 1.0},
                                                         {"n_grid", {8, 16, 32, 64}},
                                                         {"n_paths", 8000},
                                                         {"seed", 77},
                                                         {"assertions",
                                                          {{"slope_min", 0.1},
                                                           {"slope_max", 0.9}}}});
  const auto result = cli::run_experiment(m);
  CHECK(result.summary.at("fitted_slope").get<double>() > 0.0);
}
