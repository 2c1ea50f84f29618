#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "approxk/error.hpp"
#include "approxk/runner.hpp"

namespace {

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace approxk;
  CLI::App app{"Numerical workbench for approximate Mayer-Vietoris boundary maps"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<Index> grid;
  std::string out, format;
  int jobs = 1;
  app.add_option("--tol", tol, "membership tolerance (overrides APPROXK_TOL)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--grid", grid, "loop grid size")->check(CLI::Range(8, 1 << 20));
  app.add_option("--out", out, "write the report here instead of stdout");
  app.add_option("--format", format, "json or csv (default: csv for sweep, json otherwise)")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 1024));

  std::string scenario;
  const std::map<std::string, std::string> by_kind = {
      {"run", ""},
      {"check-ideal-structure", "ideal_structure"},
      {"boundary", "boundary"},
      {"iota-lift", "iota_lift"},
      {"sigma-witness", "sigma_witness"},
      {"whitehead", "whitehead"},
      {"uniformity", "uniformity"},
      {"product-check", "product_check"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, kind] : by_kind) {
    std::string help = kind.empty() ? "run every check of a scenario" : "run the " + kind + " checks of a scenario";
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("scenario", scenario, "scenario JSON file")->required();
    subs[name] = sub;
  }
  std::string sweep_kind;
  int count = 0;
  CLI::App* sw = app.add_subcommand("sweep", "randomized sweep, one CSV row per draw");
  sw->add_option("kind", sweep_kind, "riesz | invcut | uniformity")
      ->required()
      ->check(CLI::IsMember({"riesz", "invcut", "uniformity"}));
  sw->add_option("--count", count, "number of draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sw->parsed()) {
      runner::SweepOptions so;
      so.kind = sweep_kind;
      so.count = count;
      so.seed = seed.value_or(1);
      so.grid = grid.value_or(256);
      so.jobs = jobs;
      runner::SweepTable t = runner::sweep(so);
      emit(format == "json" ? t.to_json().dump(2) + "\n" : t.to_csv(), out);
      return t.all_passed ? 0 : 1;
    }
    runner::RunOptions ro;
    ro.tol = tol;
    ro.seed = seed;
    ro.grid = grid;
    ro.jobs = jobs;
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      if (!by_kind.at(name).empty()) ro.only_kind = by_kind.at(name);
    }
    runner::Report rep = runner::run_scenario_file(scenario, ro);
    emit(format == "csv" ? rep.to_csv() : rep.to_json().dump(2) + "\n", out);
    return rep.all_passed() ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.kind() == ErrorKind::SchemaViolation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
