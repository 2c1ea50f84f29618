#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "approxk/matrix.hpp"

// Scenario files, reports and randomized sweeps behind the command-line tool.
namespace approxk::runner {

inline constexpr const char* kTool = "approxk";
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchema = 1;

using json = nlohmann::json;

std::string fnv1a_hex(std::string_view bytes);

struct RunOptions {
  std::optional<double> tol;            // membership_tol
  std::optional<std::uint64_t> seed;
  std::optional<Index> grid;            // loop scenarios only
  std::optional<std::string> only_kind; // run just the checks of this kind
  int jobs = 1;
};

struct CheckRecord {
  std::string name;
  std::string kind;
  std::string inputs_digest;
  json measured = json::object();
  json classes = json::object();
  bool passed = false;
  std::string error;
};

struct Report {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;

  bool all_passed() const;
  // Everything except the timestamp; equal runs give equal payloads.
  json payload() const;
  json to_json() const;
  std::string to_csv() const;
};

// Throws Error(SchemaViolation) on anything the schema does not allow.
Report run_scenario(const json& scenario, const RunOptions& opt = {});
Report run_scenario_file(const std::string& path, const RunOptions& opt = {});

struct SweepOptions {
  std::string kind;  // riesz | invcut | uniformity
  int count = 0;     // 0 picks the default for the kind
  std::uint64_t seed = 1;
  Index grid = 256;
  int jobs = 1;
};

struct SweepTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  bool all_passed = true;
  std::string to_csv() const;
  json to_json() const;
};

SweepTable sweep(const SweepOptions& opt);

// Per-draw seed used by the sweeps, so rows do not depend on scheduling.
std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t index);

struct RieszDraw {
  CMatrix e;
  double delta = 0.0;  // ||e^2 - e||
  double c = 0.0;      // ||e||
};
// n <= 6, delta in [1e-6, 1e-2], ||e|| <= 5.
RieszDraw riesz_draw(Rng& rng);

struct InvCutDraw {
  CMatrix u, h;
};
// n <= 4, commutator defect at most 1e-2, h a positive contraction.
InvCutDraw invcut_draw(Rng& rng);

}  // namespace approxk::runner
