#pragma once

// Registry of named inequality checks. Every check assembles its two sides
// from the other modules, records for each sub-quantity whether it is exact
// or a directed bound, and only reports a strict violation when the
// directional algebra guarantees one.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entlab/entmeasures.hpp"
#include "entlab/entropy.hpp"
#include "entlab/io.hpp"

namespace entlab {

enum class Soundness { Strict, Heuristic };
const char* to_string(Soundness s);

/// What a check consumes.
enum class InputKind { State, Hermitians, Pmf };

struct CheckSpec {
  std::string id;
  std::string quote;      // short phrase of the statement being tested
  std::string statement;  // lhs ≥ rhs (or lhs = rhs) in plain notation
  SystemLayout layout;    // default sampling layout (labels are required on inputs)
  InputKind input = InputKind::State;
  Soundness soundness = Soundness::Strict;
  bool identity = false;  // two-sided: |lhs − rhs| ≤ tolerance
  std::string note;
};

/// Complete registry in a stable order.
const std::vector<CheckSpec>& list_checks();
/// Throws ParameterError for unknown ids.
const CheckSpec& find_check(const std::string& id);

struct CheckConfig {
  double tol_strict = 1e-7;
  double tol_identity = 1e-9;
  double tol_heur = 1e-3;
  /// Slack allowed on witness-level trace-inequality chains.
  double tol_chain = 1e-6;
  int quad_n = 201;
  std::uint64_t seed = 0;
  /// ginibre | pure | separable | ppt (state checks); markov_zero always samples Markov states.
  std::string sampler = "ginibre";
  /// Per-label dimension overrides of the default layout; "H" sets the
  /// matrix size of Hermitian inputs, "X","Y","Z" the alphabet sizes of pmfs.
  std::map<std::string, int> dims;
  EntOptions ent = desk_options();
  SolverBudget meas{4, 200, 0, 20, 40, 20};

  /// Solver budgets sized for qubit-scale sweeps.
  static EntOptions desk_options();
};

struct CheckInput {
  std::optional<LabeledOperator> state;
  std::optional<LabeledOperator> second;  // σ for pairwise checks
  std::vector<Mat> hermitians;
  std::optional<Pmf3> pmf;
};

/// Seeded input for trial `trial` of check `id`.
CheckInput sample_input(const std::string& id, const CheckConfig& cfg, std::uint64_t trial);

struct Quantity {
  std::string name;
  double value = 0.0;
  Direction direction = Direction::Exact;
  bool incomplete = false;
};

/// A secondary inequality evaluated inside a check (witness-level chains,
/// consistency identities). `strict` layers can fail a run.
struct Layer {
  std::string name;
  double lhs = 0.0, rhs = 0.0, gap = 0.0, tolerance = 0.0;
  bool strict = true;
  bool two_sided = false;
  bool violated = false;
};

struct GapReport {
  std::string check;
  std::uint64_t trial = 0;
  double lhs = 0.0, rhs = 0.0, gap = 0.0;
  double tolerance = 0.0;
  bool strict = true;
  bool two_sided = false;
  std::vector<Quantity> quantities;
  std::vector<Layer> layers;
  Json witnesses = Json::object();
  Json budget = Json::object();
  bool incomplete = false;

  /// Main gap beyond tolerance (any soundness).
  bool main_violated() const;
  /// A strict main gap or strict layer beyond tolerance: a hard failure.
  bool strict_violation() const;
  /// Heuristic main gap or heuristic layer beyond tolerance.
  bool heuristic_slack() const;
  /// pass | strict_violation | incomplete | heuristic_slack
  std::string verdict() const;
};

Json to_json(const GapReport& r);

/// Throws ParameterError (unknown id) or LayoutError (input does not match).
GapReport run_check(const std::string& id, const CheckInput& input, const CheckConfig& cfg,
                    std::uint64_t trial = 0);
/// run_check on sample_input(id, cfg, trial).
GapReport run_trial(const std::string& id, const CheckConfig& cfg, std::uint64_t trial);

struct SweepSummary {
  std::string check;
  int trials = 0;
  double min_gap = 0.0;
  double p05_gap = 0.0;
  int violations = 0;         // reports with any gap beyond its tolerance
  int strict_violations = 0;
  int incomplete = 0;
};

struct SweepResult {
  std::vector<GapReport> reports;  // trial order
  SweepSummary summary;
};

/// Trials are independent; results do not depend on `parallelism`.
SweepResult run_sweep(const std::string& id, const CheckConfig& cfg, int trials, int parallelism = 0);
SweepSummary summarize(const std::string& id, const std::vector<GapReport>& reports);

Json to_json(const SweepSummary& s);
/// check,trials,min_gap,p05_gap,violations
std::string summary_csv(const std::vector<SweepSummary>& rows);

}  // namespace entlab
