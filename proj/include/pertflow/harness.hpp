#pragma once

// Named experiments, one per verified property, each returning a re-checkable
// report: a numeric table plus assertions whose verdicts follow from the
// table and the configured tolerances alone.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pertflow/config.hpp"

namespace pertflow {

struct Assertion {
  std::string claim;  // the property being asserted, in plain words
  std::string cmp;    // "le", "ge", or "abs_le" (|value| <= threshold)
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct Report {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<Assertion> assertions;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double elapsed_seconds = 0.0;  // informational; excluded from serialization

  bool pass() const;
};

// shipped defaults for every tunable the experiments read; the CLI merges a
// user config and --set overrides on top of this tree
Config default_config();

// experiment names for a suite level, in execution order; level is "fast"
// (deterministic / closed-form, subsecond each) or "full" (adds the Monte
// Carlo slope studies)
std::vector<std::string> experiment_names(const std::string& level);

Report run_experiment(const std::string& name, const Config& cfg, int workers);
std::vector<Report> run_suite(const std::string& level, const Config& cfg, int workers);

bool all_pass(std::span<const Report> reports);

std::string report_text(const Report& r);
std::string report_csv(const Report& r);
std::string suite_text(std::span<const Report> reports);

// canonical byte serialization of everything that defines the results
// (tables, assertions, provenance; wall-clock excluded) — two runs agree iff
// these bytes agree
std::string serialize_reports(std::span<const Report> reports);

// report.txt, one CSV per experiment, and manifest.csv under out_dir
void write_suite_outputs(const std::string& out_dir, std::span<const Report> reports);

}  // namespace pertflow
