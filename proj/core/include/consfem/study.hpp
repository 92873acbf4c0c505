#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consfem/analysis.hpp"

namespace consfem {

enum class Method { Fem, Fv };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

struct StudyConfig {
  std::string problem = "example1";
  int degree = 1;
  int level_min = 1;
  int level_max = 5;
  std::vector<Method> methods{Method::Fem, Method::Fv};
  std::string csv_path;                 ///< empty: no CSV written
  std::optional<std::string> dump_dir;  ///< per-solution `x y value` dumps
  bool deterministic = true;            ///< single-threaded analysis loops
  int threads = 0;                      ///< 0: hardware concurrency (ignored when deterministic)
  /// Problems without an exact solution are measured against the same method
  /// at level_max + reference_offset.
  int reference_offset = 2;
};

/// Throws ParameterError on an invalid configuration.
void validate(const StudyConfig& config);

/// One (level, method) result.  Absent quantities are nullopt.
struct LevelRecord {
  std::string problem;
  Method method = Method::Fem;
  int degree = 1;
  int level = 1;
  double h = 0.0;
  std::size_t n_dofs = 0;  ///< unknown (free) coefficients
  std::size_t n_constraints = 0;

  std::optional<double> err_l1, err_l2, err_l1_corrected, err_l2_corrected, err_h1, err_w11, err_vh;
  std::optional<double> seminorm_vh, norm_lambda_mh, energy, j_volumes, j_elements;
  /// log2 ratio against the previous level of the same method.
  std::optional<double> rate_l1, rate_l2, rate_l1_corrected, rate_l2_corrected, rate_h1, rate_w11;

  double energy_residual = 0.0;
  double constraint_residual = 0.0;
};

struct ErrorReport {
  StudyConfig config;
  std::vector<LevelRecord> rows;
  /// Provenance of choices that affect the numbers (reference level, ...).
  std::vector<std::string> notes;

  std::vector<const LevelRecord*> rows_for(Method m) const;
};

/// Column header line (no trailing newline).
std::string csv_header();
std::string csv_row(const LevelRecord& r);
/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Build, assemble, solve and analyse every (level, method) pair.  When
/// config.csv_path is set, rows are appended to the file as they complete;
/// on failure a `# FAILED ...` marker line is written before rethrowing.
ErrorReport run_study(const StudyConfig& config);

/// Parse "a:b" (or a single level "a").
std::pair<int, int> parse_level_range(std::string_view text);
std::vector<Method> parse_methods(std::string_view text);

}  // namespace consfem
