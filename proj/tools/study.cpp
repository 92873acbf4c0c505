// Command-line driver for convergence and conservation studies.
//
//   study --problem example1 --degree 2 --levels 1:6 --methods fem,fv --out q2.csv
//
// Options may also come from a flat key=value file given with --config;
// flags on the command line take precedence.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "consfem/errors.hpp"
#include "consfem/problems.hpp"
#include "consfem/study.hpp"

namespace {

std::string join_ids() {
  std::string out;
  for (auto id : consfem::problem_ids()) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative high-order finite element convergence studies"};
  app.set_config("--config", "", "flat key=value file mirroring the command-line flags");

  std::string problem = "example1";
  int degree = 1;
  std::string levels = "1:5";
  std::string methods = "fem,fv";
  std::string out;
  std::string dump_dir;
  bool deterministic = false;
  int threads = 0;
  int reference_offset = 2;

  app.add_option("--problem", problem, "problem id (" + join_ids() + ")");
  app.add_option("--degree", degree, "polynomial degree r of the Q^r space")
      ->check(CLI::IsMember({1, 2}));
  app.add_option("--levels", levels, "level range min:max, h = 2^-M");
  app.add_option("--methods", methods, "comma-separated subset of fem,fv");
  app.add_option("--out", out, "CSV output path")->required();
  app.add_option("--dump-fields", dump_dir, "directory for `x y value` nodal dumps");
  app.add_flag("--deterministic", deterministic, "single-threaded analysis loops");
  app.add_option("--threads", threads, "analysis worker threads (0 = all cores)");
  app.add_option("--reference-offset", reference_offset,
                 "levels above the finest one used as reference for problems without exact solution");

  CLI11_PARSE(app, argc, argv);

  try {
    consfem::StudyConfig config;
    config.problem = problem;
    config.degree = degree;
    std::tie(config.level_min, config.level_max) = consfem::parse_level_range(levels);
    config.methods = consfem::parse_methods(methods);
    config.csv_path = out;
    if (!dump_dir.empty()) config.dump_dir = dump_dir;
    config.deterministic = deterministic;
    config.threads = threads;
    config.reference_offset = reference_offset;

    const consfem::ErrorReport report = consfem::run_study(config);
    for (const auto& note : report.notes) std::cerr << "note: " << note << '\n';
    std::cout << consfem::csv_header() << '\n';
    for (const auto& row : report.rows) std::cout << consfem::csv_row(row) << '\n';
  } catch (const consfem::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "study failed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
