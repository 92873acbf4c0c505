#include "consfem/study.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include "consfem/errors.hpp"
#include "consfem/problems.hpp"

namespace consfem {

namespace {

struct SolvedLevel {
  StructuredMesh mesh;
  DualMesh dual;
  FeSpace space;
  SparseSystem system;
  Solution solution;

  SolvedLevel(const ProblemSpec& problem, int level, int degree, Method method)
      : mesh(level, problem.boundary),
        dual(mesh),
        space(mesh, degree),
        system(assemble_system(dual, space, problem)),
        solution(method == Method::Fv ? solve_saddle(system) : solve_unconstrained(system)) {}
};

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParameterError("cannot parse " + std::string(what) + " from '" + std::string(s) + "'");
  }
  return v;
}

void write_dump(const std::string& dir, const ProblemSpec& problem, Method m,
                const SolvedLevel& lvl) {
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) /
                    (problem.id + "_" + std::string(method_name(m)) + "_r" +
                     std::to_string(lvl.space.degree()) + "_M" + std::to_string(lvl.mesh.level()) +
                     ".txt");
  std::ofstream out(path);
  for (std::size_t dof = 0; dof < lvl.space.num_dofs(); ++dof) {
    const Point2 x = lvl.space.dof_point(dof);
    out << format_double(x.x) << ' ' << format_double(x.y) << ' '
        << format_double(lvl.solution.p[static_cast<Eigen::Index>(dof)]) << '\n';
  }
}

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string_view method_name(Method m) { return m == Method::Fem ? "fem" : "fv"; }

Method parse_method(std::string_view name) {
  if (name == "fem") return Method::Fem;
  if (name == "fv") return Method::Fv;
  throw ParameterError("unknown method '" + std::string(name) + "' (expected fem or fv)");
}

std::vector<Method> parse_methods(std::string_view text) {
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!item.empty()) {
      const Method m = parse_method(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::pair<int, int> parse_level_range(std::string_view text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string_view::npos) {
    const int v = parse_int(text, "level");
    return {v, v};
  }
  return {parse_int(text.substr(0, colon), "minimum level"),
          parse_int(text.substr(colon + 1), "maximum level")};
}

void validate(const StudyConfig& c) {
  make_problem(c.problem);
  if (c.degree < 1 || c.degree > 2) {
    throw ParameterError("degree must be 1 or 2, got " + std::to_string(c.degree));
  }
  if (c.level_min < 1) throw ParameterError("minimum level must be >= 1");
  if (c.level_min > c.level_max) {
    throw ParameterError("minimum level " + std::to_string(c.level_min) + " exceeds maximum " +
                         std::to_string(c.level_max));
  }
  if (c.degree == 2 && c.level_max > 10) throw ParameterError("degree 2 is limited to level 10");
  if (c.level_max > StructuredMesh::kMaxLevel) throw ParameterError("maximum level exceeds 12");
  if (c.methods.empty()) throw ParameterError("at least one method is required");
  if (!make_problem(c.problem).exact) {
    if (c.reference_offset < 1) throw ParameterError("reference offset must be >= 1");
    const int ref = c.level_max + c.reference_offset;
    if (ref > StructuredMesh::kMaxLevel || (c.degree == 2 && ref > 10)) {
      throw ParameterError("reference level " + std::to_string(ref) + " is too fine");
    }
  }
}

std::vector<const LevelRecord*> ErrorReport::rows_for(Method m) const {
  std::vector<const LevelRecord*> out;
  for (const auto& r : rows) {
    if (r.method == m) out.push_back(&r);
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InternalError("double formatting failed");
  return std::string(buf, ptr);
}

std::string csv_header() {
  return "problem,method,degree,M,h,n_dofs,n_constraints,err_L1,err_L2,err_L2_corrected,err_H1,"
         "err_W11,err_Vh,seminorm_Vh,norm_lambda_Mh,energy,J_volumes,J_elements,rate_L2,rate_H1";
}

std::string csv_row(const LevelRecord& r) {
  std::ostringstream s;
  s << r.problem << ',' << method_name(r.method) << ',' << r.degree << ',' << r.level << ','
    << format_double(r.h) << ',' << r.n_dofs << ',' << r.n_constraints << ','
    << cell(r.err_l1) << ',' << cell(r.err_l2) << ',' << cell(r.err_l2_corrected) << ','
    << cell(r.err_h1) << ',' << cell(r.err_w11) << ',' << cell(r.err_vh) << ','
    << cell(r.seminorm_vh) << ',' << cell(r.norm_lambda_mh) << ',' << cell(r.energy) << ','
    << cell(r.j_volumes) << ',' << cell(r.j_elements) << ',' << cell(r.rate_l2) << ','
    << cell(r.rate_h1);
  return s.str();
}

ErrorReport run_study(const StudyConfig& config) {
  validate(config);
  const ProblemSpec problem = make_problem(config.problem);

  ErrorReport report;
  report.config = config;
  AnalysisOptions analysis;
  analysis.threads = config.deterministic
                         ? 1
                         : (config.threads > 0 ? config.threads
                                               : static_cast<int>(std::max(
                                                     1u, std::thread::hardware_concurrency())));

  std::unique_ptr<std::ofstream> csv;
  if (!config.csv_path.empty()) {
    const auto parent = std::filesystem::path(config.csv_path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    csv = std::make_unique<std::ofstream>(config.csv_path);
    if (!*csv) throw ParameterError("cannot open '" + config.csv_path + "' for writing");
    *csv << csv_header() << '\n' << std::flush;
  }

  // Reference solutions for problems without an exact solution.
  std::vector<std::pair<Method, std::unique_ptr<SolvedLevel>>> references;
  const int ref_level = config.level_max + config.reference_offset;
  if (!problem.exact) {
    report.notes.push_back("errors measured against the same method at level " +
                           std::to_string(ref_level));
  }

  int current_level = config.level_min;
  Method current_method = config.methods.front();
  try {
    if (!problem.exact) {
      for (Method m : config.methods) {
        current_level = ref_level;
        current_method = m;
        references.emplace_back(m, std::make_unique<SolvedLevel>(problem, ref_level,
                                                                 config.degree, m));
      }
    }
    std::vector<std::optional<LevelRecord>> previous(2);
    for (int level = config.level_min; level <= config.level_max; ++level) {
      for (Method m : config.methods) {
        current_level = level;
        current_method = m;
        const SolvedLevel lvl(problem, level, config.degree, m);

        LevelRecord r;
        r.problem = problem.id;
        r.method = m;
        r.degree = config.degree;
        r.level = level;
        r.h = lvl.mesh.h();
        r.n_dofs = lvl.system.num_free();
        r.n_constraints = m == Method::Fv ? lvl.system.num_constraints() : 0;
        r.energy_residual = lvl.solution.meta.energy_residual;
        r.constraint_residual = lvl.solution.meta.constraint_residual;

        NormErrors e;
        if (problem.exact) {
          e = norm_errors(lvl.solution, problem, lvl.space, lvl.dual, analysis);
        } else {
          const auto it = std::find_if(references.begin(), references.end(),
                                       [m](const auto& ref) { return ref.first == m; });
          const SolvedLevel& ref = *it->second;
          e = reference_errors(DiscreteField(lvl.space, lvl.dual, lvl.solution),
                               DiscreteField(ref.space, ref.dual, ref.solution), analysis);
        }
        r.err_l1 = e.l1;
        r.err_l2 = e.l2;
        r.err_l1_corrected = e.l1_corrected;
        r.err_l2_corrected = e.l2_corrected;
        r.err_h1 = e.h1;
        r.err_w11 = e.w11;
        r.err_vh = e.vh;
        r.seminorm_vh = e.vh_seminorm;
        if (m == Method::Fv) {
          const auto faces = dual_interfaces(lvl.dual);
          r.norm_lambda_mh = multiplier_norm(lvl.solution.lambda, faces, lvl.mesh.h());
        }
        r.energy = energy(lvl.solution, problem, lvl.space);
        r.j_volumes = conservation_indicator(lvl.solution, problem, lvl.space, lvl.dual,
                                             RegionKind::ControlVolumes);
        r.j_elements = conservation_indicator(lvl.solution, problem, lvl.space, lvl.dual,
                                              RegionKind::PrimalElements);

        auto& prev = previous[m == Method::Fem ? 0 : 1];
        if (prev) {
          const auto rate = [](const std::optional<double>& a, const std::optional<double>& b) {
            const double pair[2] = {a.value_or(0.0), b.value_or(0.0)};
            return (a && b) ? convergence_rates(std::span<const double>(pair, 2)).front()
                            : std::optional<double>{};
          };
          r.rate_l1 = rate(prev->err_l1, r.err_l1);
          r.rate_l2 = rate(prev->err_l2, r.err_l2);
          r.rate_l1_corrected = rate(prev->err_l1_corrected, r.err_l1_corrected);
          r.rate_l2_corrected = rate(prev->err_l2_corrected, r.err_l2_corrected);
          r.rate_h1 = rate(prev->err_h1, r.err_h1);
          r.rate_w11 = rate(prev->err_w11, r.err_w11);
        }
        prev = r;

        if (config.dump_dir) write_dump(*config.dump_dir, problem, m, lvl);
        if (csv) *csv << csv_row(r) << '\n' << std::flush;
        report.rows.push_back(std::move(r));
      }
    }
  } catch (const std::exception& ex) {
    if (csv) {
      *csv << "# FAILED problem=" << problem.id << " method=" << method_name(current_method)
           << " degree=" << config.degree << " M=" << current_level << ": " << ex.what() << '\n'
           << std::flush;
    }
    throw;
  }
  return report;
}

}  // namespace consfem
