#include "cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "sthl/assets.hpp"
#include "sthl/constraints.hpp"
#include "sthl/dsl/json_ast.hpp"
#include "sthl/dsl/parser.hpp"
#include "sthl/dsl/printer.hpp"
#include "sthl/dsl/typecheck.hpp"
#include "sthl/metrics.hpp"
#include "sthl/package.hpp"
#include "sthl/pipeline.hpp"
#include "sthl/solver.hpp"

namespace sthl::cli {
namespace {

namespace fs = std::filesystem;

/// Flag problems found after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Last input read; DSL diagnostics are reported against it.
thread_local std::string last_input;

std::string read_input(const std::string& path) {
  last_input = path;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw package::IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw package::IoError("cannot write " + path);
  out << content;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// --- shared flag groups -----------------------------------------------------------

struct SeedFlag {
  std::uint64_t value = 0;
  CLI::Option* opt = nullptr;

  void add(CLI::App* app) {
    opt = app->add_option("--seed", value, "Random seed (falls back to $STHL_SEED, then 0)");
  }
  std::uint64_t resolve() const {
    if (opt->count() > 0) return value;
    const char* env = std::getenv("STHL_SEED");
    if (env == nullptr || *env == '\0') return 0;
    std::uint64_t v = 0;
    const char* end = env + std::char_traits<char>::length(env);
    const auto [p, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || p != end) throw UsageError(std::string("STHL_SEED is not an unsigned integer: ") + env);
    return v;
  }
};

struct SolverFlags {
  solver::SolverConfig config;

  void add(CLI::App* app) {
    app->add_option("--k", config.batch_size, "Constraints per batch (>= 1)")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
    app->add_option("--T", config.max_iterations, "Solver iterations (>= 0)")
        ->check(CLI::Range(0, 1 << 20))
        ->capture_default_str();
    app->add_option("--moves", config.moves_per_proposal, "Moves per proposal (>= 1)")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
    app->add_option("--samples", config.candidate_samples, "Candidate samples per move (>= 1)")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
    app->add_option("--step", config.translation_step, "Translation step in meters (> 0)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app->add_option("--sweeps", config.relaxation_sweeps, "Physics relaxation sweep limit (>= 1)")
        ->check(CLI::Range(1, 1 << 20))
        ->capture_default_str();
  }
};

struct AssetFlags {
  std::string db;
  double tau = assets::kDefaultTau;
  double lambda_v = assets::kDefaultVisualWeight;
  double lambda_t = assets::kDefaultSemanticWeight;
  std::string provider = "trigram";
  bool no_generate = false;

  void add(CLI::App* app) {
    app->add_option("--db", db, "Asset index (id, model, thumbnail, description[, extents] per line)")
        ->check(CLI::ExistingFile);
    app->add_option("--tau", tau, "Retrieval threshold in [0, 1]")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    app->add_option("--lambda-v", lambda_v, "Visual similarity weight (>= 0)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--lambda-t", lambda_t, "Semantic similarity weight (>= 0)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--provider", provider, "Similarity provider: hash or trigram")
        ->check(CLI::IsMember({"hash", "trigram"}))
        ->capture_default_str();
    app->add_flag("--no-generate", no_generate, "Never generate; keep the best candidate even below tau");
  }

  pipeline::AssetOptions options() const {
    if (!(lambda_v + lambda_t > 0.0)) throw UsageError("--lambda-v and --lambda-t must not both be 0");
    pipeline::AssetOptions o;
    if (!db.empty()) o.database = assets::load_index(db);
    o.tau = tau;
    o.weights = {lambda_v, lambda_t};
    o.provider = provider == "trigram" ? pipeline::ProviderKind::Trigram : pipeline::ProviderKind::Hash;
    o.generator = !no_generate;
    return o;
  }
};

struct EtaFlag {
  double value = scene::kDefaultWallThickness;
  CLI::Option* opt = nullptr;

  void add(CLI::App* app) {
    opt = app->add_option("--eta", value, "Wall thickness in meters for every region (>= 0)")
              ->check(CLI::NonNegativeNumber);
  }
  std::optional<double> get() const { return opt->count() > 0 ? std::optional<double>(value) : std::nullopt; }
};

// --- subcommands ------------------------------------------------------------------

void print_notes(std::ostream& err, const std::string& file, const std::vector<dsl::Diagnostic>& notes) {
  for (const auto& n : notes) err << file << ":" << dsl::format(n) << "\n";
}

int cmd_parse(const std::string& file, bool json_ast, const std::string& out_path, std::ostream& out,
              std::ostream& err) {
  std::vector<dsl::Diagnostic> notes;
  const dsl::Program program = dsl::parse(read_input(file), &notes);
  print_notes(err, file, notes);
  if (json_ast) {
    const std::string text = dsl::to_json(program).dump(2) + "\n";
    if (out_path.empty()) {
      out << text;
    } else {
      write_output(out_path, text);
    }
  } else {
    out << file << ": " << program.statements.size() << " statements\n";
  }
  return kExitOk;
}

int cmd_fmt(const std::string& file, bool in_place, std::ostream& out, std::ostream& err) {
  std::vector<dsl::Diagnostic> notes;
  const std::string text = dsl::print(dsl::parse(read_input(file), &notes));
  print_notes(err, file, notes);
  if (in_place) {
    write_output(file, text);
  } else {
    out << text;
  }
  return kExitOk;
}

int cmd_check(const std::string& file, std::uint64_t seed, std::ostream& out, std::ostream& err) {
  std::vector<dsl::Diagnostic> notes;
  const std::string source = read_input(file);
  dsl::parse(source, &notes);
  print_notes(err, file, notes);
  const auto cp = constraints::compile_source(source, seed);
  std::size_t hidden = 0;
  for (const auto& c : cp.constraints.constraints) hidden += c.provenance == constraints::Provenance::Explicit ? 0 : 1;
  out << file << ": ok, " << cp.layout.regions.size() << " regions, " << cp.layout.objects.size() << " objects, "
      << cp.constraints.size() - hidden << " explicit and " << hidden << " hidden constraints\n";
  return kExitOk;
}

int cmd_solve(const std::string& file, std::uint64_t seed, const solver::SolverConfig& config,
              const std::string& out_path, const std::string& report_path, int verbosity, std::ostream& out,
              std::ostream& err) {
  solver::SolveReport report;
  const auto solved = pipeline::solve_source(read_input(file), seed, config, &report);
  if (!out_path.empty()) write_output(out_path, package::write_solve_output(solved));
  if (!report_path.empty()) write_output(report_path, solved.summary.report);
  if (verbosity > 0) err << solved.summary.report;
  out << file << ": best ratio " << fixed(solved.summary.best_ratio) << " at iteration "
      << solved.summary.best_iteration << " (" << solved.summary.terminated << ")\n";
  return kExitOk;
}

int cmd_assets(const std::string& file, std::uint64_t seed, const AssetFlags& flags, const std::string& out_path,
               std::ostream& out) {
  const auto cp = constraints::compile_source(read_input(file), seed);
  const auto decisions = pipeline::decide_assets(cp.layout, flags.options());
  for (const auto& d : decisions) {
    const auto& a = d.decision;
    out << d.object << "\t" << assets::to_string(a.verdict) << "\t" << (a.best_id.empty() ? "-" : a.best_id) << "\t"
        << fixed(a.best_score) << "\t" << a.asset.ref << (a.below_threshold ? "\tbelow-threshold" : "") << "\n";
  }
  if (!out_path.empty()) write_output(out_path, package::write_decisions(decisions));
  return kExitOk;
}

int cmd_export(const std::string& solve_path, const std::string& assets_path, const std::string& out_dir,
               std::optional<double> eta, std::ostream& out) {
  const auto solved = package::read_solve_output(read_input(solve_path), solve_path);
  std::vector<assets::ObjectDecision> decisions;
  if (!assets_path.empty()) decisions = package::read_decisions(read_input(assets_path), assets_path);
  const auto pkg = pipeline::export_solved(solved, decisions, eta);
  package::write_package(pkg, out_dir);
  out << out_dir << ": " << pkg.objects.size() << " objects, " << pkg.regions.size() << " regions, ratio "
      << fixed(pkg.metadata.best_ratio) << "\n";
  return kExitOk;
}

struct EvalFlags {
  std::string gen, gt, embeddings, solution, out;
  double tau = 0.7;
  double tau_o = -1.0;
  double tau_l = -1.0;
  std::uint64_t seed = 0;
};

nlohmann::ordered_json scores_json(const metrics::MatchScores& s) {
  return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  if (f.gen.empty() != f.gt.empty()) throw UsageError("--gen and --gt go together");
  if (f.gen.empty() && f.solution.empty()) throw UsageError("nothing to evaluate: give --gen/--gt or --solution");
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  if (!f.gen.empty()) {
    const auto gen = constraints::compile_source(read_input(f.gen), f.seed);
    const auto gt = constraints::compile_source(read_input(f.gt), f.seed);
    std::shared_ptr<metrics::Embedder> emb = std::make_shared<metrics::TrigramEmbedder>();
    if (!f.embeddings.empty()) {
      emb = std::make_shared<metrics::TableEmbedder>(metrics::TableEmbedder::load(f.embeddings, emb));
    }
    const double tau_o = f.tau_o >= 0.0 ? f.tau_o : f.tau;
    const double tau_l = f.tau_l >= 0.0 ? f.tau_l : f.tau;
    const auto cmp = metrics::compare_programs(gen, gt, *emb, tau_o, tau_l);
    out << metrics::format_scores("objects", cmp.objects.scores) << metrics::format_scores("layout", cmp.layout.scores)
        << metrics::format_scores("overall", cmp.overall);
    doc["tauObjects"] = tau_o;
    doc["tauLayout"] = tau_l;
    doc["objects"] = scores_json(cmp.objects.scores);
    doc["layout"] = scores_json(cmp.layout.scores);
    doc["overall"] = scores_json(cmp.overall);
  }
  if (!f.solution.empty()) {
    const auto solved = package::read_solve_output(read_input(f.solution), f.solution);
    const auto cp = constraints::compile_source(solved.program, solved.seed);
    const double ratio = metrics::solution_correctness(cp.constraints, solved.summary.layout);
    out << "correctness " << fixed(ratio) << "\n";
    doc["correctness"] = ratio;
  }
  if (!f.out.empty()) write_output(f.out, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_pipeline(const std::string& file, std::uint64_t seed, const solver::SolverConfig& config,
                 const AssetFlags& asset_flags, std::optional<double> eta, const std::string& out_dir, bool keep,
                 int verbosity, std::ostream& out, std::ostream& err) {
  pipeline::Options opts;
  opts.seed = seed;
  opts.solver = config;
  opts.assets = asset_flags.options();
  opts.wall_thickness = eta;
  if (keep) opts.intermediates_dir = (fs::path(out_dir) / "intermediates").string();
  const auto r = pipeline::run(read_input(file), opts);
  package::write_package(r.package, out_dir);
  if (verbosity > 0) err << r.package.report;
  for (const auto& n : r.package.notes) err << "note: " << n << "\n";
  std::size_t generated = 0;
  for (const auto& d : r.decisions) generated += d.decision.verdict == assets::Verdict::Generated ? 1 : 0;
  out << out_dir << ": " << r.package.objects.size() << " objects (" << generated << " generated), ratio "
      << fixed(r.package.metadata.best_ratio) << " (" << r.package.metadata.terminated << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"sthl: ScenethesisLang toolchain", "sthl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "Print solver reports to standard error");

  // parse
  std::string parse_file, parse_out;
  bool json_ast = false;
  auto* parse = app.add_subcommand("parse", "Parse and resolve a program");
  parse->add_option("file", parse_file, "Program (.sthl)")->required()->check(CLI::ExistingFile);
  parse->add_flag("--json-ast", json_ast, "Print the AST as JSON");
  parse->add_option("--out", parse_out, "Write the JSON AST here instead of standard output");

  // fmt
  std::string fmt_file;
  bool in_place = false;
  auto* fmt = app.add_subcommand("fmt", "Print a program in canonical form");
  fmt->add_option("file", fmt_file, "Program (.sthl)")->required()->check(CLI::ExistingFile);
  fmt->add_flag("-i,--in-place", in_place, "Rewrite the file instead of printing");

  // check
  std::string check_file;
  SeedFlag check_seed;
  auto* check = app.add_subcommand("check", "Type check and compile a program");
  check->add_option("file", check_file, "Program (.sthl)")->required()->check(CLI::ExistingFile);
  check_seed.add(check);

  // solve
  std::string solve_file, solve_out, solve_report;
  SeedFlag solve_seed;
  SolverFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "Solve the layout of a program");
  solve->add_option("file", solve_file, "Program (.sthl)")->required()->check(CLI::ExistingFile);
  solve_seed.add(solve);
  solve_flags.add(solve);
  solve->add_option("--out", solve_out, "Solve output (JSON) for `sthl export`");
  solve->add_option("--report", solve_report, "Per-iteration ratios and the verdict table");

  // assets
  std::string assets_file, assets_out;
  SeedFlag assets_seed;
  AssetFlags asset_flags;
  auto* assets_cmd = app.add_subcommand("assets", "Choose an asset for every object");
  assets_cmd->add_option("file", assets_file, "Program (.sthl)")->required()->check(CLI::ExistingFile);
  assets_seed.add(assets_cmd);
  asset_flags.add(assets_cmd);
  assets_cmd->add_option("--out", assets_out, "Decisions (JSON) for `sthl export --assets`");

  // export
  std::string export_in, export_assets, export_out;
  EtaFlag export_eta;
  auto* exp = app.add_subcommand("export", "Write a scene package from a solve output");
  exp->add_option("solve-output", export_in, "Output of `sthl solve --out`")->required()->check(CLI::ExistingFile);
  exp->add_option("--assets", export_assets, "Output of `sthl assets --out`; placeholders when omitted")
      ->check(CLI::ExistingFile);
  exp->add_option("--out", export_out, "Package directory")->required();
  export_eta.add(exp);

  // eval
  EvalFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "Compare programs and score solutions");
  eval->add_option("--gen", eval_flags.gen, "Generated program")->check(CLI::ExistingFile);
  eval->add_option("--gt", eval_flags.gt, "Ground-truth program")->check(CLI::ExistingFile);
  eval->add_option("--tau", eval_flags.tau, "Threshold for objects and layout")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval->add_option("--tau-o", eval_flags.tau_o, "Object threshold (defaults to --tau)")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--tau-l", eval_flags.tau_l, "Layout threshold (defaults to --tau)")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--embeddings", eval_flags.embeddings, "Precomputed vectors: text<TAB>v1,v2,...")
      ->check(CLI::ExistingFile);
  eval->add_option("--solution", eval_flags.solution, "Solve output to score for correctness")
      ->check(CLI::ExistingFile);
  eval->add_option("--out", eval_flags.out, "Scores as JSON");
  SeedFlag eval_seed;
  eval_seed.add(eval);

  // pipeline
  std::string pipe_file, pipe_out, from_text;
  bool keep = false;
  SeedFlag pipe_seed;
  SolverFlags pipe_solver;
  AssetFlags pipe_assets;
  EtaFlag pipe_eta;
  auto* pipe = app.add_subcommand("pipeline", "Program to scene package: compile, assets, solve, export");
  pipe->add_option("file", pipe_file, "Program (.sthl)")->check(CLI::ExistingFile);
  pipe->add_option("--from-text", from_text, "Natural-language description (not supported)");
  pipe->add_option("--out", pipe_out, "Package directory");
  pipe->add_flag("--keep-intermediates", keep,
                 "Also write program, constraints, asset decisions, solve output and per-iteration layouts under "
                 "<out>/intermediates");
  pipe_seed.add(pipe);
  pipe_solver.add(pipe);
  pipe_assets.add(pipe);
  pipe_eta.add(pipe);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (parse->parsed()) return cmd_parse(parse_file, json_ast, parse_out, out, err);
    if (fmt->parsed()) return cmd_fmt(fmt_file, in_place, out, err);
    if (check->parsed()) return cmd_check(check_file, check_seed.resolve(), out, err);
    if (solve->parsed()) {
      return cmd_solve(solve_file, solve_seed.resolve(), solve_flags.config, solve_out, solve_report, verbosity, out,
                       err);
    }
    if (assets_cmd->parsed()) return cmd_assets(assets_file, assets_seed.resolve(), asset_flags, assets_out, out);
    if (exp->parsed()) return cmd_export(export_in, export_assets, export_out, export_eta.get(), out);
    if (eval->parsed()) {
      eval_flags.seed = eval_seed.resolve();
      return cmd_eval(eval_flags, out);
    }
    if (pipe->parsed()) {
      if (!from_text.empty()) {
        err << "sthl pipeline: --from-text is not supported. Translating a description into a program needs a "
               "language model, which this toolchain does not include. Write the scene as a .sthl program and pass "
               "its path instead.\n";
        return kExitUsage;
      }
      if (pipe_file.empty()) throw UsageError("pipeline needs a program file");
      if (pipe_out.empty()) throw UsageError("pipeline needs --out");
      return cmd_pipeline(pipe_file, pipe_seed.resolve(), pipe_solver.config, pipe_assets, pipe_eta.get(), pipe_out,
                          keep, verbosity, out, err);
    }
  } catch (const UsageError& e) {
    err << "sthl: " << e.what() << "\nRun with --help for more information.\n";
    return kExitUsage;
  } catch (const dsl::DslError& e) {
    for (const auto& d : e.diagnostics()) err << last_input << ":" << dsl::format(d) << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "sthl: error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace sthl::cli
