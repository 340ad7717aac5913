// Command-line front end for constrained DMD fits and the benchmark studies.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "icdmd/constraints.h"
#include "icdmd/dictionary.h"
#include "icdmd/dynamics.h"
#include "icdmd/errors.h"
#include "icdmd/experiments.h"
#include "icdmd/serialization.h"
#include "icdmd/solver.h"
#include "icdmd/spectral.h"

namespace fs = std::filesystem;
using namespace icdmd;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

// Thrown for bad paths or option combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::optional<double> tol;
  std::string output_dir;
  std::uint64_t seed{0};
  std::string format{"csv"};

  RankTolerance Tolerance() const {
    return tol ? RankTolerance::Relative(*tol) : RankTolerance::Default();
  }
};

void RequireReadable(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("no such file: " + path);
}

fs::path ResolveOutput(const GlobalOptions& g, const std::string& explicit_path,
                       const std::string& default_name) {
  fs::path out = explicit_path.empty() ? fs::path(default_name)
                                       : fs::path(explicit_path);
  if (out.is_relative() && !g.output_dir.empty()) out = g.output_dir / out;
  const fs::path parent = out.parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw UsageError("cannot create directory " + parent.string());
  }
  return out;
}

std::string Fmt(double v, const char* spec = "%.3e") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void PrintSummary(const ExperimentResult& res) {
  std::cout << "experiment " << res.config.name << " (" << res.config.system
            << "): m=" << res.constraints.m << " n=" << res.samples
            << " dropped=" << res.dropped
            << " invariants=" << res.equalizer.size() << '\n';
  std::printf("%-22s %8s %12s %12s %12s %12s\n", "model", "induced",
              "eig_res", "dual_res", "mean_nstd", "max_nstd");
  for (const ModelResult& mr : res.models) {
    std::printf("%-22s %8s %12s %12s %12s %12s\n", ToString(mr.kind).c_str(),
                mr.induced ? "yes" : "no",
                Fmt(mr.eigenfunctions.eig_residual).c_str(),
                Fmt(mr.eigenfunctions.duality_residual).c_str(),
                Fmt(mr.diagnostics.MeanNormalizedStddev()).c_str(),
                Fmt(mr.diagnostics.MaxNormalizedStddev()).c_str());
  }
  const ModelResult& last = res.models.back();
  if (last.group_labels.size() != last.eigenfunctions.labels.size()) {
    std::cout << "grouped by label (" << ToString(last.kind)
              << "): max_nstd="
              << Fmt(last.group_diagnostics.MaxNormalizedStddev()) << '\n';
  }
  std::cout.flush();
}

// "101" or "101,51" (counts inside the dictionary bounds) or
// "lo:hi:n[,lo:hi:n...]".
SamplingPlan ParseGrid(const std::string& spec, const Box& bounds) {
  SamplingPlan plan;
  plan.bounds.clear();
  plan.counts.clear();
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
  try {
    for (size_t i = 0; i < parts.size(); ++i) {
      const auto c1 = parts[i].find(':');
      if (c1 == std::string::npos) {
        plan.counts.push_back(std::stoi(parts[i]));
        if (i < bounds.size()) plan.bounds.push_back(bounds[i]);
        continue;
      }
      const auto c2 = parts[i].find(':', c1 + 1);
      if (c2 == std::string::npos) throw UsageError("bad grid spec '" + spec + "'");
      plan.bounds.push_back({std::stod(parts[i].substr(0, c1)),
                             std::stod(parts[i].substr(c1 + 1, c2 - c1 - 1))});
      plan.counts.push_back(std::stoi(parts[i].substr(c2 + 1)));
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad grid spec '" + spec + "'");
  }
  if (plan.counts.size() == 1 && bounds.size() > 1) {
    plan.counts.assign(bounds.size(), plan.counts[0]);
    plan.bounds = bounds;
  }
  if (plan.counts.size() != bounds.size() || plan.bounds.size() != bounds.size()) {
    throw UsageError("grid spec '" + spec + "' does not match the dictionary dimension");
  }
  plan.Check();
  return plan;
}

int RunDemo(const GlobalOptions& g, const std::string& name,
            const std::string& config_path, const std::string& scale) {
  ExperimentConfig cfg;
  if (!config_path.empty()) {
    RequireReadable(config_path);
    cfg = ExperimentConfigFromJson(ReadJsonFile(config_path));
  } else {
    cfg = PresetConfig(name, scale == "paper" ? Scale::kPaper : Scale::kDesk);
  }
  if (g.tol) cfg.tol = g.Tolerance();
  cfg.seed = g.seed;
  const fs::path dir = g.output_dir.empty()
                           ? fs::path("results") / (cfg.name.empty() ? "run" : cfg.name)
                           : fs::path(g.output_dir);
  const ExperimentResult res = RunExperiment(cfg);
  WriteResultDirectory(res, dir);
  PrintSummary(res);
  std::cout << "results written to " << dir.string() << '\n';
  return kOk;
}

int RunFit(const GlobalOptions& g, const std::string& x_path,
           const std::string& y_path, const std::string& cs_path,
           const std::string& dict_path, const std::string& output) {
  RequireReadable(x_path);
  RequireReadable(y_path);
  if (!cs_path.empty()) RequireReadable(cs_path);
  if (!dict_path.empty()) RequireReadable(dict_path);
  const fs::path out = ResolveOutput(g, output, "model.json");

  const MatrixXd x = ReadMatrixCsv(x_path);
  const MatrixXd y = ReadMatrixCsv(y_path);
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw ArgumentError("X and Y must have equal shapes");
  }
  ConstraintSet cs = ConstraintSet::Empty(x.rows());
  if (!cs_path.empty()) {
    const Json doc = ReadJsonFile(cs_path);
    if (!doc.empty()) cs = ConstraintSetFromJson(doc);
  }
  std::optional<DictionarySpec> dict;
  if (!dict_path.empty()) {
    dict = DictionarySpecFromJson(ReadJsonFile(dict_path));
    if (dict->Build().size() != x.rows()) {
      throw ArgumentError("dictionary size does not match the rows of X");
    }
  }
  const IcdmdModel model = SolveIcdmd(x, y, cs, g.Tolerance());
  WriteJsonFile(out, ToJson(model, dict));
  std::cout << "objective " << Fmt(model.residual * model.residual)
            << "  residual " << Fmt(model.residual) << "  geometric "
            << Fmt(model.geometric_residual) << "  functional "
            << Fmt(model.functional_residual) << '\n'
            << "model written to " << out.string() << '\n';
  return kOk;
}

int RunEigenfunctions(const GlobalOptions& g, const std::string& model_path,
                      const std::string& grid_spec, const std::string& dict_path,
                      const std::string& output, bool simultaneous) {
  RequireReadable(model_path);
  if (!dict_path.empty()) RequireReadable(dict_path);
  const bool json = g.format == "json";
  const fs::path out =
      ResolveOutput(g, output, json ? "eigenfunctions.json" : "eigenfunctions.csv");

  const StoredModel model = ModelFromJson(ReadJsonFile(model_path));
  std::optional<DictionarySpec> spec = model.dictionary;
  if (!dict_path.empty()) spec = DictionarySpecFromJson(ReadJsonFile(dict_path));
  if (!spec) {
    throw UsageError("model carries no dictionary; pass --dictionary");
  }
  const Dictionary dict = spec->Build();
  if (dict.size() != model.a.rows()) {
    throw ArgumentError("dictionary size does not match the model");
  }
  const Equalizer eq = BuildEqualizer(model.constraints);
  const EigenfunctionSet ef = InducedEigenfunctions(
      model.a, eq, g.Tolerance(),
      simultaneous ? EigenSolveMode::kSimultaneous : EigenSolveMode::kSequential);
  const SamplingPlan plan = ParseGrid(grid_spec, dict.bounds());
  const StateMatrix grid = SampleGrid(plan);
  const MatrixXd values = EvaluateEigenfunctions(ef, dict, grid);
  if (json) {
    Json doc = ToJson(ef);
    doc["grid"] = MatrixToJson(grid);
    doc["values"] = MatrixToJson(values.transpose());
    WriteJsonFile(out, doc);
  } else {
    WriteGridCsv(out, grid, values, ef.labels);
  }
  std::cout << "functions " << ef.w.cols() << "  span " << ef.span_dim
            << "  eig_residual " << Fmt(ef.eig_residual) << "  duality_residual "
            << Fmt(ef.duality_residual) << '\n'
            << "eigenfunctions written to " << out.string() << '\n';
  return kOk;
}

int RunValidate(const GlobalOptions& g, const std::string& cs_path, bool strict) {
  RequireReadable(cs_path);
  const ConstraintSet cs = ConstraintSetFromJson(ReadJsonFile(cs_path));
  const double scale =
      1.0 + std::max({cs.e.norm() * cs.g_plus.norm(), cs.f_plus.norm() * cs.d.norm(),
                      cs.g_plus.norm(), cs.f_plus.norm()});
  const ValidationReport report =
      Validate(cs, kFeasibilityTol * scale,
               strict ? Strictness::kStrict : Strictness::kGeneralized,
               g.Tolerance());
  std::cout << report.ToString() << '\n';
  return report.passed ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariance-constrained dynamic mode decomposition"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  double tol = 0.0;
  auto* tol_opt = app.add_option("--tol", tol, "Relative rank tolerance")
                      ->check(CLI::PositiveNumber);
  app.add_option("--output-dir", g.output_dir, "Directory for outputs");
  app.add_option("--seed", g.seed, "Seed for randomized phases");
  app.add_option("--format", g.format, "Output format for tables")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string demo_name, config_path, scale = "desk";
  auto* demo = app.add_subcommand("demo", "Run a built-in benchmark study");
  auto* name_opt = demo->add_option("name", demo_name, "Study name")
                       ->check(CLI::IsMember(PresetNames()));
  auto* config_opt =
      demo->add_option("--config", config_path, "Experiment config (JSON)");
  name_opt->excludes(config_opt);
  demo->add_option("--scale", scale, "desk or paper")
      ->check(CLI::IsMember({"desk", "paper"}));

  std::string x_path, y_path, cs_path, dict_path, output;
  auto* fit = app.add_subcommand("fit", "Fit a constrained model to CSV data");
  fit->add_option("x_csv", x_path)->required();
  fit->add_option("y_csv", y_path)->required();
  fit->add_option("constraints_json", cs_path);
  fit->add_option("--dictionary", dict_path, "Dictionary descriptor (JSON)");
  fit->add_option("-o,--output", output);

  std::string model_path, grid_spec = "101";
  bool simultaneous = false;
  auto* eig = app.add_subcommand("eigenfunctions",
                                 "Induced eigenfunctions of a fitted model");
  eig->add_option("model_json", model_path)->required();
  eig->add_option("--grid", grid_spec,
                  "Counts per dimension or lo:hi:n per dimension");
  eig->add_option("--dictionary", dict_path, "Override the model's dictionary");
  eig->add_option("-o,--output", output);
  eig->add_flag("--simultaneous", simultaneous,
                "Solve both conditions in one least-squares problem");

  bool strict = false;
  auto* val = app.add_subcommand("validate-constraints",
                                 "Check compatibility and redundancy");
  val->add_option("constraints_json", cs_path)->required();
  val->add_flag("--strict", strict, "Require full column rank of D and E");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (tol_opt->count() > 0) g.tol = tol;

  try {
    if (demo->parsed()) {
      if (demo_name.empty() && config_path.empty()) {
        throw UsageError("demo needs a study name or --config");
      }
      return RunDemo(g, demo_name, config_path, scale);
    }
    if (fit->parsed()) return RunFit(g, x_path, y_path, cs_path, dict_path, output);
    if (eig->parsed()) {
      return RunEigenfunctions(g, model_path, grid_spec, dict_path, output,
                               simultaneous);
    }
    if (val->parsed()) return RunValidate(g, cs_path, strict);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << app.help();
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
