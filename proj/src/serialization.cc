#include "icdmd/serialization.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "icdmd/errors.h"

namespace icdmd {
namespace {

using Eigen::Index;
namespace fs = std::filesystem;

template <typename T>
T Field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ArgumentError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ArgumentError(std::string("field '") + key + "': " + e.what());
  }
}

Json BoxToJson(const Box& box) {
  Json out = Json::array();
  for (const Interval& iv : box) out.push_back({iv.lo, iv.hi});
  return out;
}

Box BoxFromJson(const Json& j) {
  if (!j.is_array()) throw ArgumentError("bounds must be a list of [lo, hi]");
  Box box;
  for (const Json& iv : j) {
    if (!iv.is_array() || iv.size() != 2) {
      throw ArgumentError("bounds must be a list of [lo, hi]");
    }
    box.push_back({iv[0].get<double>(), iv[1].get<double>()});
  }
  return box;
}

Json PlanToJson(const SamplingPlan& plan) {
  return {{"bounds", BoxToJson(plan.bounds)},
          {"counts", plan.counts},
          {"k", plan.k},
          {"substeps", plan.substeps}};
}

SamplingPlan PlanFromJson(const Json& j) {
  SamplingPlan plan;
  plan.bounds = BoxFromJson(Field<Json>(j, "bounds"));
  plan.counts = Field<std::vector<int>>(j, "counts");
  if (j.contains("k")) plan.k = Field<double>(j, "k");
  if (j.contains("substeps")) plan.substeps = Field<int>(j, "substeps");
  plan.Check();
  return plan;
}

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double ParseDouble(std::string_view s, const fs::path& path, size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ArgumentError(path.string() + ":" + std::to_string(line) +
                        ": not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path.string());
  return out;
}

}  // namespace

Json MatrixToJson(const MatrixXd& m) {
  Json cols = Json::array();
  for (Index j = 0; j < m.cols(); ++j) {
    std::vector<double> c(m.col(j).data(), m.col(j).data() + m.rows());
    cols.push_back(c);
  }
  return cols;
}

MatrixXd MatrixFromJson(const Json& j, Index rows) {
  if (!j.is_array()) throw ArgumentError("matrix must be a list of columns");
  MatrixXd m(rows, static_cast<Index>(j.size()));
  for (size_t c = 0; c < j.size(); ++c) {
    if (!j[c].is_array() || static_cast<Index>(j[c].size()) != rows) {
      throw ArgumentError("matrix column " + std::to_string(c) + " must have " +
                          std::to_string(rows) + " entries");
    }
    for (Index r = 0; r < rows; ++r) {
      if (!j[c][r].is_number()) throw ArgumentError("matrix entry is not a number");
      m(r, c) = j[c][r].get<double>();
    }
  }
  return m;
}

Json ToJson(const DictionarySpec& spec) {
  Json j;
  j["kind"] = spec.kind == Dictionary::Kind::kIndicator ? "indicator" : "trig";
  j["dim"] = spec.bounds.size();
  j["bounds"] = BoxToJson(spec.bounds);
  if (spec.kind == Dictionary::Kind::kIndicator) {
    j["cells"] = spec.cells;
  } else {
    j["max_freq"] = spec.max_freq;
  }
  return j;
}

DictionarySpec DictionarySpecFromJson(const Json& j) {
  DictionarySpec spec;
  const auto kind = Field<std::string>(j, "kind");
  spec.bounds = BoxFromJson(Field<Json>(j, "bounds"));
  if (j.contains("dim") && Field<size_t>(j, "dim") != spec.bounds.size()) {
    throw ArgumentError("dictionary 'dim' does not match its bounds");
  }
  if (kind == "indicator") {
    spec.kind = Dictionary::Kind::kIndicator;
    spec.cells = Field<std::vector<int>>(j, "cells");
  } else if (kind == "trig") {
    spec.kind = Dictionary::Kind::kTrig;
    spec.max_freq = Field<int>(j, "max_freq");
  } else {
    throw ArgumentError("unknown dictionary kind '" + kind + "'");
  }
  return spec;
}

Json ToJson(const ConstraintSet& cs) {
  Json tags = Json::array();
  for (const InvariantTag& t : cs.tags) {
    tags.push_back(
        {{"kind", t.kind == InvariantTag::Kind::kFixedPoint ? "fixed_point"
                                                            : "limit_cycle"},
         {"column_begin", t.column_begin},
         {"column_count", t.column_count},
         {"states", MatrixToJson(t.state_points)},
         {"label", t.label}});
  }
  return {{"m", cs.m},
          {"D", MatrixToJson(cs.d)},
          {"Gplus", MatrixToJson(cs.g_plus)},
          {"E", MatrixToJson(cs.e)},
          {"Fplus", MatrixToJson(cs.f_plus)},
          {"tags", tags}};
}

ConstraintSet ConstraintSetFromJson(const Json& j) {
  const auto m = Field<Index>(j, "m");
  ConstraintSet cs = ConstraintSet::Empty(m);
  if (j.contains("D")) cs.d = MatrixFromJson(j["D"], m);
  if (j.contains("Gplus")) cs.g_plus = MatrixFromJson(j["Gplus"], m);
  if (j.contains("E")) cs.e = MatrixFromJson(j["E"], m);
  if (j.contains("Fplus")) cs.f_plus = MatrixFromJson(j["Fplus"], m);
  if (j.contains("tags")) {
    for (const Json& t : j["tags"]) {
      InvariantTag tag;
      const auto kind = Field<std::string>(t, "kind");
      if (kind == "fixed_point") {
        tag.kind = InvariantTag::Kind::kFixedPoint;
      } else if (kind == "limit_cycle") {
        tag.kind = InvariantTag::Kind::kLimitCycle;
      } else {
        throw ArgumentError("unknown tag kind '" + kind + "'");
      }
      tag.column_begin = Field<Index>(t, "column_begin");
      tag.column_count = Field<Index>(t, "column_count");
      if (t.contains("states")) {
        const Json& st = t["states"];
        const Index p = st.empty() ? 0 : static_cast<Index>(st[0].size());
        tag.state_points = MatrixFromJson(st, p);
      }
      if (t.contains("label")) tag.label = Field<std::string>(t, "label");
      cs.tags.push_back(std::move(tag));
    }
  }
  cs.CheckWellFormed();
  return cs;
}

Json ToJson(const IcdmdModel& model,
            const std::optional<DictionarySpec>& dictionary) {
  Json j = {{"A", MatrixToJson(model.a)},
            {"C0", MatrixToJson(model.c0)},
            {"Alsq", MatrixToJson(model.a_lsq)},
            {"residual", model.residual},
            {"objective", model.residual * model.residual},
            {"geometric_residual", model.geometric_residual},
            {"functional_residual", model.functional_residual},
            {"constraints", ToJson(model.constraints)}};
  if (dictionary) j["dictionary"] = ToJson(*dictionary);
  return j;
}

Json EdmdModelToJson(const MatrixXd& a, double residual,
                     const std::optional<DictionarySpec>& dictionary) {
  Json j = {{"A", MatrixToJson(a)},
            {"residual", residual},
            {"objective", residual * residual},
            {"geometric_residual", 0.0},
            {"functional_residual", 0.0},
            {"constraints", ToJson(ConstraintSet::Empty(a.rows()))}};
  if (dictionary) j["dictionary"] = ToJson(*dictionary);
  return j;
}

StoredModel ModelFromJson(const Json& j) {
  StoredModel out;
  if (!j.is_object() || !j.contains("A")) {
    throw ArgumentError("model document needs field 'A'");
  }
  const Json& a = j["A"];
  const Index m = a.empty() ? 0 : static_cast<Index>(a[0].size());
  out.a = MatrixFromJson(a, m);
  if (out.a.rows() != out.a.cols()) throw ArgumentError("model 'A' must be square");
  out.constraints = j.contains("constraints")
                        ? ConstraintSetFromJson(j["constraints"])
                        : ConstraintSet::Empty(m);
  if (out.constraints.m != m) {
    throw ArgumentError("model constraints do not match the size of 'A'");
  }
  if (j.contains("dictionary")) {
    out.dictionary = DictionarySpecFromJson(j["dictionary"]);
  }
  return out;
}

Json ToJson(const EigenfunctionSet& ef) {
  return {{"lambda", ef.lambda},
          {"W", MatrixToJson(ef.w)},
          {"eig_residual", ef.eig_residual},
          {"duality_residual", ef.duality_residual},
          {"span_dim", ef.span_dim},
          {"labels", ef.labels}};
}

Json ToJson(const InvarianceDiagnostics& diag) {
  Json per = Json::array();
  for (size_t i = 0; i < diag.functions.size(); ++i) {
    Json regions = Json::array();
    for (size_t r = 0; r < diag.regions.size(); ++r) {
      regions.push_back({{"region", diag.regions[r]},
                         {"count", diag.counts(r)},
                         {"mean", diag.mean(i, r)},
                         {"stddev", diag.stddev(i, r)},
                         {"normalized_stddev", diag.normalized_stddev(i, r)}});
    }
    per.push_back({{"function", diag.functions[i]},
                   {"global_range", diag.global_range(i)},
                   {"regions", regions}});
  }
  return {{"functions", per},
          {"empty_regions", diag.empty_regions},
          {"mean_normalized_stddev", diag.MeanNormalizedStddev()},
          {"max_normalized_stddev", diag.MaxNormalizedStddev()}};
}

Json ToJson(const ExperimentConfig& cfg) {
  Json recipes = Json::array();
  for (const ConstraintRecipe& r : cfg.constraints) {
    switch (r.kind) {
      case ConstraintRecipe::Kind::kFixedPoints:
        recipes.push_back({{"kind", "fixed_points"}});
        break;
      case ConstraintRecipe::Kind::kLimitCycles:
        recipes.push_back({{"kind", "limit_cycles"},
                           {"count", r.count},
                           {"phases", r.phases},
                           {"base_phase", r.base_phase},
                           {"randomize", r.randomize}});
        break;
      case ConstraintRecipe::Kind::kConstantFunction:
        recipes.push_back({{"kind", "constant_function"}});
        break;
    }
  }
  Json models = Json::array();
  for (ModelKind k : cfg.models) models.push_back(ToString(k));
  Json tol = nullptr;
  if (cfg.tol.value) {
    tol = {{"mode", cfg.tol.mode == RankTolerance::Mode::kRelative ? "relative"
                                                                   : "absolute"},
           {"value", *cfg.tol.value}};
  }
  const char* escape = cfg.escape == EscapePolicy::kClamp      ? "clamp"
                       : cfg.escape == EscapePolicy::kDropColumn ? "drop"
                                                                 : "error";
  return {{"name", cfg.name},
          {"system", cfg.system},
          {"plan", PlanToJson(cfg.plan)},
          {"escape", escape},
          {"dictionary", ToJson(cfg.dictionary)},
          {"constraints", recipes},
          {"models", models},
          {"output_grid", PlanToJson(cfg.output_grid)},
          {"seed", cfg.seed},
          {"tol", tol},
          {"eigen_mode", cfg.eigen_mode == EigenSolveMode::kSequential
                             ? "sequential"
                             : "simultaneous"}};
}

ExperimentConfig ExperimentConfigFromJson(const Json& j) {
  ExperimentConfig cfg;
  if (j.contains("name")) cfg.name = Field<std::string>(j, "name");
  cfg.system = Field<std::string>(j, "system");
  cfg.plan = PlanFromJson(Field<Json>(j, "plan"));
  if (j.contains("escape")) {
    const auto e = Field<std::string>(j, "escape");
    if (e == "clamp") {
      cfg.escape = EscapePolicy::kClamp;
    } else if (e == "drop") {
      cfg.escape = EscapePolicy::kDropColumn;
    } else if (e == "error") {
      cfg.escape = EscapePolicy::kError;
    } else {
      throw ArgumentError("unknown escape policy '" + e + "'");
    }
  }
  cfg.dictionary = DictionarySpecFromJson(Field<Json>(j, "dictionary"));
  for (const Json& r : Field<Json>(j, "constraints")) {
    ConstraintRecipe recipe;
    const auto kind = Field<std::string>(r, "kind");
    if (kind == "fixed_points") {
      recipe.kind = ConstraintRecipe::Kind::kFixedPoints;
    } else if (kind == "limit_cycles") {
      recipe.kind = ConstraintRecipe::Kind::kLimitCycles;
      if (r.contains("count")) recipe.count = Field<int>(r, "count");
      if (r.contains("phases")) recipe.phases = Field<std::vector<double>>(r, "phases");
      if (r.contains("base_phase")) recipe.base_phase = Field<double>(r, "base_phase");
      if (r.contains("randomize")) recipe.randomize = Field<bool>(r, "randomize");
    } else if (kind == "constant_function") {
      recipe.kind = ConstraintRecipe::Kind::kConstantFunction;
    } else {
      throw ArgumentError("unknown constraint recipe '" + kind + "'");
    }
    cfg.constraints.push_back(recipe);
  }
  for (const auto& name : Field<std::vector<std::string>>(j, "models")) {
    cfg.models.push_back(ModelKindFromString(name));
  }
  cfg.output_grid = PlanFromJson(Field<Json>(j, "output_grid"));
  if (j.contains("seed")) cfg.seed = Field<std::uint64_t>(j, "seed");
  if (j.contains("tol") && !j["tol"].is_null()) {
    const Json& t = j["tol"];
    const auto mode = Field<std::string>(t, "mode");
    const auto value = Field<double>(t, "value");
    if (mode == "relative") {
      cfg.tol = RankTolerance::Relative(value);
    } else if (mode == "absolute") {
      cfg.tol = RankTolerance::Absolute(value);
    } else {
      throw ArgumentError("unknown tolerance mode '" + mode + "'");
    }
  }
  if (j.contains("eigen_mode")) {
    const auto mode = Field<std::string>(j, "eigen_mode");
    if (mode == "sequential") {
      cfg.eigen_mode = EigenSolveMode::kSequential;
    } else if (mode == "simultaneous") {
      cfg.eigen_mode = EigenSolveMode::kSimultaneous;
    } else {
      throw ArgumentError("unknown eigen_mode '" + mode + "'");
    }
  }
  return cfg;
}

Json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ArgumentError(path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const fs::path& path, const Json& j) {
  auto out = OpenForWrite(path);
  out << j.dump(1) << '\n';
}

void WriteMatrixCsv(const fs::path& path, const MatrixXd& m,
                    const std::string& label) {
  auto out = OpenForWrite(path);
  out << label;
  for (Index j = 0; j < m.cols(); ++j) out << ',' << j;
  out << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    out << i;
    for (Index j = 0; j < m.cols(); ++j) out << ',' << FormatDouble(m(i, j));
    out << '\n';
  }
}

MatrixXd ReadMatrixCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError(path.string() + ": empty file");
  const size_t cols = SplitCommas(line).size() - 1;
  std::vector<double> values;
  size_t rows = 0;
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitCommas(line);
    if (cells.size() != cols + 1) {
      throw ArgumentError(path.string() + ":" + std::to_string(lineno) +
                          ": expected " + std::to_string(cols + 1) + " fields");
    }
    for (size_t c = 1; c < cells.size(); ++c) {
      values.push_back(ParseDouble(cells[c], path, lineno));
    }
    ++rows;
  }
  MatrixXd m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) m(i, j) = values[i * cols + j];
  }
  return m;
}

void WriteGridCsv(const fs::path& path, const StateMatrix& grid,
                  const MatrixXd& values, const std::vector<std::string>& names) {
  if (values.cols() != grid.cols() ||
      static_cast<Index>(names.size()) != values.rows()) {
    throw ArgumentError("grid export: inconsistent shapes");
  }
  auto out = OpenForWrite(path);
  for (Index d = 0; d < grid.rows(); ++d) {
    out << (d ? "," : "") << "x" << d + 1;
  }
  for (const std::string& n : names) out << ",\"" << n << '"';
  out << '\n';
  for (Index j = 0; j < grid.cols(); ++j) {
    for (Index d = 0; d < grid.rows(); ++d) {
      out << (d ? "," : "") << FormatDouble(grid(d, j));
    }
    for (Index i = 0; i < values.rows(); ++i) {
      out << ',' << FormatDouble(values(i, j));
    }
    out << '\n';
  }
}

void WriteResultDirectory(const ExperimentResult& result, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ArgumentError("cannot create " + dir.string() + ": " + ec.message());
  WriteJsonFile(dir / "config.json", ToJson(result.config));
  Json diag;
  diag["experiment"] = result.config.name;
  diag["system"] = result.config.system;
  diag["samples"] = result.samples;
  diag["dropped"] = result.dropped;
  diag["equalizer_labels"] = result.equalizer.labels;
  diag["models"] = Json::array();
  for (const ModelResult& mr : result.models) {
    const std::string name = ToString(mr.kind);
    Json model = mr.icdmd ? ToJson(*mr.icdmd, result.config.dictionary)
                          : EdmdModelToJson(mr.a, mr.residual,
                                            result.config.dictionary);
    model["eigenfunctions"] = ToJson(mr.eigenfunctions);
    WriteJsonFile(dir / ("model_" + name + ".json"), model);
    WriteGridCsv(dir / ("eigenfunctions_" + name + ".csv"), result.grid,
                 mr.values, mr.eigenfunctions.labels);
    diag["models"].push_back(
        {{"model", name},
         {"induced", mr.induced},
         {"eig_residual", mr.eigenfunctions.eig_residual},
         {"duality_residual", mr.eigenfunctions.duality_residual},
         {"span_dim", mr.eigenfunctions.span_dim},
         {"norm_A", mr.a.norm()},
         {"duality", MatrixToJson(mr.duality)},
         {"level_set_measure",
          std::vector<double>(mr.level_set_measure.data(),
                              mr.level_set_measure.data() +
                                  mr.level_set_measure.size())},
         {"invariance", ToJson(mr.diagnostics)},
         {"grouped_invariance", ToJson(mr.group_diagnostics)}});
  }
  WriteJsonFile(dir / "diagnostics.json", diag);
}

}  // namespace icdmd
