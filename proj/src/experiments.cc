#include "icdmd/experiments.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <utility>

#include "icdmd/errors.h"
#include "icdmd/parallel.h"

namespace icdmd {
namespace {

using Eigen::Index;

// Rethrows any library error with the failing stage prefixed, keeping the
// exception type.
template <typename Fn>
auto Staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  const auto label = [&](const std::exception& e) {
    return stage + ": " + e.what();
  };
  try {
    return fn();
  } catch (const ArgumentError& e) {
    throw ArgumentError(label(e));
  } catch (const ConstraintError& e) {
    throw ConstraintError(label(e));
  } catch (const SpectralError& e) {
    throw SpectralError(label(e));
  } catch (const IntegrationError& e) {
    throw IntegrationError(label(e));
  } catch (const ComputationError& e) {
    throw ComputationError(label(e));
  } catch (const UnsupportedError& e) {
    throw UnsupportedError(label(e));
  }
}

double BoxVolume(const Box& box) {
  double v = 1.0;
  for (const Interval& iv : box) v *= iv.width();
  return v;
}

std::vector<int> ClassifyGrid(const OdeSystem& sys, const Dictionary& dict,
                              const StateMatrix& grid) {
  std::vector<int> labels(grid.cols(), -1);
  if (sys.partition.kind == InvariantPartition::Kind::kNone) return labels;
  const Box& window = sys.partition.window;
  std::map<Index, std::optional<int>> cache;
  for (Index j = 0; j < grid.cols(); ++j) {
    const VectorXd x = grid.col(j);
    bool inside = true;
    for (size_t i = 0; i < window.size(); ++i) {
      inside = inside && x(i) >= window[i].lo && x(i) <= window[i].hi;
    }
    if (!inside) continue;
    std::optional<int> region;
    if (dict.kind() == Dictionary::Kind::kIndicator) {
      const Index cell = dict.CellIndex(x);
      auto it = cache.find(cell);
      if (it == cache.end()) {
        it = cache.emplace(cell, sys.CellRegion(dict.ResolutionCell(x))).first;
      }
      region = it->second;
    } else {
      region = sys.CellRegion(dict.ResolutionCell(x));
    }
    if (region) labels[j] = *region;
  }
  return labels;
}

// Sums rows that share a label, in order of first appearance.
std::pair<std::vector<std::string>, MatrixXd> GroupRows(
    const MatrixXd& values, const std::vector<std::string>& labels) {
  std::vector<std::string> names;
  std::vector<std::vector<Index>> members;
  for (size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find(names.begin(), names.end(), labels[i]);
    if (it == names.end()) {
      names.push_back(labels[i]);
      members.push_back({static_cast<Index>(i)});
    } else {
      members[it - names.begin()].push_back(static_cast<Index>(i));
    }
  }
  MatrixXd grouped = MatrixXd::Zero(names.size(), values.cols());
  for (size_t g = 0; g < names.size(); ++g) {
    for (Index i : members[g]) grouped.row(g) += values.row(i);
  }
  return {names, grouped};
}

std::vector<double> CyclePhases(const ConstraintRecipe& recipe, double step,
                                std::mt19937_64& rng) {
  if (!recipe.phases.empty()) return recipe.phases;
  if (recipe.count < 1) {
    throw ArgumentError("limit_cycles recipe needs count >= 1");
  }
  std::vector<double> phases(recipe.count);
  std::uniform_real_distribution<double> uniform(0.0, step);
  for (int i = 0; i < recipe.count; ++i) {
    phases[i] = recipe.randomize ? uniform(rng)
                                 : recipe.base_phase + step * i / recipe.count;
  }
  return phases;
}

}  // namespace

std::string ToString(ModelKind kind) {
  switch (kind) {
    case ModelKind::kEdmd:
      return "edmd";
    case ModelKind::kIcdmdConstantOnly:
      return "icdmd_constant_only";
    case ModelKind::kIcdmdFull:
      return "icdmd_full";
  }
  return "unknown";
}

ModelKind ModelKindFromString(const std::string& name) {
  if (name == "edmd") return ModelKind::kEdmd;
  if (name == "icdmd_constant_only") return ModelKind::kIcdmdConstantOnly;
  if (name == "icdmd_full") return ModelKind::kIcdmdFull;
  throw ArgumentError("unknown model '" + name + "'");
}

double InvarianceDiagnostics::MeanNormalizedStddev() const {
  double sum = 0.0;
  Index n = 0;
  for (Index r = 0; r < counts.size(); ++r) {
    if (counts(r) == 0) continue;
    sum += normalized_stddev.col(r).sum();
    n += normalized_stddev.rows();
  }
  return n == 0 ? 0.0 : sum / n;
}

double InvarianceDiagnostics::MaxNormalizedStddev() const {
  double best = 0.0;
  for (Index r = 0; r < counts.size(); ++r) {
    if (counts(r) == 0 || normalized_stddev.rows() == 0) continue;
    best = std::max(best, normalized_stddev.col(r).maxCoeff());
  }
  return best;
}

InvarianceDiagnostics InvarianceScore(const MatrixXd& values,
                                      const std::vector<int>& labels,
                                      const std::vector<std::string>& functions,
                                      const std::vector<std::string>& regions) {
  if (static_cast<Index>(labels.size()) != values.cols()) {
    throw ArgumentError("region labels must match the number of grid points");
  }
  if (static_cast<Index>(functions.size()) != values.rows()) {
    throw ArgumentError("function names must match the number of rows");
  }
  RequireFinite(values, "grid values");
  const Index s = values.rows();
  const Index nr = static_cast<Index>(regions.size());
  InvarianceDiagnostics out;
  out.functions = functions;
  out.regions = regions;
  out.mean = MatrixXd::Zero(s, nr);
  out.stddev = MatrixXd::Zero(s, nr);
  out.normalized_stddev = MatrixXd::Zero(s, nr);
  out.counts = Eigen::VectorXi::Zero(nr);
  out.global_range = VectorXd::Zero(s);
  if (values.cols() > 0) {
    out.global_range = values.rowwise().maxCoeff() - values.rowwise().minCoeff();
  }
  MatrixXd sum = MatrixXd::Zero(s, nr);
  for (size_t j = 0; j < labels.size(); ++j) {
    const int r = labels[j];
    if (r < 0) continue;
    if (r >= nr) throw ArgumentError("region label out of range");
    sum.col(r) += values.col(j);
    ++out.counts(r);
  }
  for (Index r = 0; r < nr; ++r) {
    if (out.counts(r) > 0) out.mean.col(r) = sum.col(r) / out.counts(r);
  }
  MatrixXd sq = MatrixXd::Zero(s, nr);
  for (size_t j = 0; j < labels.size(); ++j) {
    const int r = labels[j];
    if (r < 0) continue;
    sq.col(r) += (values.col(j) - out.mean.col(r)).array().square().matrix();
  }
  for (Index r = 0; r < nr; ++r) {
    if (out.counts(r) == 0) {
      out.empty_regions.push_back(regions[r]);
      continue;
    }
    for (Index i = 0; i < s; ++i) {
      out.stddev(i, r) = std::sqrt(sq(i, r) / out.counts(r));
      const double ratio = out.global_range(i) < 1e-12
                               ? 0.0
                               : out.stddev(i, r) / out.global_range(i);
      out.normalized_stddev(i, r) = ratio < kScoreResolution ? 0.0 : ratio;
    }
  }
  return out;
}

const ModelResult& ExperimentResult::model(ModelKind kind) const {
  for (const ModelResult& m : models) {
    if (m.kind == kind) return m;
  }
  throw ArgumentError("model '" + ToString(kind) + "' was not run");
}

ConstraintSet BuildConstraints(const OdeSystem& sys, const Dictionary& dict,
                               double k,
                               const std::vector<ConstraintRecipe>& recipes,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ConstraintSet cs = ConstraintSet::Empty(dict.size());
  for (const ConstraintRecipe& recipe : recipes) {
    switch (recipe.kind) {
      case ConstraintRecipe::Kind::kFixedPoints: {
        if (sys.fixed_points.cols() == 0) break;
        ConstraintSet fp = FromFixedPoints(dict, sys.fixed_points);
        for (size_t i = 0; i < fp.tags.size(); ++i) {
          fp.tags[i].label = sys.fixed_point_labels.at(i);
        }
        cs = Merge(cs, fp);
        break;
      }
      case ConstraintRecipe::Kind::kLimitCycles: {
        if (sys.cycles.empty()) {
          throw UnsupportedError("system '" + sys.name +
                                 "' has no known limit cycles");
        }
        for (size_t c = 0; c < sys.cycles.size(); ++c) {
          const double step = sys.cycles[c].angular_rate * k;
          for (double phase : CyclePhases(recipe, step, rng)) {
            cs = Merge(cs, FromLimitCycle(dict, PeriodicOrbit(sys, c, k, phase),
                                          sys.cycles[c].label));
          }
        }
        break;
      }
      case ConstraintRecipe::Kind::kConstantFunction:
        cs = Merge(cs, ConstantFunction(dict));
        break;
    }
  }
  return DropDuplicateColumns(cs);
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.config = cfg;
  const OdeSystem sys = Staged("system", [&] { return Builtin(cfg.system); });
  const Dictionary dict =
      Staged("dictionary", [&] { return cfg.dictionary.Build(); });
  if (dict.dim() != sys.dim) {
    throw ArgumentError("dictionary: dimension does not match the system");
  }
  if (cfg.models.empty()) throw ArgumentError("config: no models requested");

  const DataMatrices data = Staged("sampling", [&] {
    return BuildDataMatrices(dict, sys, cfg.plan, cfg.escape);
  });
  res.samples = data.x.cols();
  res.dropped = data.dropped;

  res.constraints = Staged("constraints", [&] {
    return BuildConstraints(sys, dict, cfg.plan.k, cfg.constraints, cfg.seed);
  });
  res.equalizer =
      Staged("equalizer", [&] { return BuildEqualizer(res.constraints); });
  const Index s = res.equalizer.size();

  res.grid = Staged("output grid", [&] { return SampleGrid(cfg.output_grid); });
  const MatrixXd psi_grid =
      Staged("output grid", [&] { return dict.Evaluate(res.grid); });
  res.grid_regions = Staged("regions", [&] { return ClassifyGrid(sys, dict, res.grid); });
  const double volume = BoxVolume(cfg.output_grid.bounds);

  for (ModelKind kind : cfg.models) {
    const std::string stage = "model " + ToString(kind);
    ModelResult mr;
    mr.kind = kind;
    Staged(stage, [&] {
      if (kind == ModelKind::kEdmd) {
        mr.a = SolveEdmd(data.x, data.y, cfg.tol);
      } else {
        const ConstraintSet cs = kind == ModelKind::kIcdmdFull
                                     ? res.constraints
                                     : ConstantFunction(dict);
        mr.icdmd = SolveIcdmd(data.x, data.y, cs, cfg.tol);
        mr.a = mr.icdmd->a;
      }
      mr.residual = FitResidual(mr.a, data.x, data.y);
      if (kind == ModelKind::kIcdmdFull) {
        mr.eigenfunctions = InducedEigenfunctions(*mr.icdmd, res.equalizer,
                                                  cfg.tol, cfg.eigen_mode);
        mr.induced = true;
      } else {
        mr.eigenfunctions =
            EdmdNearestSpanFit(mr.a, res.equalizer.d0, res.equalizer.lambda, s);
        mr.eigenfunctions.labels = res.equalizer.labels;
      }
    });
    Staged(stage + " scoring", [&] {
      mr.values = mr.eigenfunctions.w.transpose() * psi_grid;
      mr.duality = mr.eigenfunctions.w.transpose() * res.equalizer.d0;
      const auto& region_names = sys.partition.region_names;
      mr.diagnostics = InvarianceScore(mr.values, res.grid_regions,
                                       res.equalizer.labels, region_names);
      auto [groups, grouped] = GroupRows(mr.values, res.equalizer.labels);
      mr.group_labels = groups;
      mr.group_values = grouped;
      mr.group_diagnostics =
          InvarianceScore(grouped, res.grid_regions, groups, region_names);
      mr.level_set_measure = VectorXd::Zero(s);
      if (res.grid.cols() > 0) {
        for (Index i = 0; i < s; ++i) {
          const Index hits =
              ((mr.values.row(i).array() - 1.0).abs() <= 0.1).count();
          mr.level_set_measure(i) =
              volume * static_cast<double>(hits) / res.grid.cols();
        }
      }
    });
    res.models.push_back(std::move(mr));
  }
  return res;
}

std::vector<std::string> PresetNames() {
  return {"cubic_multistable", "cubic_halfstable", "duffing",
          "polar_limit_cycles", "cubic_multistable_trig"};
}

ExperimentConfig PresetConfig(const std::string& name, Scale scale) {
  const bool paper = scale == Scale::kPaper;
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.models = {ModelKind::kEdmd, ModelKind::kIcdmdConstantOnly,
                ModelKind::kIcdmdFull};
  ConstraintRecipe fixed;
  fixed.kind = ConstraintRecipe::Kind::kFixedPoints;
  ConstraintRecipe constant;
  constant.kind = ConstraintRecipe::Kind::kConstantFunction;

  if (name == "cubic_multistable" || name == "cubic_halfstable" ||
      name == "cubic_multistable_trig") {
    const bool trig = name == "cubic_multistable_trig";
    cfg.system = trig ? "cubic_multistable" : name;
    cfg.plan.bounds = {{-1.0, 1.0}};
    cfg.plan.k = 0.1;
    cfg.plan.substeps = 50;
    if (trig) {
      cfg.plan.counts = {paper ? 10001 : 2001};
      cfg.dictionary = {Dictionary::Kind::kTrig, {}, {{-1.0, 1.0}}, 10};
    } else {
      cfg.plan.counts = {paper ? 12001 : 1201};
      const int cells = paper ? 61 : 31;
      cfg.dictionary = {Dictionary::Kind::kIndicator, {cells}, {{-1.0, 1.0}}, 0};
    }
    cfg.constraints = {fixed, constant};
    cfg.output_grid.bounds = {{-1.0, 1.0}};
    cfg.output_grid.counts = {2001};
    return cfg;
  }
  if (name == "duffing") {
    cfg.system = name;
    const int n = paper ? 176 : 81;
    const int cells = paper ? 35 : 21;
    cfg.plan.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    cfg.plan.counts = {n, n};
    cfg.plan.k = 1.6;
    cfg.plan.substeps = 160;
    cfg.dictionary = {Dictionary::Kind::kIndicator, {cells, cells},
                      {{-1.0, 1.0}, {-1.0, 1.0}}, 0};
    cfg.constraints = {fixed, constant};
    cfg.output_grid.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    cfg.output_grid.counts = {101, 101};
    return cfg;
  }
  if (name == "polar_limit_cycles") {
    cfg.system = name;
    const int n = paper ? 114 : 81;
    const int cells = paper ? 51 : 21;
    cfg.plan.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    cfg.plan.counts = {n, n};
    cfg.plan.k = 1.0 / 6.0;
    cfg.plan.substeps = 50;
    cfg.dictionary = {Dictionary::Kind::kIndicator, {cells, cells},
                      {{-1.0, 1.0}, {-1.0, 1.0}}, 0};
    ConstraintRecipe cycles;
    cycles.kind = ConstraintRecipe::Kind::kLimitCycles;
    cycles.count = 4;
    cycles.base_phase = 0.01;
    cfg.constraints = {fixed, cycles, constant};
    cfg.output_grid.bounds = {{-1.0, 1.0}, {-1.0, 1.0}};
    cfg.output_grid.counts = {101, 101};
    return cfg;
  }
  throw ArgumentError("unknown experiment '" + name + "'");
}

}  // namespace icdmd
