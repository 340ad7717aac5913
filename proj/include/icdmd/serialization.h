#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "icdmd/constraints.h"
#include "icdmd/dictionary.h"
#include "icdmd/experiments.h"
#include "icdmd/solver.h"
#include "icdmd/spectral.h"

namespace icdmd {

using Json = nlohmann::json;

/// Matrices are stored as lists of columns.
Json MatrixToJson(const MatrixXd& m);
MatrixXd MatrixFromJson(const Json& j, Eigen::Index rows);

Json ToJson(const DictionarySpec& spec);
DictionarySpec DictionarySpecFromJson(const Json& j);

Json ToJson(const ConstraintSet& cs);
/// Parses and checks shapes; throws ArgumentError on malformed documents.
ConstraintSet ConstraintSetFromJson(const Json& j);

/// Fitted model as read back from disk.
struct StoredModel {
  MatrixXd a;
  ConstraintSet constraints;
  std::optional<DictionarySpec> dictionary;
};

/// {"A", "C0", "Alsq", "residual", "objective", "geometric_residual",
///  "functional_residual", "constraints", "dictionary"?}
Json ToJson(const IcdmdModel& model,
            const std::optional<DictionarySpec>& dictionary = std::nullopt);
/// Unconstrained model with an empty constraint set.
Json EdmdModelToJson(const MatrixXd& a, double residual,
                     const std::optional<DictionarySpec>& dictionary);
StoredModel ModelFromJson(const Json& j);

Json ToJson(const EigenfunctionSet& ef);
Json ToJson(const InvarianceDiagnostics& diag);

Json ToJson(const ExperimentConfig& cfg);
ExperimentConfig ExperimentConfigFromJson(const Json& j);

Json ReadJsonFile(const std::filesystem::path& path);
void WriteJsonFile(const std::filesystem::path& path, const Json& j);

/// Header row: `label`, then column indices; each row: row index, values.
void WriteMatrixCsv(const std::filesystem::path& path, const MatrixXd& m,
                    const std::string& label = "observable");
MatrixXd ReadMatrixCsv(const std::filesystem::path& path);

/// Columns: one per state coordinate, then one per function.
void WriteGridCsv(const std::filesystem::path& path, const StateMatrix& grid,
                  const MatrixXd& values,
                  const std::vector<std::string>& names);

/// config.json, model_<name>.json, eigenfunctions_<name>.csv,
/// diagnostics.json.
void WriteResultDirectory(const ExperimentResult& result,
                          const std::filesystem::path& dir);

}  // namespace icdmd
