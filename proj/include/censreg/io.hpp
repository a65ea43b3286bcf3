#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

#include "json.hpp"

#include "censreg/estimator.hpp"
#include "censreg/simulate.hpp"
#include "censreg/types.hpp"
#include "censreg/validation.hpp"

namespace censreg {

inline constexpr const char* kToolVersion = "0.1.0";

struct CsvData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // zero columns allowed (y-only file plus --intercept)
};

// Reads "y,x1,...,xK" CSV. Errors name the offending file line (header is
// line 1). Every value must parse as a finite real.
CsvData read_csv(const std::string& path);

// Writes a dataset back out in the same dialect, 17 significant digits.
void write_dataset_csv(const std::string& path, const Dataset& data);

// Write-to-temp-then-rename so readers never observe a half-written file.
void atomic_write_text(const std::string& path, const std::string& text);

std::string format_double(double v);  // %.17g

nlohmann::json vector_json(const Eigen::VectorXd& v);
nlohmann::json matrix_json(const Eigen::MatrixXd& m);

// Report payloads. Every report carries schema_version, tool_version and the
// seed it was produced under (null when none applies, e.g. fitting a file).
nlohmann::json fit_report_json(const FitResult& res, const Dataset& data,
                               const std::string& input_path,
                               std::optional<std::uint64_t> seed);

nlohmann::json simulate_meta_json(const DgpConfig& cfg, ModelKind kind,
                                  const Dataset& data,
                                  const std::string& csv_path);

nlohmann::json mc_report_json(const McReport& rep);

}  // namespace censreg
