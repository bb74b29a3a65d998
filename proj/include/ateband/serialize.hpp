#pragma once

#include <Eigen/Core>
#include <string>

#include "json.hpp"

#include "ateband/cox.hpp"
#include "ateband/gformula.hpp"
#include "ateband/resampling.hpp"
#include "ateband/simulate.hpp"

namespace ateband {

inline constexpr const char* kVersion = "0.1.0";

// All writers embed {"version": kVersion} and, when given, the run
// configuration under "config", so outputs are self-describing.

nlohmann::json coxfit_to_json(const CoxFit& fit);
CoxFit coxfit_from_json(const nlohmann::json& j);

nlohmann::json curve_to_json(const Eigen::VectorXd& times,
                             const Eigen::VectorXd& values);
std::string curve_to_csv(const Eigen::VectorXd& times, const Eigen::VectorXd& values,
                         const std::string& value_header = "value");

std::string matrix_to_csv(const Eigen::MatrixXd& m);

// Inverse of parse_dataset, same schema.
std::string dataset_to_csv(const Dataset& ds);

nlohmann::json band_to_json(const ConfidenceBand& band,
                            const nlohmann::json* config = nullptr);

// One replicate per row, grid in the header comment of the metadata file.
std::string ensemble_to_csv(const ResampleEnsemble& ens);
nlohmann::json ensemble_metadata(const ResampleEnsemble& ens,
                                 const nlohmann::json* config = nullptr);

nlohmann::json scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const nlohmann::json& j);

nlohmann::json coverage_to_json(const CoverageReport& rep,
                                const nlohmann::json* config = nullptr);
std::string coverage_table(const CoverageReport& rep);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ateband
