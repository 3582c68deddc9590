#pragma once

#include <filesystem>
#include <string>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "pinncal/datagen/fem.hpp"
#include "pinncal/loss.hpp"

namespace pinncal::datagen {

/// Axial displacement record of a tensile specimen.
struct Rod1DData {
  Eigen::VectorXd x;
  Eigen::VectorXd u;
  double traction = 0.0;
  double length = 0.0;
  double width = 0.0;
};

/// Comment lines start with '#'; header keys appear as "# key = value".
/// Required: traction_Nmm2, columns x_mm,u_mm. length_mm defaults to the
/// coordinate span. The displacement at the smallest x is subtracted.
Rod1DData parse_1d_csv(const std::string& text);
Rod1DData ingest_1d_csv(const std::filesystem::path& path);

std::string format_1d_csv(const Rod1DData& data);

/// Training set with collocation at the data points and traction work at
/// both ends (the specimen is a free body between them).
TrainingSet rod_csv_training_set(const Rod1DData& data);

/// node_id,x_mm,y_mm,ux_mm,uy_mm
std::string fem_nodes_csv(const FemSolution& solution, const Eigen::Matrix2Xd& values);
nlohmann::json fem_metadata(const FemSolution& solution, const PlateCase& plate);

}  // namespace pinncal::datagen
