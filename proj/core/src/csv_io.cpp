#include "pinncal/datagen/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <vector>

#include "pinncal/errors.hpp"
#include "pinncal/io.hpp"

namespace pinncal::datagen {

using Eigen::MatrixXd;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& token, int line, const char* what) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || token.empty()) {
    throw DataError("line " + std::to_string(line) + ": cannot parse " + what + " '" + token + "'");
  }
  return v;
}

}  // namespace

Rod1DData parse_1d_csv(const std::string& text) {
  Rod1DData data;
  bool have_traction = false, have_length = false, have_header = false;
  std::vector<double> xs, us;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(raw);
    if (line == 1 && s.rfind("\xEF\xBB\xBF", 0) == 0) s = trim(s.substr(3));
    if (s.empty()) continue;
    if (s[0] == '#') {
      const std::string body = trim(std::string_view(s).substr(1));
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(std::string_view(body).substr(0, eq));
      const std::string value = trim(std::string_view(body).substr(eq + 1));
      if (key == "traction_Nmm2") {
        data.traction = parse_number(value, line, "traction_Nmm2");
        have_traction = true;
      } else if (key == "length_mm") {
        data.length = parse_number(value, line, "length_mm");
        have_length = true;
      } else if (key == "width_mm") {
        data.width = parse_number(value, line, "width_mm");
      }
      continue;
    }
    if (!have_header) {
      std::string compact;
      for (char c : s) {
        if (c != ' ' && c != '\t') compact += c;
      }
      if (compact != "x_mm,u_mm") {
        throw DataError("line " + std::to_string(line) + ": expected the column header 'x_mm,u_mm', got '" + s + "'");
      }
      have_header = true;
      continue;
    }
    const auto comma = s.find(',');
    if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos) {
      throw DataError("line " + std::to_string(line) + ": expected two comma-separated values");
    }
    xs.push_back(parse_number(trim(std::string_view(s).substr(0, comma)), line, "x_mm"));
    us.push_back(parse_number(trim(std::string_view(s).substr(comma + 1)), line, "u_mm"));
  }
  if (!have_header) throw DataError("missing the column header 'x_mm,u_mm'");
  if (!have_traction) throw DataError("missing header key traction_Nmm2");
  if (xs.size() < 2) throw DataError("need at least two displacement rows");

  const size_t n = xs.size();
  const bool decreasing = xs[1] < xs[0];
  for (size_t i = 1; i < n; ++i) {
    const bool ok = decreasing ? xs[i] < xs[i - 1] : xs[i] > xs[i - 1];
    if (!ok) throw DataError("coordinates are not strictly monotone at data row " + std::to_string(i + 1));
  }
  if (decreasing) {
    std::reverse(xs.begin(), xs.end());
    std::reverse(us.begin(), us.end());
  }
  data.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(n));
  data.u = Eigen::Map<const Eigen::VectorXd>(us.data(), static_cast<Eigen::Index>(n));
  data.u.array() -= us.front();
  if (!have_length) data.length = xs.back() - xs.front();
  if (!(data.length > 0.0)) throw DataError("length_mm must be positive");
  return data;
}

Rod1DData ingest_1d_csv(const std::filesystem::path& path) {
  try {
    return parse_1d_csv(read_text(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string format_1d_csv(const Rod1DData& data) {
  if (data.x.size() != data.u.size()) throw ConfigError("coordinate and displacement counts differ");
  std::ostringstream out;
  out << "# traction_Nmm2 = " << format_double(data.traction) << '\n';
  out << "# length_mm = " << format_double(data.length) << '\n';
  out << "# width_mm = " << format_double(data.width) << '\n';
  out << "x_mm,u_mm\n";
  for (Eigen::Index i = 0; i < data.x.size(); ++i) {
    out << format_double(data.x[i]) << ',' << format_double(data.u[i]) << '\n';
  }
  return out.str();
}

TrainingSet rod_csv_training_set(const Rod1DData& data) {
  if (data.x.size() < 2) throw ConfigError("need at least two data points");
  TrainingSet set;
  set.dim = 1;
  set.data_points = data.x.transpose();
  set.data_values = data.u.transpose();
  set.pde_points = set.data_points;
  set.work_points = set.data_points;
  const double x0 = data.x.minCoeff(), x1 = data.x.maxCoeff();
  set.volume = x1 - x0;
  set.ext_points = MatrixXd(1, 2);
  set.ext_points << x0, x1;
  set.ext_tractions = MatrixXd(1, 2);
  set.ext_tractions << -data.traction, data.traction;
  set.boundary_measure = 2.0;
  set.neumann_points = set.ext_points;
  set.neumann_normals = MatrixXd(1, 2);
  set.neumann_normals << -1.0, 1.0;
  set.neumann_tractions = set.ext_tractions;
  return set;
}

std::string fem_nodes_csv(const FemSolution& solution, const Eigen::Matrix2Xd& values) {
  if (values.cols() != solution.mesh.num_nodes()) throw ConfigError("nodal values do not match the mesh");
  std::ostringstream out;
  out << "node_id,x_mm,y_mm,ux_mm,uy_mm\n";
  for (int i = 0; i < solution.mesh.num_nodes(); ++i) {
    out << i << ',' << format_double(solution.mesh.nodes(0, i)) << ',' << format_double(solution.mesh.nodes(1, i))
        << ',' << format_double(values(0, i)) << ',' << format_double(values(1, i)) << '\n';
  }
  return out.str();
}

nlohmann::json fem_metadata(const FemSolution& solution, const PlateCase& plate) {
  const auto areas = solution.mesh.lumped_areas();
  return {
      {"case", "plate"},
      {"material", {{"E", plate.material.E}, {"nu", plate.material.nu}}},
      {"ambient", mech::to_string(plate.ambient)},
      {"geometry", {{"length_mm", plate.length}, {"radius_mm", plate.radius}, {"thickness_mm", plate.thickness}}},
      {"traction_Nmm2", {plate.traction.x(), plate.traction.y()}},
      {"mesh",
       {{"nodes", solution.mesh.num_nodes()},
        {"elements", solution.mesh.num_elements()},
        {"edge_divisions", plate.mesh.edge_divisions},
        {"radial_divisions", plate.mesh.radial_divisions},
        {"grading", plate.mesh.grading},
        {"min_nodal_area", areas.minCoeff()},
        {"max_nodal_area", areas.maxCoeff()}}},
      {"max_strain", solution.max_strain},
      {"relative_residual", solution.relative_residual},
      {"internal_work", solution.internal_work},
      {"external_work", solution.external_work},
  };
}

}  // namespace pinncal::datagen
