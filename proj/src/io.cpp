#include "spherekde/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spherekde/errors.hpp"

namespace spherekde {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string token;
  std::istringstream row(line);
  if (line.find(',') != std::string::npos) {
    while (std::getline(row, token, ',')) fields.push_back(token);
  } else {
    while (row >> token) fields.push_back(token);
  }
  return fields;
}

bool parse_double(const std::string& field, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(field, &pos);
    while (pos < field.size() && std::isspace(static_cast<unsigned char>(
                                     field[pos]))) {
      ++pos;
    }
    return pos == field.size();
  } catch (...) {
    return false;
  }
}

}  // namespace

std::vector<UnitVector> read_points_csv(const std::string& path,
                                        bool spherical) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open '" + path + "'");
  }
  std::vector<UnitVector> points;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  bool first_data_row = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;

    std::vector<double> values(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (!parse_double(fields[k], values[k])) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first_data_row) continue;  // header row
      throw ParseError("line " + std::to_string(line_no) + ": non-numeric "
                       "field in '" + line + "'");
    }
    if (first_data_row) {
      columns = fields.size();
      first_data_row = false;
    } else if (fields.size() != columns) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " columns, got " +
                       std::to_string(fields.size()));
    }

    try {
      if (spherical) {
        if (values.size() != 2) {
          throw ParseError("line " + std::to_string(line_no) +
                           ": spherical input needs (theta, phi)");
        }
        const double theta = values[0];
        const double phi = values[1];
        Eigen::VectorXd x(3);
        x << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
            std::cos(theta);
        points.emplace_back(UnitVector(std::move(x)));
      } else {
        if (values.size() < 3) {
          throw ParseError("line " + std::to_string(line_no) +
                           ": need at least 3 coordinates per row");
        }
        Eigen::VectorXd x =
            Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
        points.emplace_back(UnitVector(std::move(x)));
      }
    } catch (const std::domain_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (points.empty()) {
    throw ParseError("'" + path + "': no points parsed");
  }
  return points;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    }
    out << content;
    out.flush();
    if (!out) {
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace spherekde
