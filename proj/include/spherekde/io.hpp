#pragma once

#include <string>
#include <vector>

#include "spherekde/geometry.hpp"

namespace spherekde {

/// Reads a point file: one row of d >= 3 Cartesian coordinates per line
/// (comma- or whitespace-separated), optional header row, rows normalized to
/// unit vectors. With `spherical`, rows are (theta, phi) with theta the
/// colatitude in radians. Throws ParseError carrying the line number.
std::vector<UnitVector> read_points_csv(const std::string& path,
                                        bool spherical = false);

/// Writes via a temporary file in the same directory plus an atomic rename,
/// so a failed run never leaves a partial output behind.
void atomic_write_file(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace spherekde
