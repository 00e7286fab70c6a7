#pragma once

#include <string>

#include "topoadv/persistence.hpp"
#include "topoadv/pointcloud.hpp"

namespace topoadv {

// EMB1 binary format: ASCII magic "EMB1", then three little-endian uint32
// (version=1, n, d), then n*d little-endian float32, row-major.
PointCloud read_emb(const std::string& path);
void write_emb(const std::string& path, const PointCloud& cloud);

// Headerless CSV, one point per row, comma-separated decimal floats.
PointCloud read_csv_cloud(const std::string& path);

// Dispatch on extension: .emb -> EMB1, anything else -> CSV.
PointCloud load_cloud(const std::string& path, bool l2_normalize = false);

// Header dim,birth,death,birth_i,birth_j,death_i,death_j; essential deaths
// are the literal `inf`, absent edges are -1.
void write_diagram_csv(const std::string& path, const PersistenceDiagram& diagram);

// Shortest round-trippable decimal representation ("%.17g").
std::string format_double(double v);

} // namespace topoadv
