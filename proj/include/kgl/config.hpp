#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kgl/geometry.hpp"

namespace kgl {

// Declarative geometry description, parsed from a key/value text file:
//
//   # comment
//   dim_m       = 2
//   metric.kind = radial            # radial | grid2d
//   metric.fm   = hyperbolic(1)     # euclidean | hyperbolic(k0) | table:path
//   rho         = exp_decay(1, log1p)  # constant(c) | exp_decay(c, psi) | table:path
//   k0          = 1                 # optional curvature floor override
//   grid.radius = 1                 # grid2d sampling window
//   grid.nr     = 256
//   grid.ntheta = 128
//
// Unknown or duplicate keys are ConfigError. Table paths are resolved against
// the directory of the config file.
struct GeometryConfig {
  int dim_m = 2;
  std::string kind = "radial";
  std::string fm = "euclidean";
  std::string rho = "constant(1)";
  std::optional<double> k0;
  double grid_radius = 1.0;
  int grid_nr = 256;
  int grid_ntheta = 128;
};

GeometryConfig parse_geometry_config(const std::string& text,
                                     const std::string& base_dir = "");
GeometryConfig load_geometry_config(const std::string& path);

// Builds the profiles and the warped product the config describes.
WarpedProduct make_geometry(const GeometryConfig& c);

// FNV-1a over the constructed geometry's canonical description; names the
// configuration in reports.
std::uint64_t geometry_hash(const GeometryConfig& c);
std::string hash_hex(std::uint64_t h);

}  // namespace kgl
