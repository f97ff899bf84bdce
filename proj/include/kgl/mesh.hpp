#pragma once

#include <cmath>

#include "kgl/errors.hpp"

namespace kgl {

// Tensor polar mesh on the closed ball of the given radius. Node 0 is the
// pole; ring i in [1, nr] carries ntheta nodes at r = i*dr. Ring nr is the
// Dirichlet boundary. Spoke indices wrap modulo ntheta.
struct PolarMesh {
  double radius = 1.0;
  int nr = 256;
  int ntheta = 128;

  static PolarMesh make(double radius, int nr, int ntheta) {
    if (!(radius > 0.0)) throw DiscretizationError("mesh radius must be positive");
    if (nr < 4) throw DiscretizationError("mesh needs nr >= 4");
    if (ntheta < 8 || ntheta % 2 != 0)
      throw DiscretizationError("mesh needs even ntheta >= 8");
    return PolarMesh{radius, nr, ntheta};
  }

  double dr() const { return radius / nr; }
  double dtheta() const { return 2.0 * M_PI / ntheta; }

  int num_nodes() const { return 1 + nr * ntheta; }
  int num_interior() const { return 1 + (nr - 1) * ntheta; }

  int wrap(int j) const {
    j %= ntheta;
    return j < 0 ? j + ntheta : j;
  }

  // i = 0 collapses to the pole regardless of j.
  int node(int i, int j) const { return i == 0 ? 0 : 1 + (i - 1) * ntheta + wrap(j); }

  int ring(int k) const { return k == 0 ? 0 : 1 + (k - 1) / ntheta; }
  int spoke(int k) const { return k == 0 ? 0 : (k - 1) % ntheta; }

  double r(int k) const { return ring(k) * dr(); }
  double theta(int k) const { return spoke(k) * dtheta(); }

  bool boundary(int k) const { return ring(k) == nr; }
};

}  // namespace kgl
