// Cone geometry and extraction of past/future cone configurations.
//
// A point (r, t) influences, and is influenced by, lattice cells no further
// than c cells per time step. The past cone collects cells at t-1..t-h_p
// within per-axis (max-norm) radius c*|dt|; the future cone mirrors this
// forward up to h_f. Which side owns the present cell (dt = 0) is a
// convention carried by the geometry.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "licors/field.hpp"

namespace licors {

enum class PresentIn { Past, Future };

struct ConeGeometry {
  int c = 1;      // propagation speed, cells per step
  int h_p = 1;    // past horizon
  int h_f = 0;    // future horizon
  PresentIn present_in = PresentIn::Future;
};

struct Offset {
  std::vector<int> dr;  // per spatial axis
  int dt = 0;
};

struct ConeStencil {
  std::vector<Offset> plc;
  std::vector<Offset> flc;
};

// Offsets sorted lexicographically by (dt, dr). Past offsets have dt in
// {-h_p..-1} (plus 0 when the present sits in the past cone); future offsets
// have dt in {0..h_f} or {1..h_f} accordingly. Throws if either side of the
// stencil would be empty.
ConeStencil cone_offsets(const ConeGeometry& geometry, int spatial_dims);

struct Coord {
  int r = 0;  // linear spatial index
  int t = 0;  // 0-based time index
};

struct ConeSet {
  Eigen::MatrixXd plc;         // N x n_p, rows in stencil offset order
  Eigen::MatrixXd flc;         // N x n_f
  std::vector<Coord> coords;   // per row
  ConeGeometry geometry;
  int spatial_dims = 1;
  std::vector<int> field_extent;  // lattice the coords refer to
  Boundary field_boundary = Boundary::Wrap;
};

// Gathers the cone configuration of every point whose stencil fits inside
// the field. Temporal margins are always dropped; with Boundary::Truncate,
// points whose spatial stencil exits the lattice are dropped as well. Rows
// are ordered (t ascending, r ascending).
ConeSet extract_cones(const Field& field, const ConeGeometry& geometry);

}  // namespace licors
