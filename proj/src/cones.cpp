#include "licors/cones.hpp"

#include <algorithm>
#include <stdexcept>

namespace licors {

namespace {

// All per-axis offsets with |dr_axis| <= radius, in lexicographic order.
void append_spatial_box(int radius, int spatial_dims, int dt,
                        std::vector<Offset>& out) {
  std::vector<int> dr(spatial_dims, -radius);
  while (true) {
    out.push_back(Offset{dr, dt});
    int axis = spatial_dims - 1;
    while (axis >= 0) {
      if (++dr[axis] <= radius) break;
      dr[axis] = -radius;
      --axis;
    }
    if (axis < 0) break;
  }
}

}  // namespace

ConeStencil cone_offsets(const ConeGeometry& g, int spatial_dims) {
  if (spatial_dims < 1) throw std::invalid_argument("cone_offsets: spatial_dims must be >= 1");
  if (g.c < 1) throw std::invalid_argument("cone_offsets: c must be >= 1");
  if (g.h_p < 0 || g.h_f < 0) throw std::invalid_argument("cone_offsets: negative horizon");
  if (g.present_in == PresentIn::Future && g.h_p == 0)
    throw std::invalid_argument("cone_offsets: h_p=0 with the present in the future cone leaves the past cone empty");
  if (g.present_in == PresentIn::Past && g.h_f == 0)
    throw std::invalid_argument("cone_offsets: h_f=0 with the present in the past cone leaves the future cone empty");

  ConeStencil s;
  for (int dt = -g.h_p; dt <= 0; ++dt) {
    if (dt == 0 && g.present_in != PresentIn::Past) continue;
    append_spatial_box(g.c * (-dt), spatial_dims, dt, s.plc);
  }
  for (int dt = 0; dt <= g.h_f; ++dt) {
    if (dt == 0 && g.present_in != PresentIn::Future) continue;
    append_spatial_box(g.c * dt, spatial_dims, dt, s.flc);
  }
  return s;
}

ConeSet extract_cones(const Field& field, const ConeGeometry& g) {
  const int dims = field.ndims();
  ConeStencil stencil = cone_offsets(g, dims);
  const int n_p = static_cast<int>(stencil.plc.size());
  const int n_f = static_cast<int>(stencil.flc.size());
  const int T = field.T();
  if (T <= g.h_p + g.h_f)
    throw std::invalid_argument("extract_cones: insufficient time steps for the horizons");

  const auto& extent = field.spatial_extent();
  const bool wrap = field.boundary() == Boundary::Wrap;

  // Resolve a stencil offset against a base spatial coordinate. Returns the
  // linear index, or -1 when truncation drops the cell.
  std::vector<int> scratch(dims);
  auto resolve = [&](const std::vector<int>& base, const Offset& o) -> int {
    for (int d = 0; d < dims; ++d) {
      int v = base[d] + o.dr[d];
      if (wrap) {
        v %= extent[d];
        if (v < 0) v += extent[d];
      } else if (v < 0 || v >= extent[d]) {
        return -1;
      }
      scratch[d] = v;
    }
    return field.ravel(scratch);
  };

  const int t_lo = g.h_p;
  const int t_hi = T - g.h_f;  // exclusive
  std::vector<double> plc_rows, flc_rows;
  std::vector<Coord> coords;
  std::vector<double> prow(n_p), frow(n_f);

  for (int t = t_lo; t < t_hi; ++t) {
    for (int r = 0; r < field.n_space(); ++r) {
      std::vector<int> base = field.unravel(r);
      bool ok = true;
      for (int i = 0; i < n_p && ok; ++i) {
        int u = resolve(base, stencil.plc[i]);
        if (u < 0) { ok = false; break; }
        prow[i] = field.at(u, t + stencil.plc[i].dt);
      }
      for (int i = 0; i < n_f && ok; ++i) {
        int u = resolve(base, stencil.flc[i]);
        if (u < 0) { ok = false; break; }
        frow[i] = field.at(u, t + stencil.flc[i].dt);
      }
      if (!ok) continue;
      plc_rows.insert(plc_rows.end(), prow.begin(), prow.end());
      flc_rows.insert(flc_rows.end(), frow.begin(), frow.end());
      coords.push_back(Coord{r, t});
    }
  }

  const int64_t N = static_cast<int64_t>(coords.size());
  ConeSet cs;
  cs.geometry = g;
  cs.spatial_dims = dims;
  cs.field_extent = extent;
  cs.field_boundary = field.boundary();
  cs.coords = std::move(coords);
  cs.plc = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(plc_rows.data(), N, n_p);
  cs.flc = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                          Eigen::RowMajor>>(flc_rows.data(), N, n_f);
  return cs;
}

}  // namespace licors
