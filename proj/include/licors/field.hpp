// Dense real-valued lattice fields observed over space x time.
//
// Values are stored time-major: index = t * n_space + r, where r is the
// row-major linearization of the (possibly multi-dimensional) spatial index.
// All public time indices are 0-based.
//
// File format "STF1":
//   bytes 0..7   magic "STF1\0\0\0\0"
//   u32 LE       number of spatial dimensions
//   u32 LE each  spatial extent per dimension
//   u32 LE       T (time steps)
//   f64 LE       prod(extent) * T values, time-major (all of t=0, then t=1, ...)
#pragma once

#include <string>
#include <vector>

namespace licors {

enum class Boundary { Wrap, Truncate };

class Field {
 public:
  Field(std::vector<int> spatial_extent, int T, Boundary boundary,
        std::vector<double> values);

  static Field zeros(std::vector<int> spatial_extent, int T,
                     Boundary boundary = Boundary::Wrap);

  int n_space() const { return n_space_; }
  int T() const { return T_; }
  int ndims() const { return static_cast<int>(extent_.size()); }
  const std::vector<int>& spatial_extent() const { return extent_; }
  Boundary boundary() const { return boundary_; }
  void set_boundary(Boundary b) { boundary_ = b; }

  double at(int r, int t) const { return values_[idx(r, t)]; }
  double& at(int r, int t) { return values_[idx(r, t)]; }
  const std::vector<double>& values() const { return values_; }

  // Converts a linear spatial index to per-axis coordinates and back.
  std::vector<int> unravel(int r) const;
  int ravel(const std::vector<int>& coords) const;

  // Keeps time steps [t_begin, t_begin + count).
  Field time_slice(int t_begin, int count) const;

  void save_stf1(const std::string& path) const;
  static Field load_stf1(const std::string& path,
                         Boundary boundary = Boundary::Wrap);

  // 1D fields as CSV with rows = space, columns = time.
  static Field load_csv_1d(const std::string& path,
                           Boundary boundary = Boundary::Wrap);
  void save_csv_1d(const std::string& path) const;

 private:
  int idx(int r, int t) const { return t * n_space_ + r; }

  std::vector<int> extent_;
  int n_space_;
  int T_;
  Boundary boundary_;
  std::vector<double> values_;
};

}  // namespace licors
