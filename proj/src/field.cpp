#include "licors/field.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "licors/util.hpp"

namespace licors {

namespace {

int64_t checked_prod(const std::vector<int>& extent) {
  if (extent.empty()) throw std::invalid_argument("field: no spatial dimensions");
  int64_t p = 1;
  for (int e : extent) {
    if (e <= 0) throw std::invalid_argument("field: spatial extent must be positive");
    p *= e;
  }
  return p;
}

}  // namespace

Field::Field(std::vector<int> spatial_extent, int T, Boundary boundary,
             std::vector<double> values)
    : extent_(std::move(spatial_extent)),
      n_space_(static_cast<int>(checked_prod(extent_))),
      T_(T),
      boundary_(boundary),
      values_(std::move(values)) {
  if (T_ <= 0) throw std::invalid_argument("field: T must be positive");
  if (static_cast<int64_t>(values_.size()) !=
      static_cast<int64_t>(n_space_) * T_) {
    throw std::invalid_argument("field: value count does not match extent * T");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("field: non-finite value");
  }
}

Field Field::zeros(std::vector<int> spatial_extent, int T, Boundary boundary) {
  int64_t n = checked_prod(spatial_extent) * T;
  return Field(std::move(spatial_extent), T, boundary,
               std::vector<double>(static_cast<size_t>(n), 0.0));
}

std::vector<int> Field::unravel(int r) const {
  std::vector<int> coords(extent_.size());
  for (int d = static_cast<int>(extent_.size()) - 1; d >= 0; --d) {
    coords[d] = r % extent_[d];
    r /= extent_[d];
  }
  return coords;
}

int Field::ravel(const std::vector<int>& coords) const {
  int r = 0;
  for (size_t d = 0; d < extent_.size(); ++d) r = r * extent_[d] + coords[d];
  return r;
}

Field Field::time_slice(int t_begin, int count) const {
  if (t_begin < 0 || count <= 0 || t_begin + count > T_)
    throw std::invalid_argument("field: time slice out of range");
  std::vector<double> v(values_.begin() + static_cast<int64_t>(t_begin) * n_space_,
                        values_.begin() +
                            static_cast<int64_t>(t_begin + count) * n_space_);
  return Field(extent_, count, boundary_, std::move(v));
}

static const char kStf1Magic[8] = {'S', 'T', 'F', '1', 0, 0, 0, 0};

void Field::save_stf1(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write(kStf1Magic, 8);
  write_u32le(os, static_cast<uint32_t>(extent_.size()));
  for (int e : extent_) write_u32le(os, static_cast<uint32_t>(e));
  write_u32le(os, static_cast<uint32_t>(T_));
  for (double v : values_) write_f64le(os, v);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Field Field::load_stf1(const std::string& path, Boundary boundary) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kStf1Magic, 8) != 0)
    throw std::runtime_error("not an STF1 file: " + path);
  uint32_t ndims = read_u32le(is);
  if (ndims == 0 || ndims > 8) throw std::runtime_error("STF1: bad dimension count");
  std::vector<int> extent(ndims);
  int64_t prod = 1;
  for (uint32_t d = 0; d < ndims; ++d) {
    extent[d] = static_cast<int>(read_u32le(is));
    prod *= extent[d];
  }
  uint32_t T = read_u32le(is);
  if (!is) throw std::runtime_error("STF1: truncated header");
  std::vector<double> values(static_cast<size_t>(prod) * T);
  for (double& v : values) v = read_f64le(is);
  if (!is) throw std::runtime_error("STF1: truncated data");
  return Field(std::move(extent), static_cast<int>(T), boundary,
               std::move(values));
}

Field Field::load_csv_1d(const std::string& path, Boundary boundary) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("CSV: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("CSV: no data in " + path);
  int n_space = static_cast<int>(rows.size());
  int T = static_cast<int>(rows.front().size());
  std::vector<double> values(static_cast<size_t>(n_space) * T);
  for (int r = 0; r < n_space; ++r)
    for (int t = 0; t < T; ++t) values[static_cast<size_t>(t) * n_space + r] = rows[r][t];
  return Field({n_space}, T, boundary, std::move(values));
}

void Field::save_csv_1d(const std::string& path) const {
  if (ndims() != 1) throw std::invalid_argument("CSV export supports 1D fields only");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  char buf[64];
  for (int r = 0; r < n_space_; ++r) {
    for (int t = 0; t < T_; ++t) {
      std::snprintf(buf, sizeof buf, "%.12g", at(r, t));
      os << buf << (t + 1 == T_ ? "" : ",");
    }
    os << "\n";
  }
}

}  // namespace licors
