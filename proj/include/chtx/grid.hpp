#pragma once

// Node-centered tensor-product grids on boxes [0,L_0] x ... x [0,L_{d-1}].
//
// Nodes sit at x_k = i h_k, i = 0..cells_k. Storage is lexicographic with the
// last axis fastest. Each node owns the dual cell around it; boundary nodes own
// half a cell along each boundary axis, which is what makes the mirror-ghost
// Neumann stencils exactly conservative.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chtx/error.hpp"

namespace chtx {

inline constexpr int kMaxDim = 3;

class Grid {
 public:
  Grid(std::span<const int> cells, std::span<const double> extents) {
    require(!cells.empty() && cells.size() <= kMaxDim, ErrorCode::InvalidArgument,
            "grid dimension must be 1, 2 or 3");
    require(cells.size() == extents.size(), ErrorCode::InvalidArgument,
            "grid cells and extents must have the same length");
    dim_ = static_cast<int>(cells.size());
    for (int k = 0; k < dim_; ++k) {
      require(cells[k] >= 2, ErrorCode::InvalidArgument, "grid needs at least 2 cells per axis");
      require(std::isfinite(extents[k]) && extents[k] > 0.0, ErrorCode::InvalidArgument,
              "grid extents must be positive");
      cells_[k] = cells[k];
      spacing_[k] = extents[k] / cells[k];
      extent_[k] = spacing_[k] * cells[k];
    }
    size_ = 1;
    for (int k = dim_ - 1; k >= 0; --k) {
      stride_[k] = size_;
      size_ *= static_cast<std::size_t>(cells_[k] + 1);
    }
    compute_volumes();
  }

  static std::shared_ptr<const Grid> make(std::vector<int> cells, std::vector<double> extents) {
    return std::make_shared<const Grid>(cells, extents);
  }

  /// Rebuilds a grid from stored spacings; extent = spacing * cells.
  static std::shared_ptr<const Grid> from_spacing(std::vector<int> cells, std::vector<double> spacing) {
    std::vector<double> extents(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) extents[k] = spacing[k] * cells[k];
    auto grid = std::make_shared<Grid>(cells, extents);
    for (std::size_t k = 0; k < cells.size(); ++k) {
      grid->spacing_[k] = spacing[k];
      grid->extent_[k] = extents[k];
    }
    grid->compute_volumes();
    return grid;
  }

  int dim() const noexcept { return dim_; }
  int cells(int axis) const { return cells_.at(axis); }
  int nodes(int axis) const { return cells_.at(axis) + 1; }
  double extent(int axis) const { return extent_.at(axis); }
  double spacing(int axis) const { return spacing_.at(axis); }
  std::size_t stride(int axis) const { return stride_.at(axis); }
  std::size_t size() const noexcept { return size_; }

  std::vector<int> cells_vector() const { return {cells_.begin(), cells_.begin() + dim_}; }
  std::vector<double> extents_vector() const { return {extent_.begin(), extent_.begin() + dim_}; }

  int index_along(std::size_t idx, int axis) const {
    return static_cast<int>((idx / stride_[axis]) % static_cast<std::size_t>(cells_[axis] + 1));
  }

  double coordinate(std::size_t idx, int axis) const { return index_along(idx, axis) * spacing_[axis]; }

  std::array<double, kMaxDim> position(std::size_t idx) const {
    std::array<double, kMaxDim> x{0.0, 0.0, 0.0};
    for (int k = 0; k < dim_; ++k) x[k] = coordinate(idx, k);
    return x;
  }

  bool on_boundary(std::size_t idx, int axis) const {
    const int i = index_along(idx, axis);
    return i == 0 || i == cells_[axis];
  }

  /// Dual-cell volume owned by node idx.
  double node_volume(std::size_t idx) const { return volumes_[idx]; }
  std::span<const double> node_volumes() const { return volumes_; }

  /// |Omega|.
  double measure() const {
    double m = 1.0;
    for (int k = 0; k < dim_; ++k) m *= extent_[k];
    return m;
  }

  /// Width of the dual cell of node position i along an axis.
  double dual_width(int axis, int i) const {
    return (i == 0 || i == cells_[axis]) ? 0.5 * spacing_[axis] : spacing_[axis];
  }

  bool operator==(const Grid& other) const {
    if (dim_ != other.dim_) return false;
    for (int k = 0; k < dim_; ++k) {
      if (cells_[k] != other.cells_[k] || extent_[k] != other.extent_[k] || spacing_[k] != other.spacing_[k]) {
        return false;
      }
    }
    return true;
  }

  std::string describe() const {
    std::string s;
    for (int k = 0; k < dim_; ++k) {
      if (k) s += "x";
      s += std::to_string(cells_[k]);
    }
    return s;
  }

 private:
  void compute_volumes() {
    volumes_.assign(size_, 1.0);
    for (std::size_t idx = 0; idx < size_; ++idx) {
      double vol = 1.0;
      for (int k = 0; k < dim_; ++k) vol *= dual_width(k, index_along(idx, k));
      volumes_[idx] = vol;
    }
  }

  int dim_ = 0;
  std::array<int, kMaxDim> cells_{1, 1, 1};
  std::array<double, kMaxDim> extent_{1.0, 1.0, 1.0};
  std::array<double, kMaxDim> spacing_{1.0, 1.0, 1.0};
  std::array<std::size_t, kMaxDim> stride_{1, 1, 1};
  std::size_t size_ = 0;
  std::vector<double> volumes_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Calls fn(start, stride, n) once for every grid line parallel to `axis`;
/// the line's nodes are start + i * stride for i in [0, n).
template <class Fn>
void for_each_line(const Grid& grid, int axis, Fn&& fn) {
  const std::size_t stride = grid.stride(axis);
  const int n = grid.nodes(axis);
  const std::size_t block = stride * static_cast<std::size_t>(n);
  const std::size_t outer = grid.size() / block;
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) fn(o * block + s, stride, n);
  }
}

/// Calls fn(lo, hi, i) for every face between node positions i and i+1 along `axis`.
template <class Fn>
void for_each_face(const Grid& grid, int axis, Fn&& fn) {
  for_each_line(grid, axis, [&](std::size_t start, std::size_t stride, int n) {
    for (int i = 0; i + 1 < n; ++i) {
      const std::size_t lo = start + static_cast<std::size_t>(i) * stride;
      fn(lo, lo + stride, i);
    }
  });
}

}  // namespace chtx
