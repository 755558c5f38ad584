#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "chtx/error.hpp"
#include "chtx/grid.hpp"

namespace chtx {

/// One scalar unknown sampled on the nodes of a shared grid.
class ScalarField {
 public:
  ScalarField() = default;

  explicit ScalarField(GridPtr grid, double value = 0.0) : grid_(std::move(grid)) {
    require(grid_ != nullptr, ErrorCode::InvalidArgument, "field needs a grid");
    require(std::isfinite(value), ErrorCode::NonFinite, "field fill value must be finite");
    values_.assign(grid_->size(), value);
  }

  ScalarField(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, ErrorCode::InvalidArgument, "field needs a grid");
    require(values_.size() == grid_->size(), ErrorCode::InvalidArgument,
            "field length " + std::to_string(values_.size()) + " does not match grid node count " +
                std::to_string(grid_->size()));
    check_finite("construction");
  }

  /// Samples fn(position) at every node.
  template <class Fn>
  static ScalarField from_function(GridPtr grid, Fn&& fn) {
    std::vector<double> values(grid->size());
    for (std::size_t idx = 0; idx < values.size(); ++idx) values[idx] = fn(grid->position(idx));
    return ScalarField(std::move(grid), std::move(values));
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  bool same_grid(const ScalarField& other) const {
    return grid_ == other.grid_ || (grid_ && other.grid_ && *grid_ == *other.grid_);
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double min() const { return *std::min_element(values_.begin(), values_.end()); }
  double max() const { return *std::max_element(values_.begin(), values_.end()); }
  double sup_norm() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
  }

  void check_finite(const char* context) const {
    for (double x : values_) {
      if (!std::isfinite(x)) fail(ErrorCode::NonFinite, std::string("non-finite value at ") + context);
    }
  }

  /// Finite check that only runs in debug builds; used after operator application.
  void debug_check_finite([[maybe_unused]] const char* context) const {
#ifndef NDEBUG
    check_finite(context);
#endif
  }

  bool operator==(const ScalarField& other) const {
    return same_grid(other) && values_ == other.values_;
  }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

}  // namespace chtx
