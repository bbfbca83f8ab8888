#pragma once

#include <cstddef>
#include <vector>

namespace diffatd {

/// Maps query locations to grid cells. With block size b every location is a
/// b x b tile of cells; locations are numbered row-major over the tile grid.
class LocationGrid {
 public:
  LocationGrid() = default;
  /// Throws InvalidArgument unless block >= 1 evenly divides rows and cols.
  LocationGrid(std::size_t rows, std::size_t cols, std::size_t block = 1);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t block() const noexcept { return block_; }
  std::size_t cell_count() const noexcept { return rows_ * cols_; }
  std::size_t location_rows() const noexcept { return rows_ / block_; }
  std::size_t location_cols() const noexcept { return cols_ / block_; }
  std::size_t location_count() const noexcept { return location_rows() * location_cols(); }
  std::size_t patch_area() const noexcept { return block_ * block_; }

  /// Row-major cell indices of a location's tile. Throws UnknownLocation.
  const std::vector<std::size_t>& cells(std::size_t location) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t block_ = 1;
  std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace diffatd
