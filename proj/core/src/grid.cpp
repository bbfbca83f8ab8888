#include "diffatd/grid.hpp"

#include <string>

#include "diffatd/errors.hpp"

namespace diffatd {

LocationGrid::LocationGrid(std::size_t rows, std::size_t cols, std::size_t block)
    : rows_(rows), cols_(cols), block_(block) {
  if (rows == 0 || cols == 0) throw InvalidArgument("grid must have at least one cell");
  if (block == 0 || rows % block != 0 || cols % block != 0) {
    throw InvalidArgument("block size " + std::to_string(block) + " must divide grid " +
                          std::to_string(rows) + "x" + std::to_string(cols));
  }
  cells_.resize(location_count());
  for (std::size_t lr = 0; lr < location_rows(); ++lr) {
    for (std::size_t lc = 0; lc < location_cols(); ++lc) {
      auto& tile = cells_[lr * location_cols() + lc];
      tile.reserve(block * block);
      for (std::size_t r = 0; r < block; ++r) {
        for (std::size_t c = 0; c < block; ++c) {
          tile.push_back((lr * block + r) * cols + lc * block + c);
        }
      }
    }
  }
}

const std::vector<std::size_t>& LocationGrid::cells(std::size_t location) const {
  if (location >= cells_.size()) throw UnknownLocation(location, cells_.size());
  return cells_[location];
}

}  // namespace diffatd
