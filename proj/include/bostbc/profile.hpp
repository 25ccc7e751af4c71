#pragma once

#include <cstddef>
#include <ostream>
#include <string>

#include "bostbc/error.hpp"

namespace bostbc {

/// Block-orthogonality parameters (Gamma, k, gamma): Gamma diagonal blocks
/// R_i, each block diagonal with k upper-triangular sub-blocks of size
/// gamma x gamma.
struct BlockOrthogonalProfile {
  std::size_t gamma_blocks = 1;
  std::size_t k = 1;
  std::size_t gamma = 1;

  std::size_t symbols() const noexcept { return gamma_blocks * k * gamma; }
  std::size_t block_size() const noexcept { return k * gamma; }

  void validate() const {
    if (gamma_blocks == 0 || k == 0 || gamma == 0)
      throw Error(Errc::InvalidProfile, "profile parameters must be >= 1");
  }

  std::string to_string() const {
    return "(" + std::to_string(gamma_blocks) + "," + std::to_string(k) + "," +
           std::to_string(gamma) + ")";
  }

  friend bool operator==(const BlockOrthogonalProfile&, const BlockOrthogonalProfile&) = default;
  friend std::ostream& operator<<(std::ostream& os, const BlockOrthogonalProfile& p) {
    return os << p.to_string();
  }
};

}  // namespace bostbc
