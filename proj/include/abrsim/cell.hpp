#pragma once

#include <cstdint>

namespace abrsim {

enum class CellKind : std::uint8_t { kData, kForwardRm, kBackwardRm, kVbr };

// Rates carried in RM cells, in cells per second.
struct RmFields {
  double er = 0.0;
  double ccr = 0.0;
};

struct Cell {
  CellKind kind = CellKind::kData;
  std::uint32_t vc = 0;
  // Data cells: AAL5 frame identity and position (index frame_cells - 1 is EOM).
  std::uint64_t segment_seq = 0;
  std::uint32_t segment_len = 0;
  std::uint16_t index = 0;
  std::uint16_t frame_cells = 0;
  RmFields rm;

  bool is_rm() const { return kind == CellKind::kForwardRm || kind == CellKind::kBackwardRm; }
  bool is_eom() const { return kind == CellKind::kData && index + 1 == frame_cells; }
};

}  // namespace abrsim
