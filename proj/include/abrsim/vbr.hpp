#pragma once

#include "abrsim/config.hpp"
#include "abrsim/event_queue.hpp"

namespace abrsim {

/// True while the ON-OFF source is in an ON window. Windows start at
/// start_time and repeat every period; each ON window lasts d * p.
bool vbr_active(SimTime t, const VbrParams& params);

/// Gap between VBR cells while ON (one cell at the source amplitude).
SimTime vbr_cell_gap(const VbrParams& params);

/// Earliest VBR cell emission instant at or after t. Inside an ON window the
/// cells sit on a grid anchored at the window start; in an OFF window (or
/// before start_time) the answer is the next window start.
SimTime next_vbr_cell_time(SimTime t, const VbrParams& params);

}  // namespace abrsim
