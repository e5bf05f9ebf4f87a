#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "abrsim/config.hpp"
#include "abrsim/harness.hpp"

namespace abrsim {

// One receiver window (1024 kB) in cells.
constexpr std::uint64_t kWindowCells = 24576;
// The published RTT unit: 30 ms at 368 cells/ms.
constexpr double kReferenceRttCells = 11040.0;
constexpr double kPublishedMaxGoodputMbps = 110.9;

/// Table 1 setup: 15 sources, 1000 km links, no VBR, ERICA at 90% with a
/// (5 ms, 500 cell) interval and activity averaging, 20 s.
ScenarioConfig source_queue_scenario(std::optional<std::uint64_t> source_buffer_cells);

/// VBR setup shared by Tables 2-4: ERICA+ with (1 ms, 100 cells), no
/// variance-reduction features, 10 s.
ScenarioConfig vbr_scenario(double duty_cycle, double period_ms, double link_length_km = 1000.0);

struct TableRow {
  std::string label;
  std::string published;
  ScenarioConfig config;
};

/// Scenarios for table 1..4 in row order. Table 4 carries an extra baseline
/// row with both enhancements off.
std::vector<TableRow> table_rows(int table_id);

struct RowVerdict {
  std::string label;
  std::string published;
  std::string simulated;
  bool passed = false;
  std::string detail;
};

struct TableReport {
  int table_id = 0;
  std::vector<TableRow> rows;
  std::vector<RunMetrics> metrics;
  std::vector<RowVerdict> verdicts;

  bool passed() const;
};

/// Judges already-computed runs of table_rows(table_id).
std::vector<RowVerdict> judge_table(int table_id, const std::vector<RunMetrics>& metrics);

/// Runs every row (optionally on `jobs` threads; results keep row order) and
/// judges them.
TableReport reproduce_table(int table_id, unsigned jobs = 1,
                            std::vector<SimulationResult>* results = nullptr);

void write_table_report(std::ostream& out, const TableReport& report);

}  // namespace abrsim
