#pragma once

// CSV and JSON artefacts. Numbers use the shortest text that reads back to
// the same double, so identical runs give identical bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "mes/harness.hpp"

namespace mes {

std::string format_number(double value);

// RFC 4180 field quoting (only when needed).
std::string csv_field(const std::string& text);

// Every `stride`-th row, first row included.
std::string episode_csv(const Telemetry& telemetry, int stride);

std::string campaign_csv(const std::vector<IterationRecord>& records);

std::string simulate_summary_json(const IterationRecord* record, const GainSet& gains,
                                  const std::optional<CampaignFailure>& failure);

std::string learn_summary_json(const CampaignResult& result, int iterations_requested);

// Writes to a sibling temporary and renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace mes
