#pragma once

#include "simsig/estimator.hpp"
#include "simsig/multiseq.hpp"
#include "simsig/search.hpp"
#include "simsig/simulation.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace simsig {

/// Ingestion behavior for delimited summary-statistics files.
struct IngestOptions {
    char delimiter = '\0';     ///< 0 = auto-detect tab vs comma from the header
    bool strict = true;        ///< error on bad rows instead of dropping them
    Direction direction = Direction::SmallIsSignificant;
    std::string p_column_b;    ///< column name/index for file_b, when different
};

struct IngestSummary {
    std::size_t rows_a = 0;
    std::size_t rows_b = 0;
    std::size_t dropped_a = 0;
    std::size_t dropped_b = 0;
    std::size_t joined = 0;
};

/// Reads two delimited files with headers, inner-joins them on the id column
/// and returns the pairs sorted by feature id. Columns resolve by name first,
/// then as a 0-based index. Errors on a missing column, duplicate ids within
/// a file, or zero overlapping ids.
PairedStatistics ingest(const std::filesystem::path& file_a, const std::filesystem::path& file_b,
                        const std::string& id_column, const std::string& p_column,
                        const IngestOptions& options = {}, IngestSummary* summary = nullptr);

/// Odds ratio of the 2x2 table of I(P1 <= cutoff) vs I(P2 <= cutoff), with
/// the Haldane +0.5 correction when any cell is empty. A value near 1 warns
/// that the two studies look unrelated.
double odds_ratio_diagnostic(const PairedStatistics& data, double cutoff = 0.05);

/// Machine-readable record of one discovery run.
struct DiscoveryReport {
    int schema_version = 1;
    std::string file_a;
    std::string file_b;
    std::string id_column;
    std::string p_column;
    std::string p_column_b;
    Direction direction = Direction::SmallIsSignificant;
    double alpha = 0.05;
    TieRule tie_rule = TieRule::LargestArea;
    EstimatorVariant estimator = EstimatorVariant::Standard;
    std::size_t m1 = 0;
    std::size_t m2 = 0;
    std::size_t n_features = 0;
    RejectionThresholds region;
    std::vector<std::string> discovered_ids;
    std::optional<double> sigma12;      ///< p-value mode only
    std::optional<double> odds_ratio;   ///< p-value mode only
    std::size_t tie_set_size = 1;
    double elapsed_seconds = 0.0;
};

std::string report_to_json(const DiscoveryReport& report);
DiscoveryReport report_from_json(const std::string& text);

void write_discoveries_tsv(std::ostream& out, const PairedStatistics& data,
                           const RejectionThresholds& region);

/// Plot data as (-log10 P1, -log10 P2, discovered); p-value mode only.
void write_plot_tsv(std::ostream& out, const PairedStatistics& data,
                    const RejectionThresholds& region);

/// Reads one study column for the K-study workflow (same parsing rules as
/// ingest, but no join).
StudySeries read_study_series(const std::filesystem::path& file, const std::string& id_column,
                              const std::string& p_column, const IngestOptions& options = {});

/// Intersects the studies on shared feature ids, sorted by id. Reports per
/// study how many of its features were dropped. Errors when nothing overlaps.
std::vector<StudySeries> align_study_series(const std::vector<StudySeries>& studies,
                                            std::vector<std::size_t>* dropped_per_study = nullptr);

/// Key = value scenario description, '#' comments. Either p10/p01/p11 or
/// signals1/signals2/simultaneous describe the feature classes.
ScenarioConfig read_scenario_file(const std::filesystem::path& file);
ScenarioConfig parse_scenario_text(const std::string& text);

/// One row per method: scenario, method, empirical FDR, mean discoveries.
void write_scenario_tsv(std::ostream& out, const ScenarioResult& result, bool header = true);

}  // namespace simsig
