/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_EXPERIMENTS_HPP
#define CIA_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cia/core_model.hpp"
#include "cia/optimizers.hpp"

namespace cia {

/// Relative shifts (percent) of a test replay against a baseline replay.
/// ROI = gmv/cost, CVR = conversions/clicks, PPC = cost/clicks. A shift is
/// absent (not zero) whenever a defining denominator is zero.
struct MetricShift {
  std::optional<double> cost_pct;
  std::optional<double> gmv_pct;
  std::optional<double> roi_pct;
  std::optional<double> cvr_pct;
  std::optional<double> ppc_pct;
};

MetricShift relative_shift(const ReplaySummary& base, const ReplaySummary& test);

/// Population std / mean; 0 for empty or all-zero data.
double normalized_std(std::span<const double> values);

// ---------------------------------------------------------------------------
// AD level: CIA bidding vs the AD's own keyword bids at matched cost.

struct AdLevelRow {
  std::string ad_id;
  double take_rate = 0.0;
  double alpha = 0.0;
  bool alpha_clamped = false;
  bool within_cost_window = false;  // |cost shift| <= epsilon
  ReplaySummary keyword;
  ReplaySummary cia;
  MetricShift shift;
};

struct AdLevelReport {
  std::vector<AdLevelRow> rows;
  ReplaySummary keyword_total;
  ReplaySummary cia_total;
  MetricShift overall;  // ratios of summed totals, not averaged percents
  std::vector<std::string> skipped;  // degenerate ADs
};

AdLevelReport run_ad_level(const AuctionLog& log,
                           std::span<const std::string> ad_ids,
                           double beta = 1.0, double epsilon = 0.1,
                           const DayFilter& days = DayFilter::all());

// ---------------------------------------------------------------------------
// Campaign level: GMV optimization vs a budget-matched scaled-keyword
// baseline, and style comparison vs equal keyword bids.

struct CampaignGmvRow {
  std::string campaign_id;
  AllocationResult allocation;
  ReplaySummary cia_total;
  ReplaySummary baseline_total;
  MetricShift shift;
  double baseline_scale = 1.0;  // uniform keyword multiplier of the baseline
  std::vector<std::string> skipped_ads;
};

struct CampaignStyleRow {
  std::string campaign_id;
  double cia_norm_std_impressions = 0.0;
  double kb_norm_std_impressions = 0.0;
  double cia_norm_std_cost = 0.0;
  double kb_norm_std_cost = 0.0;
  bool window_feasible = false;
  std::vector<std::string> skipped_ads;
};

struct CampaignLevelOptions {
  double beta = 1.0;
  double epsilon = 0.2;
  int grid_size = 8;
  int threads = 1;
  DayFilter days = DayFilter::all();
};

struct CampaignLevelReport {
  Demand demand = Demand::kGmv;
  std::vector<CampaignGmvRow> gmv_rows;
  std::vector<CampaignStyleRow> style_rows;
  // GMV demand aggregates (sums across campaigns, then ratios).
  ReplaySummary cia_total;
  ReplaySummary baseline_total;
  MetricShift overall;
  // Style demand aggregates (means across campaigns).
  double overall_cia_norm_std = 0.0;
  double overall_kb_norm_std = 0.0;
  std::vector<std::string> skipped_campaigns;
};

CampaignLevelReport run_campaign_level(const AuctionLog& log,
                                       std::span<const Campaign> campaigns,
                                       Demand demand,
                                       const CampaignLevelOptions& options = {});

// ---------------------------------------------------------------------------
// Platform level: adoption sweep with all adopters re-replayed at once.

struct SweepRow {
  double fraction = 0.0;
  std::size_t adopters = 0;
  ReplaySummary all_base, all_cia;
  ReplaySummary subset_base, subset_cia;
  MetricShift all_shift;
  MetricShift subset_shift;
};

struct AdoptionSweep {
  std::uint64_t seed = 0;
  std::vector<SweepRow> rows;
  std::vector<std::string> skipped;  // degenerate ADs, never adopt
};

/// Adopter sets are one seeded permutation taken by prefix, so sweeps over
/// increasing fractions are nested and comparable. Fraction 0 is the
/// bit-identity check against the keyword baseline.
AdoptionSweep run_platform_sweep(const AuctionLog& log,
                                 std::span<const double> fractions,
                                 std::uint64_t seed, double beta = 1.0,
                                 const DayFilter& days = DayFilter::all());

}  // namespace cia

#endif  // CIA_EXPERIMENTS_HPP
