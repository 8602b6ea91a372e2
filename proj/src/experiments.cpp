/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cia/error.hpp"
#include "cia/inference.hpp"
#include "cia/rng.hpp"

namespace cia {

namespace {

std::optional<double> pct(double base, double test) {
  if (base <= 0.0) return std::nullopt;
  return 100.0 * (test - base) / base;
}

std::optional<double> ratio_pct(double base_num, double base_den,
                                double test_num, double test_den) {
  if (base_den <= 0.0 || test_den <= 0.0) return std::nullopt;
  const double base = base_num / base_den;
  const double test = test_num / test_den;
  if (base <= 0.0) return std::nullopt;
  return 100.0 * (test - base) / base;
}

}  // namespace

MetricShift relative_shift(const ReplaySummary& base,
                           const ReplaySummary& test) {
  MetricShift shift;
  shift.cost_pct = pct(base.cost, test.cost);
  shift.gmv_pct = pct(base.gmv, test.gmv);
  shift.roi_pct = ratio_pct(base.gmv, base.cost, test.gmv, test.cost);
  shift.cvr_pct =
      ratio_pct(base.conversions, base.clicks, test.conversions, test.clicks);
  shift.ppc_pct = ratio_pct(base.cost, base.clicks, test.cost, test.clicks);
  return shift;
}

double normalized_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (mean <= 0.0) return 0.0;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return std::sqrt(var) / mean;
}

AdLevelReport run_ad_level(const AuctionLog& log,
                           std::span<const std::string> ad_ids, double beta,
                           double epsilon, const DayFilter& days) {
  AdLevelReport report;
  for (const std::string& ad_id : ad_ids) {
    AdProfile profile;
    try {
      profile = compute_profile(log, ad_id, days);
    } catch (const DegenerateAd&) {
      report.skipped.push_back(ad_id);
      continue;
    }
    const ReplaySummary keyword =
        evaluate(log, ad_id, BidPolicy::keyword(), days);
    const double target = beta * keyword.cost;
    const Inversion inv =
        invert_cost(log, ad_id, profile.take_rate, target, kAlphaSearchLo,
                    kAlphaSearchHi, days);

    BidPolicy policy = BidPolicy::keyword();
    policy.set_override(ad_id, BidRule::cia(inv.alpha, profile.take_rate));
    const ReplaySummary cia = evaluate(log, ad_id, policy, days);

    AdLevelRow row;
    row.ad_id = ad_id;
    row.take_rate = profile.take_rate;
    row.alpha = inv.alpha;
    row.alpha_clamped = inv.clamped;
    row.within_cost_window =
        std::abs(cia.cost - target) <= epsilon * keyword.cost;
    row.keyword = keyword;
    row.cia = cia;
    row.shift = relative_shift(keyword, cia);
    report.keyword_total += keyword;
    report.cia_total += cia;
    report.rows.push_back(std::move(row));
  }
  report.overall = relative_shift(report.keyword_total, report.cia_total);
  return report;
}

namespace {

/// Replays only the auctions that involve at least one of `ads`, summing the
/// outcomes of exactly those ADs. Equivalent to evaluate_all restricted to
/// the subset, but proportional to the subset's auction volume.
std::vector<ReplaySummary> evaluate_subset(const AuctionLog& log,
                                           const BidPolicy& policy,
                                           std::span<const std::string> ads,
                                           const DayFilter& days) {
  std::unordered_map<std::string_view, std::size_t> slot_of;
  for (std::size_t i = 0; i < ads.size(); ++i) slot_of[ads[i]] = i;

  std::vector<std::uint32_t> positions;
  for (const std::string& ad : ads) {
    auto it = log.ad_index.find(ad);
    if (it == log.ad_index.end()) {
      throw UnknownAd("ad '" + ad + "' not present in log", "experiments");
    }
    positions.insert(positions.end(), it->second.begin(), it->second.end());
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()),
                  positions.end());

  std::vector<ReplaySummary> out(ads.size());
  const int day_count = days.count_in(log);
  if (day_count == 0) return out;
  for (std::uint32_t pos : positions) {
    const AuctionRecord& record = log.records[pos];
    if (!days.contains(record.day)) continue;
    for (const SlotAward& award : replay_auction(record, policy)) {
      const AuctionCandidate& c = record.candidates[award.candidate];
      auto it = slot_of.find(c.ad_id);
      if (it == slot_of.end()) continue;
      ReplaySummary& summary = out[it->second];
      summary.cost += c.ctr * award.click_price.to_double();
      summary.gmv += c.expected_gmv();
      summary.impressions += 1.0;
      summary.clicks += c.ctr;
      summary.conversions += c.ctr * c.cvr;
    }
  }
  const double inv = 1.0 / static_cast<double>(day_count);
  for (ReplaySummary& summary : out) summary = summary.scaled(inv);
  return out;
}

struct PreparedCampaign {
  Campaign campaign;                 // degenerate ADs removed
  std::vector<AdProfile> profiles;
  std::vector<std::string> skipped;
};

PreparedCampaign prepare_campaign(const AuctionLog& log,
                                  const Campaign& campaign,
                                  const DayFilter& days) {
  campaign.validate();
  PreparedCampaign prepared;
  prepared.campaign.campaign_id = campaign.campaign_id;
  for (std::size_t i = 0; i < campaign.ad_ids.size(); ++i) {
    try {
      AdProfile profile = compute_profile(log, campaign.ad_ids[i], days);
      prepared.campaign.ad_ids.push_back(campaign.ad_ids[i]);
      prepared.campaign.bid_lower.push_back(campaign.bid_lower[i]);
      prepared.campaign.bid_upper.push_back(campaign.bid_upper[i]);
      prepared.profiles.push_back(std::move(profile));
    } catch (const DegenerateAd&) {
      prepared.skipped.push_back(campaign.ad_ids[i]);
    }
  }
  return prepared;
}

ReplaySummary sum_of(std::span<const ReplaySummary> summaries) {
  ReplaySummary total;
  for (const ReplaySummary& s : summaries) total += s;
  return total;
}

}  // namespace

CampaignLevelReport run_campaign_level(const AuctionLog& log,
                                       std::span<const Campaign> campaigns,
                                       Demand demand,
                                       const CampaignLevelOptions& options) {
  CampaignLevelReport report;
  report.demand = demand;

  for (const Campaign& campaign : campaigns) {
    PreparedCampaign prepared = prepare_campaign(log, campaign, options.days);
    if (prepared.campaign.ad_ids.empty()) {
      report.skipped_campaigns.push_back(campaign.campaign_id);
      continue;
    }
    CampaignProblem problem;
    problem.campaign = prepared.campaign;
    problem.profiles = prepared.profiles;
    problem.beta = options.beta;
    problem.epsilon = options.epsilon;
    problem.grid_size = options.grid_size;
    problem.demand = demand;
    problem.days = options.days;

    const ValuationGrid grid = build_grid(log, problem, options.threads);
    const std::span<const std::string> ads = prepared.campaign.ad_ids;

    if (demand == Demand::kGmv) {
      CampaignGmvRow row;
      row.campaign_id = campaign.campaign_id;
      row.skipped_ads = prepared.skipped;
      row.allocation = optimize_gmv(grid, options.beta, options.epsilon);
      for (std::size_t i = 0; i < grid.ads.size(); ++i) {
        row.cia_total += grid.ads[i].options[row.allocation.selection[i]].summary;
      }

      // Budget-matched baseline: one uniform multiplier on the campaign's
      // keyword bids, bisected until its cost matches the CIA allocation's
      // spend (budget-fair comparison within the same window).
      const double target = std::clamp(
          row.allocation.total_cost,
          grid.window_lower(options.beta, options.epsilon),
          grid.window_upper(options.beta, options.epsilon));
      const double tol = cost_tolerance(target);
      auto baseline_at = [&](double scale) {
        BidPolicy policy = BidPolicy::keyword();
        for (const std::string& ad : ads) {
          policy.set_override(ad, BidRule::keyword(scale));
        }
        return evaluate_subset(log, policy, ads, options.days);
      };
      double scale = 1.0;
      std::vector<ReplaySummary> baseline = baseline_at(scale);
      if (std::abs(sum_of(baseline).cost - target) > tol) {
        double lo = 1e-3, hi = 1e3;
        for (int iter = 0; iter < kMaxBisectionIters; ++iter) {
          scale = 0.5 * (lo + hi);
          baseline = baseline_at(scale);
          const double cost = sum_of(baseline).cost;
          if (std::abs(cost - target) <= tol) break;
          if (cost < target) {
            lo = scale;
          } else {
            hi = scale;
          }
        }
      }
      row.baseline_scale = scale;
      row.baseline_total = sum_of(baseline);
      row.shift = relative_shift(row.baseline_total, row.cia_total);
      report.cia_total += row.cia_total;
      report.baseline_total += row.baseline_total;
      report.gmv_rows.push_back(std::move(row));
    } else {
      CampaignStyleRow row;
      row.campaign_id = campaign.campaign_id;
      row.skipped_ads = prepared.skipped;
      const AllocationResult allocation = optimize_style(
          grid, options.beta, options.epsilon,
          make_replay_inverter(log, options.days));
      row.window_feasible = allocation.feasible;

      BidPolicy cia_policy = BidPolicy::keyword();
      for (std::size_t i = 0; i < ads.size(); ++i) {
        cia_policy.set_override(
            ads[i], BidRule::cia(allocation.alphas[i], grid.ads[i].take_rate));
      }
      const std::vector<ReplaySummary> cia =
          evaluate_subset(log, cia_policy, ads, options.days);

      double level_units = 0.0;
      for (const std::string& ad : ads) {
        level_units +=
            static_cast<double>(mean_logged_bid(log, ad, options.days).units());
      }
      const Money equal_bid = Money::from_units(
          std::llround(level_units / static_cast<double>(ads.size())));
      BidPolicy kb_policy = BidPolicy::keyword();
      for (const std::string& ad : ads) {
        kb_policy.set_override(ad, BidRule::fixed(equal_bid));
      }
      const std::vector<ReplaySummary> kb =
          evaluate_subset(log, kb_policy, ads, options.days);

      auto collect = [](const std::vector<ReplaySummary>& summaries,
                        auto field) {
        std::vector<double> values;
        values.reserve(summaries.size());
        for (const ReplaySummary& s : summaries) values.push_back(field(s));
        return values;
      };
      auto impressions = [](const ReplaySummary& s) { return s.impressions; };
      auto cost_field = [](const ReplaySummary& s) { return s.cost; };
      row.cia_norm_std_impressions = normalized_std(collect(cia, impressions));
      row.kb_norm_std_impressions = normalized_std(collect(kb, impressions));
      row.cia_norm_std_cost = normalized_std(collect(cia, cost_field));
      row.kb_norm_std_cost = normalized_std(collect(kb, cost_field));
      report.style_rows.push_back(std::move(row));
    }
  }

  if (demand == Demand::kGmv) {
    report.overall = relative_shift(report.baseline_total, report.cia_total);
  } else if (!report.style_rows.empty()) {
    double cia_sum = 0.0, kb_sum = 0.0;
    for (const CampaignStyleRow& row : report.style_rows) {
      cia_sum += row.cia_norm_std_impressions;
      kb_sum += row.kb_norm_std_impressions;
    }
    report.overall_cia_norm_std =
        cia_sum / static_cast<double>(report.style_rows.size());
    report.overall_kb_norm_std =
        kb_sum / static_cast<double>(report.style_rows.size());
  }
  return report;
}

AdoptionSweep run_platform_sweep(const AuctionLog& log,
                                 std::span<const double> fractions,
                                 std::uint64_t seed, double beta,
                                 const DayFilter& days) {
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] < 0.0 || fractions[i] > 1.0 ||
        (i > 0 && fractions[i] < fractions[i - 1])) {
      throw InvalidConfig("fractions must be ascending within [0,1]",
                          "experiments");
    }
  }

  // Deterministic AD order regardless of hash-map layout.
  std::vector<std::string> all_ads;
  all_ads.reserve(log.ad_index.size());
  for (const auto& [ad_id, positions] : log.ad_index) all_ads.push_back(ad_id);
  std::sort(all_ads.begin(), all_ads.end());

  AdoptionSweep sweep;
  sweep.seed = seed;

  const auto baseline = evaluate_all(log, BidPolicy::keyword(), days);

  struct Adopter {
    std::string ad_id;
    double take_rate;
    double alpha;
  };
  std::vector<Adopter> candidates;
  for (const std::string& ad_id : all_ads) {
    try {
      const AdProfile profile = compute_profile(log, ad_id, days);
      const double target = beta * baseline.at(ad_id).cost;
      const Inversion inv =
          invert_cost(log, ad_id, profile.take_rate, target, kAlphaSearchLo,
                      kAlphaSearchHi, days);
      candidates.push_back({ad_id, profile.take_rate, inv.alpha});
    } catch (const DegenerateAd&) {
      sweep.skipped.push_back(ad_id);
    }
  }

  // One seeded permutation; prefixes give nested adopter sets.
  Rng rng(seed);
  for (std::size_t i = candidates.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(candidates[i - 1], candidates[j]);
  }

  for (double fraction : fractions) {
    const std::size_t count = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(candidates.size())));
    BidPolicy policy = BidPolicy::keyword();
    std::unordered_set<std::string_view> adopter_set;
    for (std::size_t i = 0; i < count; ++i) {
      policy.set_override(candidates[i].ad_id,
                          BidRule::cia(candidates[i].alpha,
                                       candidates[i].take_rate));
      adopter_set.insert(candidates[i].ad_id);
    }
    const auto world = evaluate_all(log, policy, days);

    SweepRow row;
    row.fraction = fraction;
    row.adopters = count;
    for (const std::string& ad_id : all_ads) {
      const ReplaySummary& base = baseline.at(ad_id);
      const ReplaySummary& test = world.at(ad_id);
      row.all_base += base;
      row.all_cia += test;
      if (adopter_set.count(ad_id) > 0) {
        row.subset_base += base;
        row.subset_cia += test;
      }
    }
    row.all_shift = relative_shift(row.all_base, row.all_cia);
    row.subset_shift = relative_shift(row.subset_base, row.subset_cia);
    sweep.rows.push_back(std::move(row));
  }
  return sweep;
}

}  // namespace cia
