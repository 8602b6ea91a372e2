/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#ifndef CIA_OPTIMIZERS_HPP
#define CIA_OPTIMIZERS_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cia/core_model.hpp"
#include "cia/inference.hpp"
#include "cia/replay.hpp"

namespace cia {

enum class Demand { kGmv, kStyle };

struct CampaignProblem {
  Campaign campaign;
  std::vector<AdProfile> profiles;  // aligned with campaign.ad_ids
  double beta = 1.0;                // in (0,1]
  double epsilon = 0.2;             // in [0, beta)
  int grid_size = 8;                // k, alpha points per AD
  Demand demand = Demand::kGmv;
  DayFilter days = DayFilter::all();

  void validate() const;  // throws InvalidConfig / InvalidRecord
};

struct GridOption {
  double alpha = 0.0;
  ReplaySummary summary;  // y = summary.gmv, z = summary.cost, s = impressions
};

struct AdGrid {
  std::string ad_id;
  double take_rate = 0.0;
  AlphaInterval alpha_range;
  std::vector<GridOption> options;  // alpha ascending, deduplicated
  double baseline_cost = 0.0;       // z~ from keyword-bid replay
};

struct ValuationGrid {
  std::vector<AdGrid> ads;
  double baseline_total = 0.0;  // Z~ = sum of baseline costs

  double window_lower(double beta, double epsilon) const {
    return (beta - epsilon) * baseline_total;
  }
  double window_upper(double beta, double epsilon) const {
    return (beta + epsilon) * baseline_total;
  }
};

/// Replays a geometric alpha grid over each AD's feasible range plus the
/// keyword-bid baseline. Degenerate ADs propagate DegenerateAd. Evaluation
/// of distinct ADs is independent; `threads` > 1 distributes them.
ValuationGrid build_grid(const AuctionLog& log, const CampaignProblem& problem,
                         int threads = 1);

struct AllocationResult {
  std::vector<double> alphas;       // chosen alpha per AD
  std::vector<int> selection;       // chosen option index per AD
  double total_cost = 0.0;
  double total_gmv = 0.0;
  double total_impressions = 0.0;
  bool feasible = false;            // landed inside the cost window
  double objective_value = 0.0;     // GMV total, or std(s)/mean(s) for style
  double deviation_sq = 0.0;        // style: sum (s_i - mean)^2
  std::vector<double> per_ad_impressions;
  std::vector<double> per_ad_cost;
};

/// The knapsack cost lattice: 1/1000 of the window's upper edge.
inline constexpr int kCostLatticeCells = 1000;

/// Group knapsack over the discretized cost lattice: picks exactly one alpha
/// option per AD maximizing total GMV subject to the two-sided cost window.
/// Costs are rounded to the nearest lattice point; the DP is exact on the
/// lattice. When no selection lands in the window the result carries
/// feasible = false and the selection minimizing the lattice violation.
AllocationResult optimize_gmv(const ValuationGrid& grid, double beta,
                              double epsilon);

/// Monotone non-decreasing piecewise-linear map with clamped extrapolation.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  /// Points must be sorted by x; duplicate x keeps the first y.
  static PiecewiseLinear from_points(std::vector<double> xs,
                                     std::vector<double> ys);

  double operator()(double x) const;
  /// Right derivative at x (0 beyond the last point).
  double slope_right(double x) const;
  /// Left derivative at x (0 before the first point).
  double slope_left(double x) const;

  double min_x() const { return xs_.front(); }
  double max_x() const { return xs_.back(); }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct LevelProjection {
  std::vector<double> s;
  double deviation_sq = 0.0;
  double total_cost = 0.0;
  bool feasible = false;  // cost window reached
};

/// Minimizes sum (s_i - mean(s))^2 over per-coordinate boxes and a total-cost
/// window, with cost_maps[i] mapping s_i to money. Searches the clipped
/// common-level family s_i(t) = clip(t, box_i) by bisection on the monotone
/// total cost, minimizes the piecewise-quadratic deviation exactly on each
/// level segment, then refines with projected gradient (step halving, 10k
/// iteration cap, stop below 1e-9) so heterogeneous cost slopes reach their
/// KKT split. Infeasible windows return the nearest-cost point flagged.
LevelProjection solve_level_projection(std::span<const Interval> boxes,
                                       std::span<const PiecewiseLinear> cost_maps,
                                       Interval window);

/// Inverts a target cost back to alpha for one AD (replay binary search).
using CostInverter = std::function<Inversion(
    const std::string& ad_id, double take_rate, double target_cost,
    const AlphaInterval& range)>;

CostInverter make_replay_inverter(const AuctionLog& log,
                                  const DayFilter& days = DayFilter::all());

/// Style comparison: target near-uniform impressions across the campaign's
/// ADs inside the cost window. Impression bounds come from each AD's extreme
/// alpha samples; cost is coupled to impressions through the grid's monotone
/// piecewise-linear interpolation; the final alpha comes from interpolation,
/// refined through `inverter` when provided.
AllocationResult optimize_style(const ValuationGrid& grid, double beta,
                                double epsilon,
                                const CostInverter& inverter = nullptr);

}  // namespace cia

#endif  // CIA_OPTIMIZERS_HPP
