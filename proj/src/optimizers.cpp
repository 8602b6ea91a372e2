/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include "cia/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "cia/error.hpp"

namespace cia {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_window_params(double beta, double epsilon) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw InvalidConfig("beta must be in (0,1]", "optimizers");
  }
  if (!(epsilon >= 0.0 && epsilon < beta)) {
    throw InvalidConfig("epsilon must be in [0, beta)", "optimizers");
  }
}

/// ceil with a relative guard so values sitting on a lattice point stay put.
std::int64_t lattice_ceil(double x) {
  return static_cast<std::int64_t>(
      std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

double population_mean(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m += x;
  return v.empty() ? 0.0 : m / static_cast<double>(v.size());
}

double deviation_sq_of(std::span<const double> v) {
  const double m = population_mean(v);
  double dev = 0.0;
  for (double x : v) dev += (x - m) * (x - m);
  return dev;
}

}  // namespace

void CampaignProblem::validate() const {
  campaign.validate();
  check_window_params(beta, epsilon);
  if (grid_size < 1) {
    throw InvalidConfig("grid_size must be >= 1", "optimizers");
  }
  if (profiles.size() != campaign.ad_ids.size()) {
    throw InvalidRecord("profiles must align with campaign.ad_ids",
                        "optimizers");
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    if (profiles[i].ad_id != campaign.ad_ids[i]) {
      throw InvalidRecord("profile order does not match campaign.ad_ids",
                          "optimizers");
    }
  }
}

namespace {

std::vector<double> alpha_points(const AlphaInterval& range, int k) {
  if (range.hi <= range.lo) return {range.lo};
  if (k == 1) return {std::sqrt(range.lo * range.hi)};
  std::vector<double> raw;
  raw.reserve(k);
  const double ratio = range.hi / range.lo;
  for (int j = 0; j < k; ++j) {
    raw.push_back(range.lo *
                  std::pow(ratio, static_cast<double>(j) /
                                      static_cast<double>(k - 1)));
  }
  raw.front() = range.lo;
  raw.back() = range.hi;
  std::vector<double> alphas;
  for (double a : raw) {
    if (alphas.empty() || a > alphas.back()) alphas.push_back(a);
  }
  return alphas;
}

}  // namespace

ValuationGrid build_grid(const AuctionLog& log, const CampaignProblem& problem,
                         int threads) {
  problem.validate();
  const std::size_t n = problem.campaign.ad_ids.size();

  ValuationGrid grid;
  grid.ads.resize(n);

  auto build_one = [&](std::size_t i) {
    const std::string& ad_id = problem.campaign.ad_ids[i];
    const AdProfile& profile = problem.profiles[i];
    AdGrid entry;
    entry.ad_id = ad_id;
    entry.take_rate = profile.take_rate;
    entry.alpha_range =
        profile.alpha_range
            ? *profile.alpha_range
            : feasible_alpha_range(log, ad_id, profile,
                                   problem.campaign.bid_lower[i],
                                   problem.campaign.bid_upper[i], problem.days);
    const std::vector<double> alphas =
        alpha_points(entry.alpha_range, problem.grid_size);
    AlphaCurve curve =
        alpha_curve(log, ad_id, profile.take_rate, alphas, problem.days);
    entry.options.reserve(curve.samples.size());
    for (AlphaSample& sample : curve.samples) {
      entry.options.push_back({sample.alpha, sample.summary});
    }
    entry.baseline_cost =
        evaluate(log, ad_id, BidPolicy::keyword(), problem.days).cost;
    grid.ads[i] = std::move(entry);
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) build_one(i);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (std::size_t i = static_cast<std::size_t>(w); i < n;
             i += static_cast<std::size_t>(workers)) {
          try {
            build_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  for (const AdGrid& entry : grid.ads) grid.baseline_total += entry.baseline_cost;
  return grid;
}

AllocationResult optimize_gmv(const ValuationGrid& grid, double beta,
                              double epsilon) {
  check_window_params(beta, epsilon);
  if (grid.ads.empty()) throw EmptyGrid("gmv optimizer needs a non-empty grid");
  for (const AdGrid& ad : grid.ads) {
    if (ad.options.empty()) {
      throw EmptyGrid("ad '" + ad.ad_id + "' has no alpha options");
    }
  }

  const double lower = grid.window_lower(beta, epsilon);
  const double upper = grid.window_upper(beta, epsilon);
  const double delta =
      upper > 0.0 ? upper / kCostLatticeCells : 1.0 / Money::kScale;
  const std::int64_t cell_hi = upper > 0.0 ? kCostLatticeCells : 0;
  const std::int64_t cell_lo =
      std::clamp<std::int64_t>(lattice_ceil(lower / delta), 0, cell_hi);

  const std::size_t n = grid.ads.size();
  std::vector<std::vector<std::int64_t>> weights(n);
  std::int64_t sum_max_weight = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t max_w = 0;
    weights[i].reserve(grid.ads[i].options.size());
    for (const GridOption& option : grid.ads[i].options) {
      const std::int64_t w = std::llround(option.summary.cost / delta);
      weights[i].push_back(w);
      max_w = std::max(max_w, w);
    }
    sum_max_weight += max_w;
  }
  const std::int64_t cells =
      std::min<std::int64_t>(sum_max_weight, std::max<std::int64_t>(cell_hi, 8000));

  // Group DP, exact over integer lattice sums: one option per AD.
  std::vector<double> value(cells + 1, kNegInf);
  value[0] = 0.0;
  std::vector<std::vector<std::int32_t>> parent(
      n, std::vector<std::int32_t>(cells + 1, -1));
  std::vector<double> next(cells + 1, kNegInf);
  for (std::size_t i = 0; i < n; ++i) {
    std::fill(next.begin(), next.end(), kNegInf);
    const std::vector<std::int64_t>& w = weights[i];
    const std::vector<GridOption>& options = grid.ads[i].options;
    for (std::int64_t c = 0; c <= cells; ++c) {
      if (value[c] == kNegInf) continue;
      for (std::size_t j = 0; j < options.size(); ++j) {
        const std::int64_t c2 = c + w[j];
        if (c2 > cells) continue;
        const double v = value[c] + options[j].summary.gmv;
        if (v > next[c2]) {
          next[c2] = v;
          parent[i][c2] = static_cast<std::int32_t>(j);
        }
      }
    }
    value.swap(next);
  }

  std::int64_t best_cell = -1;
  double best_value = kNegInf;
  for (std::int64_t c = cell_lo; c <= std::min(cell_hi, cells); ++c) {
    if (value[c] > best_value) {
      best_value = value[c];
      best_cell = c;
    }
  }

  std::vector<int> selection(n, 0);
  bool feasible = best_cell >= 0;
  if (feasible) {
    std::int64_t c = best_cell;
    for (std::size_t i = n; i-- > 0;) {
      const std::int32_t j = parent[i][c];
      selection[i] = j;
      c -= weights[i][j];
    }
  } else {
    // Nearest achievable lattice cost outside the window, flagged infeasible.
    std::int64_t below = -1;
    for (std::int64_t c = cell_lo - 1; c >= 0; --c) {
      if (value[c] != kNegInf) {
        below = c;
        break;
      }
    }
    std::int64_t above = -1;
    for (std::int64_t c = cell_hi + 1; c <= cells; ++c) {
      if (value[c] != kNegInf) {
        above = c;
        break;
      }
    }
    std::int64_t chosen = -1;
    if (below >= 0 && (above < 0 || cell_lo - below <= above - cell_hi)) {
      chosen = below;
    } else if (above >= 0) {
      chosen = above;
    }
    if (chosen >= 0) {
      std::int64_t c = chosen;
      for (std::size_t i = n; i-- > 0;) {
        const std::int32_t j = parent[i][c];
        selection[i] = j;
        c -= weights[i][j];
      }
    } else {
      // Every combination overflows the DP table: fall back to the separable
      // cheapest-per-AD selection, which is the exact minimum lattice cost.
      for (std::size_t i = 0; i < n; ++i) {
        std::int64_t w_min = weights[i][0];
        double y_best = grid.ads[i].options[0].summary.gmv;
        int j_best = 0;
        for (std::size_t j = 1; j < weights[i].size(); ++j) {
          const double y = grid.ads[i].options[j].summary.gmv;
          if (weights[i][j] < w_min ||
              (weights[i][j] == w_min && y > y_best)) {
            w_min = weights[i][j];
            y_best = y;
            j_best = static_cast<int>(j);
          }
        }
        selection[i] = j_best;
      }
    }
  }

  AllocationResult result;
  result.selection = selection;
  result.feasible = feasible;
  result.alphas.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GridOption& option = grid.ads[i].options[selection[i]];
    result.alphas.push_back(option.alpha);
    result.total_cost += option.summary.cost;
    result.total_gmv += option.summary.gmv;
    result.total_impressions += option.summary.impressions;
    result.per_ad_impressions.push_back(option.summary.impressions);
    result.per_ad_cost.push_back(option.summary.cost);
  }
  result.objective_value = result.total_gmv;
  result.deviation_sq = deviation_sq_of(result.per_ad_impressions);
  return result;
}

PiecewiseLinear PiecewiseLinear::from_points(std::vector<double> xs,
                                             std::vector<double> ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw InvalidRecord("piecewise-linear map needs matching non-empty points",
                        "optimizers");
  }
  PiecewiseLinear map;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!map.xs_.empty()) {
      if (xs[i] < map.xs_.back()) {
        throw InvalidRecord("piecewise-linear points must be x-sorted",
                            "optimizers");
      }
      if (xs[i] == map.xs_.back()) continue;  // duplicate x keeps first y
      if (ys[i] < map.ys_.back()) {
        throw NonMonotone("piecewise-linear map must be non-decreasing",
                          "optimizers");
      }
    }
    map.xs_.push_back(xs[i]);
    map.ys_.push_back(ys[i]);
  }
  return map;
}

double PiecewiseLinear::operator()(double x) const {
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  const std::size_t hi =
      std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  const std::size_t lo = hi - 1;
  const double t = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + t * (ys_[hi] - ys_[lo]);
}

double PiecewiseLinear::slope_right(double x) const {
  if (x < xs_.front() || x >= xs_.back()) return 0.0;
  const std::size_t hi =
      std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  const std::size_t lo = hi - 1;
  return (ys_[hi] - ys_[lo]) / (xs_[hi] - xs_[lo]);
}

double PiecewiseLinear::slope_left(double x) const {
  if (x <= xs_.front() || x > xs_.back()) return 0.0;
  const std::size_t hi =
      std::lower_bound(xs_.begin(), xs_.end(), x) - xs_.begin();
  const std::size_t lo = hi - 1;
  return (ys_[hi] - ys_[lo]) / (xs_[hi] - xs_[lo]);
}

namespace {

struct LevelContext {
  std::span<const Interval> boxes;
  std::span<const PiecewiseLinear> cost_maps;

  std::vector<double> clip_level(double t) const {
    std::vector<double> s(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      s[i] = std::clamp(t, boxes[i].lo, boxes[i].hi);
    }
    return s;
  }
  double total_cost(std::span<const double> s) const {
    double z = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) z += cost_maps[i](s[i]);
    return z;
  }
  double cost_at_level(double t) const { return total_cost(clip_level(t)); }
};

/// Moves `s` along a direction until the total cost meets `target`
/// (raise = true pushes cost up, false pulls it down). The direction is the
/// local cost gradient so coordinates split per their slopes; a uniform
/// direction is the fallback across plateaus. Returns false when even the
/// fallback cannot bracket the target.
bool project_to_cost(const LevelContext& ctx, std::vector<double>& s,
                     double target, bool raise) {
  auto attempt = [&](bool uniform) {
    std::vector<double> dir(s.size(), 0.0);
    double norm = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double d;
      if (uniform) {
        d = 1.0;
      } else {
        d = raise ? ctx.cost_maps[i].slope_right(s[i])
                  : ctx.cost_maps[i].slope_left(s[i]);
      }
      if (raise && s[i] >= ctx.boxes[i].hi) d = 0.0;
      if (!raise && s[i] <= ctx.boxes[i].lo) d = 0.0;
      dir[i] = d;
      norm = std::max(norm, std::abs(d));
    }
    if (norm == 0.0) return false;

    auto moved = [&](double step) {
      std::vector<double> v(s.size());
      const double sign = raise ? 1.0 : -1.0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        v[i] = std::clamp(s[i] + sign * step * dir[i], ctx.boxes[i].lo,
                          ctx.boxes[i].hi);
      }
      return v;
    };
    auto reaches = [&](double step) {
      const double c = ctx.total_cost(moved(step));
      return raise ? c >= target : c <= target;
    };

    double hi = 1.0 / norm;
    int doublings = 0;
    while (!reaches(hi) && doublings < 80) {
      hi *= 2.0;
      ++doublings;
    }
    if (!reaches(hi)) return false;
    double lo = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (reaches(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    s = moved(hi);
    return true;
  };
  return attempt(false) || attempt(true);
}

}  // namespace

LevelProjection solve_level_projection(
    std::span<const Interval> boxes,
    std::span<const PiecewiseLinear> cost_maps, Interval window) {
  const std::size_t n = boxes.size();
  if (n == 0 || cost_maps.size() != n) {
    throw InvalidRecord("level projection needs one cost map per box",
                        "optimizers");
  }
  for (const Interval& box : boxes) {
    if (box.lo > box.hi) {
      throw InvalidRecord("box with lo > hi", "optimizers");
    }
  }
  const LevelContext ctx{boxes, cost_maps};

  double t_min = boxes[0].lo, t_max = boxes[0].hi;
  double width = 0.0;
  for (const Interval& box : boxes) {
    t_min = std::min(t_min, box.lo);
    t_max = std::max(t_max, box.hi);
    width = std::max(width, box.hi - box.lo);
  }

  LevelProjection out;
  const double z_min = ctx.cost_at_level(t_min);
  const double z_max = ctx.cost_at_level(t_max);
  // z_min / z_max are the global cost extremes over the box, so a window
  // outside [z_min, z_max] is infeasible for the whole problem.
  if (z_min > window.hi || z_max < window.lo) {
    out.s = ctx.clip_level(z_min > window.hi ? t_min : t_max);
    out.total_cost = z_min > window.hi ? z_min : z_max;
    out.deviation_sq = deviation_sq_of(out.s);
    out.feasible = false;
    return out;
  }

  // Feasible level range [t_b, t_B] by bisection on the monotone total cost.
  double t_b = t_min;
  if (z_min < window.lo) {
    double lo = t_min, hi = t_max;
    for (int iter = 0; iter < 100; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (ctx.cost_at_level(mid) >= window.lo) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    t_b = hi;
  }
  double t_B = t_max;
  if (z_max > window.hi) {
    double lo = t_min, hi = t_max;
    for (int iter = 0; iter < 100; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (ctx.cost_at_level(mid) <= window.hi) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    t_B = lo;
  }
  if (t_b > t_B) t_b = t_B = 0.5 * (t_b + t_B);

  // The deviation is piecewise quadratic in the level with breakpoints at
  // box edges; minimize it exactly per segment.
  std::vector<double> breaks{t_b, t_B};
  for (const Interval& box : boxes) {
    if (box.lo > t_b && box.lo < t_B) breaks.push_back(box.lo);
    if (box.hi > t_b && box.hi < t_B) breaks.push_back(box.hi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  auto dev_at = [&](double t) { return deviation_sq_of(ctx.clip_level(t)); };
  double best_t = t_b;
  double best_dev = dev_at(t_b);
  auto consider = [&](double t) {
    const double d = dev_at(t);
    if (d < best_dev - 1e-15) {
      best_dev = d;
      best_t = t;
    }
  };
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    consider(b);
    const double h = 0.5 * (b - a);
    if (h <= 0.0) continue;
    const double m = 0.5 * (a + b);
    const double fa = dev_at(a), fm = dev_at(m), fb = dev_at(b);
    const double curvature = (fa - 2.0 * fm + fb) / (2.0 * h * h);
    if (curvature > 1e-18) {
      const double slope = (fb - fa) / (2.0 * h);
      const double vertex = m - slope / (2.0 * curvature);
      if (vertex > a && vertex < b) consider(vertex);
    }
  }

  std::vector<double> s = ctx.clip_level(best_t);

  // Projected-gradient refinement: lets interior coordinates split per their
  // cost slopes when the window binds, which the level family cannot express.
  auto restore_window = [&](std::vector<double>& v) {
    const double c = ctx.total_cost(v);
    if (c < window.lo) return project_to_cost(ctx, v, window.lo, true);
    if (c > window.hi) return project_to_cost(ctx, v, window.hi, false);
    return true;
  };
  restore_window(s);
  double f_cur = deviation_sq_of(s);

  double step = width > 0.0 ? 0.25 * width : 0.0;
  for (int iter = 0; iter < 10000 && step >= 1e-9; ++iter) {
    const double mean = population_mean(s);
    std::vector<double> cand(n);
    for (std::size_t i = 0; i < n; ++i) {
      cand[i] = std::clamp(s[i] - step * 2.0 * (s[i] - mean), boxes[i].lo,
                           boxes[i].hi);
    }
    if (restore_window(cand)) {
      const double f_new = deviation_sq_of(cand);
      if (f_new < f_cur - 1e-15) {
        s = std::move(cand);
        f_cur = f_new;
        continue;
      }
    }
    step *= 0.5;
  }

  out.s = std::move(s);
  out.total_cost = ctx.total_cost(out.s);
  out.deviation_sq = deviation_sq_of(out.s);
  const double tol = 1e-6 * std::max(1.0, std::abs(window.hi));
  out.feasible =
      out.total_cost >= window.lo - tol && out.total_cost <= window.hi + tol;
  return out;
}

CostInverter make_replay_inverter(const AuctionLog& log,
                                  const DayFilter& days) {
  return [&log, days](const std::string& ad_id, double take_rate,
                      double target_cost, const AlphaInterval& range) {
    return invert_cost(log, ad_id, take_rate, target_cost, range.lo, range.hi,
                       days);
  };
}

AllocationResult optimize_style(const ValuationGrid& grid, double beta,
                                double epsilon, const CostInverter& inverter) {
  check_window_params(beta, epsilon);
  if (grid.ads.empty()) {
    throw EmptyGrid("style optimizer needs a non-empty grid");
  }

  const std::size_t n = grid.ads.size();
  std::vector<Interval> boxes(n);
  std::vector<PiecewiseLinear> cost_maps(n);
  std::vector<PiecewiseLinear> gmv_maps(n);
  std::vector<PiecewiseLinear> alpha_maps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const AdGrid& ad = grid.ads[i];
    if (ad.options.empty()) {
      throw EmptyGrid("ad '" + ad.ad_id + "' has no alpha options");
    }
    std::vector<double> s_points, z_points, y_points, a_points;
    for (const GridOption& option : ad.options) {
      s_points.push_back(option.summary.impressions);
      z_points.push_back(option.summary.cost);
      y_points.push_back(option.summary.gmv);
      a_points.push_back(option.alpha);
    }
    boxes[i] = {s_points.front(), s_points.back()};
    cost_maps[i] = PiecewiseLinear::from_points(s_points, z_points);
    gmv_maps[i] = PiecewiseLinear::from_points(s_points, y_points);
    alpha_maps[i] = PiecewiseLinear::from_points(s_points, a_points);
  }

  const Interval window{grid.window_lower(beta, epsilon),
                        grid.window_upper(beta, epsilon)};
  const LevelProjection projection =
      solve_level_projection(boxes, cost_maps, window);

  AllocationResult result;
  result.per_ad_impressions = projection.s;
  result.feasible = projection.feasible;
  result.deviation_sq = projection.deviation_sq;
  for (std::size_t i = 0; i < n; ++i) {
    const AdGrid& ad = grid.ads[i];
    const double s_i = projection.s[i];
    const double z_i = cost_maps[i](s_i);
    double alpha_i = alpha_maps[i](s_i);
    if (inverter) {
      const Inversion inv =
          inverter(ad.ad_id, ad.take_rate, z_i, ad.alpha_range);
      alpha_i = inv.alpha;
    }
    int best_j = 0;
    double best_gap = std::abs(ad.options[0].alpha - alpha_i);
    for (std::size_t j = 1; j < ad.options.size(); ++j) {
      const double gap = std::abs(ad.options[j].alpha - alpha_i);
      if (gap < best_gap) {
        best_gap = gap;
        best_j = static_cast<int>(j);
      }
    }
    result.alphas.push_back(alpha_i);
    result.selection.push_back(best_j);
    result.per_ad_cost.push_back(z_i);
    result.total_cost += z_i;
    result.total_gmv += gmv_maps[i](s_i);
    result.total_impressions += s_i;
  }
  const double mean = population_mean(result.per_ad_impressions);
  result.objective_value =
      mean > 0.0
          ? std::sqrt(result.deviation_sq / static_cast<double>(n)) / mean
          : 0.0;
  return result;
}

}  // namespace cia
