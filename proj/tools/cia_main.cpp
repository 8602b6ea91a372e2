/*
 * Copyright 2026 cia-sim authors
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cia/error.hpp"
#include "cia/experiments.hpp"
#include "cia/inference.hpp"
#include "cia/log_io.hpp"
#include "cia/log_synth.hpp"
#include "cia/optimizers.hpp"
#include "cia/replay.hpp"
#include "cia/rng.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// small utilities

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cia::IoError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string content_hash(const std::string& path) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file_bytes(path))));
  return buf;
}

/// write-temp-then-rename so partially written artifacts never appear.
void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw cia::IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw cia::IoError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

cia::DayFilter parse_days(const std::string& text) {
  if (text.empty() || text == "all") return cia::DayFilter::all();
  const std::size_t dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      return cia::DayFilter::single(std::stoi(text));
    }
    const int lo = std::stoi(text.substr(0, dots));
    const int hi = std::stoi(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("hi < lo");
    return cia::DayFilter::range(lo, hi);
  } catch (const std::exception&) {
    throw cia::InvalidConfig("bad --days value '" + text + "' (want a..b)",
                             "cli");
  }
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> sorted_ad_ids(const cia::AuctionLog& log) {
  std::vector<std::string> ids;
  ids.reserve(log.ad_index.size());
  for (const auto& [ad_id, positions] : log.ad_index) ids.push_back(ad_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::string> resolve_ads(const cia::AuctionLog& log,
                                     const std::string& spec) {
  if (spec.empty() || spec == "all") return sorted_ad_ids(log);
  std::vector<std::string> ids = split_csv(spec);
  for (const std::string& id : ids) {
    if (!log.has_ad(id)) {
      throw cia::UnknownAd("ad '" + id + "' not present in log", "cli");
    }
  }
  return ids;
}

ordered_json day_json(const cia::DayFilter& days) {
  if (days.is_all()) return "all";
  return std::to_string(days.lo()) + ".." + std::to_string(days.hi());
}

void write_manifest(const std::string& path, const std::string& command,
                    ordered_json parameters, ordered_json inputs,
                    const std::vector<std::string>& outputs) {
  ordered_json m;
  m["command"] = command;
  m["parameters"] = std::move(parameters);
  m["inputs"] = std::move(inputs);
  m["outputs"] = outputs;
  write_file_atomic(path, m.dump(2) + "\n");
}

ordered_json log_input_json(const std::string& path) {
  ordered_json j;
  j["path"] = path;
  j["fnv1a64"] = content_hash(path);
  return j;
}

// ---------------------------------------------------------------------------
// campaign spec files

struct CampaignSpec {
  cia::Campaign campaign;
  bool explicit_bounds = false;
  double lower_scale = 0.5;
  double upper_scale = 2.0;
};

CampaignSpec campaign_from_json(const nlohmann::json& j) {
  CampaignSpec spec;
  spec.campaign.campaign_id = j.value("campaign_id", std::string("campaign"));
  for (const auto& id : j.at("ad_ids")) {
    spec.campaign.ad_ids.push_back(id.get<std::string>());
  }
  auto parse_bounds = [&](const char* key, std::vector<cia::Money>& out) {
    if (!j.contains(key)) return false;
    const auto& node = j[key];
    if (node.is_string()) {
      out.assign(spec.campaign.ad_ids.size(),
                 cia::Money::parse(node.get<std::string>()));
    } else {
      for (const auto& v : node) {
        out.push_back(cia::Money::parse(v.get<std::string>()));
      }
    }
    return true;
  };
  const bool has_lower = parse_bounds("bid_lower", spec.campaign.bid_lower);
  const bool has_upper = parse_bounds("bid_upper", spec.campaign.bid_upper);
  spec.explicit_bounds = has_lower && has_upper;
  spec.lower_scale = j.value("bid_lower_scale", 0.5);
  spec.upper_scale = j.value("bid_upper_scale", 2.0);
  return spec;
}

/// Fills bid bounds from scales on each AD's mean logged bid when the spec
/// file does not pin them explicitly.
void resolve_bounds(CampaignSpec& spec, const cia::AuctionLog& log,
                    const cia::DayFilter& days) {
  if (spec.explicit_bounds) return;
  spec.campaign.bid_lower.clear();
  spec.campaign.bid_upper.clear();
  for (const std::string& ad : spec.campaign.ad_ids) {
    const cia::Money mean = cia::mean_logged_bid(log, ad, days);
    const auto scaled = [&](double scale) {
      return cia::Money::from_units(std::max<std::int64_t>(
          1, std::llround(static_cast<double>(mean.units()) * scale)));
    };
    spec.campaign.bid_lower.push_back(scaled(spec.lower_scale));
    spec.campaign.bid_upper.push_back(
        std::max(scaled(spec.upper_scale), spec.campaign.bid_lower.back()));
  }
}

CampaignSpec load_campaign_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw cia::InvalidConfig("campaign spec '" + path + "': " + e.what(),
                             "cli");
  }
  try {
    return campaign_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw cia::InvalidConfig("campaign spec '" + path + "': " + e.what(),
                             "cli");
  }
}

std::vector<CampaignSpec> load_campaigns_file(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file_bytes(path));
  } catch (const nlohmann::json::exception& e) {
    throw cia::InvalidConfig("campaigns file '" + path + "': " + e.what(),
                             "cli");
  }
  std::vector<CampaignSpec> specs;
  try {
    if (j.is_array()) {
      for (const auto& cj : j) specs.push_back(campaign_from_json(cj));
    } else {
      specs.push_back(campaign_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw cia::InvalidConfig("campaigns file '" + path + "': " + e.what(),
                             "cli");
  }
  return specs;
}

// ---------------------------------------------------------------------------
// CSV renderers

std::string shift_cells(const cia::MetricShift& s) {
  return fmt_opt(s.cost_pct) + "," + fmt_opt(s.gmv_pct) + "," +
         fmt_opt(s.roi_pct) + "," + fmt_opt(s.cvr_pct) + "," +
         fmt_opt(s.ppc_pct);
}

std::string ad_level_csv(const cia::AdLevelReport& report) {
  std::string out =
      "ad_id,alpha,clamped,within_window,cost_pct,gmv_pct,roi_pct,cvr_pct,"
      "ppc_pct\n";
  out += "overall,,,," + shift_cells(report.overall) + "\n";
  for (const cia::AdLevelRow& row : report.rows) {
    out += row.ad_id + "," + fmt(row.alpha) + "," +
           (row.alpha_clamped ? "1" : "0") + "," +
           (row.within_cost_window ? "1" : "0") + "," +
           shift_cells(row.shift) + "\n";
  }
  return out;
}

std::string campaign_gmv_csv(const cia::CampaignLevelReport& report) {
  std::string out =
      "campaign_id,feasible,baseline_scale,cost_pct,gmv_pct,roi_pct,cvr_pct,"
      "ppc_pct\n";
  out += "overall,,," + shift_cells(report.overall) + "\n";
  for (const cia::CampaignGmvRow& row : report.gmv_rows) {
    out += row.campaign_id + "," + (row.allocation.feasible ? "1" : "0") +
           "," + fmt(row.baseline_scale) + "," + shift_cells(row.shift) + "\n";
  }
  return out;
}

std::string campaign_style_csv(const cia::CampaignLevelReport& report) {
  std::string out =
      "campaign_id,cia_norm_std_impressions,kb_norm_std_impressions,"
      "cia_norm_std_cost,kb_norm_std_cost,window_feasible\n";
  out += "overall," + fmt(report.overall_cia_norm_std) + "," +
         fmt(report.overall_kb_norm_std) + ",,,\n";
  for (const cia::CampaignStyleRow& row : report.style_rows) {
    out += row.campaign_id + "," + fmt(row.cia_norm_std_impressions) + "," +
           fmt(row.kb_norm_std_impressions) + "," +
           fmt(row.cia_norm_std_cost) + "," + fmt(row.kb_norm_std_cost) +
           "," + (row.window_feasible ? "1" : "0") + "\n";
  }
  return out;
}

std::string platform_csv(const cia::AdoptionSweep& sweep) {
  std::string out =
      "fraction,adopters,scope,cost_pct,gmv_pct,roi_pct,cvr_pct,ppc_pct\n";
  for (const cia::SweepRow& row : sweep.rows) {
    out += fmt(row.fraction) + "," + std::to_string(row.adopters) + ",all," +
           shift_cells(row.all_shift) + "\n";
    out += fmt(row.fraction) + "," + std::to_string(row.adopters) + ",cia," +
           shift_cells(row.subset_shift) + "\n";
  }
  return out;
}

std::string summary_csv_line(const cia::ReplaySummary& s) {
  return fmt(s.cost) + "," + fmt(s.gmv) + "," + fmt(s.impressions) + "," +
         fmt(s.clicks) + "," + fmt(s.conversions);
}

ordered_json allocation_json(const cia::Campaign& campaign,
                             const cia::ValuationGrid& grid,
                             const cia::AllocationResult& result,
                             const char* demand, double beta, double epsilon) {
  ordered_json j;
  j["campaign_id"] = campaign.campaign_id;
  j["demand"] = demand;
  j["feasible"] = result.feasible;
  j["objective_value"] = result.objective_value;
  j["deviation_sq"] = result.deviation_sq;
  j["total_cost"] = result.total_cost;
  j["total_gmv"] = result.total_gmv;
  j["total_impressions"] = result.total_impressions;
  j["baseline_total_cost"] = grid.baseline_total;
  j["cost_window"] = {{"lower", grid.window_lower(beta, epsilon)},
                      {"upper", grid.window_upper(beta, epsilon)}};
  ordered_json ads = ordered_json::array();
  for (std::size_t i = 0; i < grid.ads.size(); ++i) {
    ordered_json aj;
    aj["ad_id"] = grid.ads[i].ad_id;
    aj["take_rate"] = grid.ads[i].take_rate;
    aj["alpha_lo"] = grid.ads[i].alpha_range.lo;
    aj["alpha_hi"] = grid.ads[i].alpha_range.hi;
    aj["alpha"] = result.alphas[i];
    aj["option"] = result.selection[i];
    aj["cost"] = result.per_ad_cost[i];
    aj["impressions"] = result.per_ad_impressions[i];
    ads.push_back(std::move(aj));
  }
  j["ads"] = std::move(ads);
  return j;
}

// ---------------------------------------------------------------------------
// command options

struct GenerateOptions {
  std::string config_path;
  std::string out;
  std::int64_t seed = -1;  // <0: keep config seed
};

struct StationarityOptions {
  std::string log_path;
  std::string ads = "all";
  std::string out;
};

struct InferOptions {
  std::string log_path;
  std::string ads = "all";
  std::string days = "all";
  double lower_scale = 0.5;
  double upper_scale = 2.0;
  std::string out;
};

struct ReplayOptions {
  std::string log_path;
  std::string ad;
  std::string policy = "keyword";
  double take_rate = 0.0;
  double alpha = 1.0;
  std::string bid;
  std::string days = "all";
  std::string out;
};

struct CurveOptions {
  std::string log_path;
  std::string ad;
  double take_rate = 0.0;
  std::string alphas = "0.1:10:8";
  std::string days = "all";
  std::string out;
};

struct OptimizeOptions {
  std::string log_path;
  std::string campaign_path;
  double beta = 1.0;
  double epsilon = 0.2;
  int grid_size = 8;
  std::string days = "all";
  std::string out;
};

struct ExperimentOptions {
  std::string log_path;
  std::string out_dir;
  std::string ads = "all";
  std::string campaigns_path;
  int auto_campaigns = 10;
  int campaign_size = 5;
  double lower_scale = 0.5;
  double upper_scale = 2.0;
  std::string demand = "both";
  std::string fractions = "0.1,0.3,0.5,1.0";
  std::uint64_t seed = 1;
  double beta = 1.0;
  double ad_epsilon = 0.1;
  double campaign_epsilon = 0.2;
  int grid_size = 8;
  std::string days = "all";
};

struct GlobalOptions {
  int threads = 1;
  bool strict = false;
};

// ---------------------------------------------------------------------------
// command implementations

void run_generate(const GenerateOptions& opt) {
  cia::SynthConfig config = cia::SynthConfig::from_file(opt.config_path);
  if (opt.seed >= 0) config.seed = static_cast<std::uint64_t>(opt.seed);
  const cia::AuctionLog log = cia::generate(config);

  std::ostringstream body;
  cia::write_log_jsonl(log, body);
  write_file_atomic(opt.out, body.str());

  ordered_json params;
  params["config"] = ordered_json::parse(config.to_json());
  ordered_json inputs;
  inputs["config"] = {{"path", opt.config_path},
                      {"fnv1a64", content_hash(opt.config_path)}};
  write_manifest(opt.out + ".manifest.json", "generate", std::move(params),
                 std::move(inputs), {opt.out});
}

void run_stationarity(const StationarityOptions& opt) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const std::vector<std::string> ids = resolve_ads(log, opt.ads);
  const cia::StationarityReport report = cia::stationarity_report(log, ids);

  std::string csv = "ad_id,volume_mean,volume_std,ctr_cdf_gap,cvr_cdf_gap\n";
  for (const cia::AdStationarity& row : report.ads) {
    csv += row.ad_id + "," + fmt(row.volume_mean) + "," +
           fmt(row.volume_std) + "," + fmt(row.ctr_cdf_gap) + "," +
           fmt(row.cvr_cdf_gap) + "\n";
  }
  write_file_atomic(opt.out, csv);

  ordered_json params;
  params["ads"] = opt.ads;
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  write_manifest(opt.out + ".manifest.json", "stationarity", std::move(params),
                 std::move(inputs), {opt.out});
}

void run_infer(const InferOptions& opt) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);
  const bool explicit_list = !(opt.ads.empty() || opt.ads == "all");
  const std::vector<std::string> ids = resolve_ads(log, opt.ads);

  std::string csv = "ad_id,R,tk,B,alpha_lo,alpha_hi,clamped\n";
  std::vector<std::string> skipped;
  for (const std::string& ad : ids) {
    cia::AdProfile profile;
    try {
      profile = cia::compute_profile(log, ad, days);
    } catch (const cia::DegenerateAd&) {
      if (explicit_list) throw;
      skipped.push_back(ad);
      continue;
    }
    const cia::Money mean = cia::mean_logged_bid(log, ad, days);
    const auto scaled = [&](double scale) {
      return cia::Money::from_units(std::max<std::int64_t>(
          1, std::llround(static_cast<double>(mean.units()) * scale)));
    };
    const cia::Money lower = scaled(opt.lower_scale);
    const cia::Money upper = std::max(scaled(opt.upper_scale), lower);
    const cia::AlphaInterval range =
        cia::feasible_alpha_range(log, ad, profile, lower, upper, days);
    csv += ad + "," + fmt(profile.expected_roi) + "," +
           fmt(profile.take_rate) + "," + fmt(profile.virtual_budget) + "," +
           fmt(range.lo) + "," + fmt(range.hi) + "," +
           (range.clamped() ? "1" : "0") + "\n";
  }
  write_file_atomic(opt.out, csv);

  ordered_json params;
  params["ads"] = opt.ads;
  params["days"] = day_json(days);
  params["bid_lower_scale"] = opt.lower_scale;
  params["bid_upper_scale"] = opt.upper_scale;
  params["skipped"] = skipped;
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  write_manifest(opt.out + ".manifest.json", "infer", std::move(params),
                 std::move(inputs), {opt.out});
}

void run_replay(const ReplayOptions& opt) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);
  if (!log.has_ad(opt.ad)) {
    throw cia::UnknownAd("ad '" + opt.ad + "' not present in log", "cli");
  }

  cia::BidPolicy policy = cia::BidPolicy::keyword();
  if (opt.policy == "cia") {
    if (opt.take_rate <= 0.0) {
      throw cia::InvalidConfig("--policy cia needs --tk > 0", "cli");
    }
    policy.set_override(opt.ad, cia::BidRule::cia(opt.alpha, opt.take_rate));
  } else if (opt.policy == "fixed") {
    if (opt.bid.empty()) {
      throw cia::InvalidConfig("--policy fixed needs --bid", "cli");
    }
    policy.set_override(opt.ad, cia::BidRule::fixed(cia::Money::parse(opt.bid)));
  } else if (opt.policy != "keyword") {
    throw cia::InvalidConfig("--policy must be keyword, cia or fixed", "cli");
  }

  const cia::ReplaySummary summary = cia::evaluate(log, opt.ad, policy, days);
  const std::string content =
      "cost,gmv,impressions,clicks,conversions\n" + summary_csv_line(summary) +
      "\n";
  std::cout << content;
  if (!opt.out.empty()) {
    write_file_atomic(opt.out, content);
    ordered_json params;
    params["ad"] = opt.ad;
    params["policy"] = opt.policy;
    params["tk"] = opt.take_rate;
    params["alpha"] = opt.alpha;
    params["days"] = day_json(days);
    ordered_json inputs;
    inputs["log"] = log_input_json(opt.log_path);
    write_manifest(opt.out + ".manifest.json", "replay", std::move(params),
                   std::move(inputs), {opt.out});
  }
}

std::vector<double> parse_alpha_grid(const std::string& text) {
  // lo:hi:n, geometrically spaced
  std::vector<std::string> parts;
  {
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ':')) parts.push_back(item);
  }
  if (parts.size() != 3) {
    throw cia::InvalidConfig("--alphas wants lo:hi:n", "cli");
  }
  double lo = 0, hi = 0;
  int n = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    n = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw cia::InvalidConfig("--alphas wants numeric lo:hi:n", "cli");
  }
  if (!(lo > 0.0) || hi < lo || n < 1) {
    throw cia::InvalidConfig("--alphas needs 0 < lo <= hi and n >= 1", "cli");
  }
  std::vector<double> alphas;
  if (n == 1 || hi == lo) {
    alphas.push_back(lo);
    return alphas;
  }
  const double ratio = hi / lo;
  for (int j = 0; j < n; ++j) {
    const double a =
        lo * std::pow(ratio, static_cast<double>(j) / static_cast<double>(n - 1));
    if (alphas.empty() || a > alphas.back()) alphas.push_back(a);
  }
  return alphas;
}

void run_curve(const CurveOptions& opt) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);
  if (opt.take_rate <= 0.0) {
    throw cia::InvalidConfig("curve needs --tk > 0", "cli");
  }
  const std::vector<double> alphas = parse_alpha_grid(opt.alphas);
  const cia::AlphaCurve curve =
      cia::alpha_curve(log, opt.ad, opt.take_rate, alphas, days);

  std::string csv = "alpha,cost,gmv,impressions,clicks\n";
  for (const cia::AlphaSample& sample : curve.samples) {
    csv += fmt(sample.alpha) + "," + fmt(sample.summary.cost) + "," +
           fmt(sample.summary.gmv) + "," + fmt(sample.summary.impressions) +
           "," + fmt(sample.summary.clicks) + "\n";
  }
  write_file_atomic(opt.out, csv);

  ordered_json params;
  params["ad"] = opt.ad;
  params["tk"] = opt.take_rate;
  params["alphas"] = opt.alphas;
  params["days"] = day_json(days);
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  write_manifest(opt.out + ".manifest.json", "curve", std::move(params),
                 std::move(inputs), {opt.out});
}

void print_allocation_table(const cia::ValuationGrid& grid,
                            const cia::AllocationResult& result) {
  std::printf("%-12s %10s %10s %12s %12s\n", "ad_id", "alpha", "option",
              "cost", "impressions");
  for (std::size_t i = 0; i < grid.ads.size(); ++i) {
    std::printf("%-12s %10.4f %10d %12.4f %12.2f\n",
                grid.ads[i].ad_id.c_str(), result.alphas[i],
                result.selection[i], result.per_ad_cost[i],
                result.per_ad_impressions[i]);
  }
  std::printf("total cost %.4f gmv %.4f impressions %.2f feasible %s\n",
              result.total_cost, result.total_gmv, result.total_impressions,
              result.feasible ? "yes" : "no");
}

void run_optimize(const OptimizeOptions& opt, cia::Demand demand,
                  const GlobalOptions& global) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);
  CampaignSpec spec = load_campaign_file(opt.campaign_path);
  resolve_bounds(spec, log, days);

  cia::CampaignProblem problem;
  problem.campaign = spec.campaign;
  problem.beta = opt.beta;
  problem.epsilon = opt.epsilon;
  problem.grid_size = opt.grid_size;
  problem.demand = demand;
  problem.days = days;
  for (const std::string& ad : spec.campaign.ad_ids) {
    problem.profiles.push_back(cia::compute_profile(log, ad, days));
  }

  const cia::ValuationGrid grid = cia::build_grid(log, problem, global.threads);
  const cia::AllocationResult result =
      demand == cia::Demand::kGmv
          ? cia::optimize_gmv(grid, opt.beta, opt.epsilon)
          : cia::optimize_style(grid, opt.beta, opt.epsilon,
                                cia::make_replay_inverter(log, days));

  const char* demand_name = demand == cia::Demand::kGmv ? "gmv" : "style";
  const ordered_json result_json = allocation_json(
      spec.campaign, grid, result, demand_name, opt.beta, opt.epsilon);
  write_file_atomic(opt.out, result_json.dump(2) + "\n");

  ordered_json params;
  params["campaign"] = opt.campaign_path;
  params["demand"] = demand_name;
  params["beta"] = opt.beta;
  params["epsilon"] = opt.epsilon;
  params["k"] = opt.grid_size;
  params["days"] = day_json(days);
  params["threads"] = global.threads;
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  inputs["campaign"] = {{"path", opt.campaign_path},
                        {"fnv1a64", content_hash(opt.campaign_path)}};
  write_manifest(opt.out + ".manifest.json", "optimize", std::move(params),
                 std::move(inputs), {opt.out});

  print_allocation_table(grid, result);
  if (global.strict && !result.feasible) {
    throw cia::InfeasibleWindow("campaign '" + spec.campaign.campaign_id +
                                "' allocation missed the cost window");
  }
}

std::vector<CampaignSpec> auto_campaigns(const cia::AuctionLog& log,
                                         const ExperimentOptions& opt,
                                         const cia::DayFilter& days) {
  std::vector<std::string> ids = sorted_ad_ids(log);
  cia::Rng rng(opt.seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(ids[i - 1], ids[j]);
  }
  std::vector<CampaignSpec> specs;
  std::size_t next = 0;
  for (int c = 0; c < opt.auto_campaigns; ++c) {
    if (next + static_cast<std::size_t>(opt.campaign_size) > ids.size()) break;
    CampaignSpec spec;
    char name[32];
    std::snprintf(name, sizeof name, "camp%04d", c);
    spec.campaign.campaign_id = name;
    for (int k = 0; k < opt.campaign_size; ++k) {
      spec.campaign.ad_ids.push_back(ids[next++]);
    }
    std::sort(spec.campaign.ad_ids.begin(), spec.campaign.ad_ids.end());
    spec.lower_scale = opt.lower_scale;
    spec.upper_scale = opt.upper_scale;
    resolve_bounds(spec, log, days);
    specs.push_back(std::move(spec));
  }
  return specs;
}

void run_experiment_ad(const ExperimentOptions& opt) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);
  const std::vector<std::string> ids = resolve_ads(log, opt.ads);
  const cia::AdLevelReport report =
      cia::run_ad_level(log, ids, opt.beta, opt.ad_epsilon, days);

  const std::string csv_path = (fs::path(opt.out_dir) / "ad_level.csv").string();
  write_file_atomic(csv_path, ad_level_csv(report));

  ordered_json params;
  params["ads"] = opt.ads;
  params["beta"] = opt.beta;
  params["epsilon"] = opt.ad_epsilon;
  params["seed"] = opt.seed;
  params["days"] = day_json(days);
  params["skipped"] = report.skipped;
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  write_manifest((fs::path(opt.out_dir) / "manifest.json").string(),
                 "experiment ad", std::move(params), std::move(inputs),
                 {csv_path});
}

void run_experiment_campaign(const ExperimentOptions& opt,
                             const GlobalOptions& global) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);

  std::vector<CampaignSpec> specs;
  if (!opt.campaigns_path.empty()) {
    specs = load_campaigns_file(opt.campaigns_path);
    for (CampaignSpec& spec : specs) resolve_bounds(spec, log, days);
  } else {
    specs = auto_campaigns(log, opt, days);
  }
  std::vector<cia::Campaign> campaigns;
  campaigns.reserve(specs.size());
  for (const CampaignSpec& spec : specs) campaigns.push_back(spec.campaign);

  cia::CampaignLevelOptions options;
  options.beta = opt.beta;
  options.epsilon = opt.campaign_epsilon;
  options.grid_size = opt.grid_size;
  options.threads = global.threads;
  options.days = days;

  std::vector<std::string> outputs;
  bool any_infeasible = false;
  if (opt.demand != "gmv" && opt.demand != "style" && opt.demand != "both") {
    throw cia::InvalidConfig("--demand must be gmv, style or both", "cli");
  }
  if (opt.demand == "gmv" || opt.demand == "both") {
    const cia::CampaignLevelReport report =
        cia::run_campaign_level(log, campaigns, cia::Demand::kGmv, options);
    const std::string path =
        (fs::path(opt.out_dir) / "campaign_gmv.csv").string();
    write_file_atomic(path, campaign_gmv_csv(report));
    outputs.push_back(path);
    for (const cia::CampaignGmvRow& row : report.gmv_rows) {
      any_infeasible = any_infeasible || !row.allocation.feasible;
    }
  }
  if (opt.demand == "style" || opt.demand == "both") {
    const cia::CampaignLevelReport report =
        cia::run_campaign_level(log, campaigns, cia::Demand::kStyle, options);
    const std::string path =
        (fs::path(opt.out_dir) / "campaign_style.csv").string();
    write_file_atomic(path, campaign_style_csv(report));
    outputs.push_back(path);
    for (const cia::CampaignStyleRow& row : report.style_rows) {
      any_infeasible = any_infeasible || !row.window_feasible;
    }
  }

  ordered_json params;
  params["demand"] = opt.demand;
  params["beta"] = opt.beta;
  params["epsilon"] = opt.campaign_epsilon;
  params["k"] = opt.grid_size;
  params["seed"] = opt.seed;
  params["days"] = day_json(days);
  params["campaigns"] =
      opt.campaigns_path.empty() ? "auto" : opt.campaigns_path;
  params["auto_campaigns"] = opt.auto_campaigns;
  params["campaign_size"] = opt.campaign_size;
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  write_manifest((fs::path(opt.out_dir) / "manifest.json").string(),
                 "experiment campaign", std::move(params), std::move(inputs),
                 outputs);
  if (global.strict && any_infeasible) {
    throw cia::InfeasibleWindow("at least one campaign missed its window");
  }
}

void run_experiment_platform(const ExperimentOptions& opt) {
  const cia::AuctionLog log = cia::read_log_file(opt.log_path);
  const cia::DayFilter days = parse_days(opt.days);
  std::vector<double> fractions;
  for (const std::string& f : split_csv(opt.fractions)) {
    try {
      fractions.push_back(std::stod(f));
    } catch (const std::exception&) {
      throw cia::InvalidConfig("bad --fractions entry '" + f + "'", "cli");
    }
  }
  const cia::AdoptionSweep sweep =
      cia::run_platform_sweep(log, fractions, opt.seed, opt.beta, days);

  const std::string csv_path =
      (fs::path(opt.out_dir) / "platform_sweep.csv").string();
  write_file_atomic(csv_path, platform_csv(sweep));

  ordered_json params;
  params["fractions"] = opt.fractions;
  params["seed"] = opt.seed;
  params["beta"] = opt.beta;
  params["days"] = day_json(days);
  params["skipped"] = sweep.skipped;
  ordered_json inputs;
  inputs["log"] = log_input_json(opt.log_path);
  write_manifest((fs::path(opt.out_dir) / "manifest.json").string(),
                 "experiment platform", std::move(params), std::move(inputs),
                 {csv_path});
}

int exit_code_for(const cia::Error& e) {
  switch (e.kind()) {
    case cia::ErrorKind::kConfig:
      return 2;
    case cia::ErrorKind::kData:
      return 3;
    case cia::ErrorKind::kInfeasible:
      return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replay-based sponsored-search bidding simulator and optimizer"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--threads", global.threads,
                 "cap on internal parallelism (default 1)");
  app.add_flag("--strict", global.strict,
               "treat flagged infeasible allocations as errors (exit 4)");

  GenerateOptions generate_opt;
  CLI::App* generate = app.add_subcommand("generate", "synthesize an auction log");
  generate->add_option("--config", generate_opt.config_path, "synth config JSON")
      ->required();
  generate->add_option("--out", generate_opt.out, "output log JSONL")->required();
  generate->add_option("--seed", generate_opt.seed, "override the config seed");

  StationarityOptions stationarity_opt;
  CLI::App* stationarity =
      app.add_subcommand("stationarity", "per-AD day-over-day drift report");
  stationarity->add_option("--log", stationarity_opt.log_path, "auction log")
      ->required();
  stationarity->add_option("--ads", stationarity_opt.ads, "all or id,id,...");
  stationarity->add_option("--out", stationarity_opt.out, "report CSV")
      ->required();

  InferOptions infer_opt;
  CLI::App* infer =
      app.add_subcommand("infer", "per-AD take-rate / budget / alpha-range");
  infer->add_option("--log", infer_opt.log_path, "auction log")->required();
  infer->add_option("--ads", infer_opt.ads, "all or id,id,...");
  infer->add_option("--days", infer_opt.days, "day filter a..b");
  infer->add_option("--bid-lower-scale", infer_opt.lower_scale,
                    "l_i as a multiple of the AD's mean logged bid");
  infer->add_option("--bid-upper-scale", infer_opt.upper_scale,
                    "u_i as a multiple of the AD's mean logged bid");
  infer->add_option("--out", infer_opt.out, "profiles CSV")->required();

  ReplayOptions replay_opt;
  CLI::App* replay = app.add_subcommand("replay", "evaluate one AD's policy");
  replay->add_option("--log", replay_opt.log_path, "auction log")->required();
  replay->add_option("--ad", replay_opt.ad, "focal AD id")->required();
  replay->add_option("--policy", replay_opt.policy, "keyword|cia|fixed");
  replay->add_option("--tk", replay_opt.take_rate, "take-rate for cia");
  replay->add_option("--alpha", replay_opt.alpha, "cost regulation factor");
  replay->add_option("--bid", replay_opt.bid, "uniform bid for fixed");
  replay->add_option("--days", replay_opt.days, "day filter a..b");
  replay->add_option("--out", replay_opt.out, "also write the CSV here");

  CurveOptions curve_opt;
  CLI::App* curve = app.add_subcommand("curve", "sample an alpha curve");
  curve->add_option("--log", curve_opt.log_path, "auction log")->required();
  curve->add_option("--ad", curve_opt.ad, "focal AD id")->required();
  curve->add_option("--tk", curve_opt.take_rate, "take-rate")->required();
  curve->add_option("--alphas", curve_opt.alphas, "lo:hi:n geometric grid");
  curve->add_option("--days", curve_opt.days, "day filter a..b");
  curve->add_option("--out", curve_opt.out, "curve CSV")->required();

  OptimizeOptions optimize_opt;
  CLI::App* optimize =
      app.add_subcommand("optimize", "campaign-level demand optimization");
  optimize->require_subcommand(1);
  CLI::App* optimize_gmv_cmd =
      optimize->add_subcommand("gmv", "maximize campaign GMV");
  CLI::App* optimize_style_cmd =
      optimize->add_subcommand("style", "uniform-impression style comparison");
  for (CLI::App* sub : {optimize_gmv_cmd, optimize_style_cmd}) {
    sub->add_option("--log", optimize_opt.log_path, "auction log")->required();
    sub->add_option("--campaign", optimize_opt.campaign_path,
                    "campaign spec JSON")
        ->required();
    sub->add_option("--beta", optimize_opt.beta, "cost regulation parameter");
    sub->add_option("--epsilon", optimize_opt.epsilon, "permissible offset");
    sub->add_option("--k", optimize_opt.grid_size, "alpha options per AD");
    sub->add_option("--days", optimize_opt.days, "day filter a..b");
    sub->add_option("--out", optimize_opt.out, "result JSON")->required();
  }

  ExperimentOptions experiment_opt;
  CLI::App* experiment =
      app.add_subcommand("experiment", "offline evaluation harness");
  experiment->require_subcommand(1);
  CLI::App* experiment_ad = experiment->add_subcommand(
      "ad", "CIA vs keyword bidding per AD at matched cost");
  CLI::App* experiment_campaign = experiment->add_subcommand(
      "campaign", "campaign optimizers vs budget-matched baselines");
  CLI::App* experiment_platform = experiment->add_subcommand(
      "platform", "adoption sweep with interacting competition");
  for (CLI::App* sub : {experiment_ad, experiment_campaign, experiment_platform}) {
    sub->add_option("--log", experiment_opt.log_path, "auction log")->required();
    sub->add_option("--out", experiment_opt.out_dir, "output directory")
        ->required();
    sub->add_option("--seed", experiment_opt.seed, "experiment seed");
    sub->add_option("--days", experiment_opt.days, "day filter a..b");
    sub->add_option("--beta", experiment_opt.beta, "cost regulation parameter");
  }
  experiment_ad->add_option("--ads", experiment_opt.ads, "all or id,id,...");
  experiment_ad->add_option("--epsilon", experiment_opt.ad_epsilon,
                            "cost window half-width (default 0.1)");
  experiment_campaign->add_option("--campaigns", experiment_opt.campaigns_path,
                                  "campaign spec JSON (array)");
  experiment_campaign->add_option("--auto-campaigns",
                                  experiment_opt.auto_campaigns,
                                  "number of auto-built campaigns");
  experiment_campaign->add_option("--campaign-size",
                                  experiment_opt.campaign_size,
                                  "ADs per auto-built campaign");
  experiment_campaign->add_option("--bid-lower-scale", experiment_opt.lower_scale,
                                  "l_i as a multiple of the mean logged bid");
  experiment_campaign->add_option("--bid-upper-scale", experiment_opt.upper_scale,
                                  "u_i as a multiple of the mean logged bid");
  experiment_campaign->add_option("--demand", experiment_opt.demand,
                                  "gmv|style|both");
  experiment_campaign->add_option("--k", experiment_opt.grid_size,
                                  "alpha options per AD");
  experiment_campaign->add_option("--epsilon", experiment_opt.campaign_epsilon,
                                  "cost window half-width (default 0.2)");
  experiment_platform->add_option("--fractions", experiment_opt.fractions,
                                  "comma list of adoption fractions");

  try {
    app.parse(argc, argv);

    if (generate->parsed()) {
      run_generate(generate_opt);
    } else if (stationarity->parsed()) {
      run_stationarity(stationarity_opt);
    } else if (infer->parsed()) {
      run_infer(infer_opt);
    } else if (replay->parsed()) {
      run_replay(replay_opt);
    } else if (curve->parsed()) {
      run_curve(curve_opt);
    } else if (optimize->parsed()) {
      run_optimize(optimize_opt,
                   optimize_gmv_cmd->parsed() ? cia::Demand::kGmv
                                              : cia::Demand::kStyle,
                   global);
    } else if (experiment->parsed()) {
      if (experiment_ad->parsed()) {
        run_experiment_ad(experiment_opt);
      } else if (experiment_campaign->parsed()) {
        run_experiment_campaign(experiment_opt, global);
      } else {
        run_experiment_platform(experiment_opt);
      }
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << "error kind=Config code=2 module=cli name=UsageError "
                 "message=\""
              << e.what() << "\"\n";
    return 2;
  } catch (const cia::Error& e) {
    const int code = exit_code_for(e);
    const char* kind = e.kind() == cia::ErrorKind::kConfig   ? "Config"
                       : e.kind() == cia::ErrorKind::kData   ? "Data"
                                                             : "Infeasible";
    std::cerr << "error kind=" << kind << " code=" << code
              << " module=" << e.module_name() << " name=" << e.name()
              << " message=\"" << e.what() << "\"\n";
    return code;
  } catch (const std::exception& e) {
    std::cerr << "error kind=Data code=3 module=cli name=Unexpected message=\""
              << e.what() << "\"\n";
    return 3;
  }
}
