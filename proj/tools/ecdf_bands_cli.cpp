#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ecdf_bands/bands_multi.hpp"
#include "ecdf_bands/error.hpp"
#include "ecdf_bands/gamma_cache.hpp"
#include "ecdf_bands/io.hpp"
#include "ecdf_bands/power.hpp"
#include "ecdf_bands/report.hpp"
#include "ecdf_bands/thinning.hpp"

using namespace ecdfb;

namespace {

constexpr int kInside = 0;
constexpr int kRejected = 1;
constexpr int kFailure = 2;

struct RunConfig {
  double alpha = 0.05;
  std::string method = "auto";
  long m_reps = 10000;
  std::uint64_t seed = 0;
  long grid_k = 100;
  std::string tie_policy = "deterministic";
  std::string strategy = "BULK_TAIL_MIN";
  std::string out;
  int threads = 0;
};

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    io::write_file(path, content);
  }
}

std::optional<GammaGrid> load_cache() {
  const char* path = std::getenv("ECDF_BANDS_CACHE");
  if (path == nullptr || *path == '\0') return std::nullopt;
  return GammaGrid::load(path);
}

BandMethod band_method(const std::string& name) {
  if (name == "auto" || name == "cache") return BandMethod::automatic;
  if (name == "simulate") return BandMethod::simulate;
  if (name == "optimize") return BandMethod::optimize;
  throw Error(ErrorCode::invalid_params, "unknown method '" + name + "'");
}

TiePolicy tie_policy(const std::string& name) {
  if (name == "deterministic") return TiePolicy::deterministic;
  if (name == "random") return TiePolicy::random;
  throw Error(ErrorCode::invalid_params, "unknown tie policy '" + name + "'");
}

void check_cli_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw Error(ErrorCode::invalid_alpha, "--alpha must lie in (0, 0.5]");
}

struct Loaded {
  io::Columns columns;
  std::optional<long> resolution;
};

Loaded load_input(const std::string& path) {
  const std::string text = io::read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool ndjson = path.ends_with(".ndjson") || path.ends_with(".jsonl") ||
                      (first != std::string::npos && text[first] == '{');
  if (ndjson) return {io::parse_ndjson(text), std::nullopt};
  return {io::parse_csv(text), io::parse_resolution(text)};
}

// Runs the single- or multi-sample test as the column count dictates.
struct Outcome {
  bool inside = true;
  std::string json;
  PlotSpec plot;
};

Outcome run_test(const Loaded& input, const RunConfig& cfg, std::optional<long> resolution,
                 PlotKind kind) {
  check_cli_alpha(cfg.alpha);
  const auto cache = load_cache();
  const GammaGrid* cache_ptr = cache ? &*cache : nullptr;
  if (cfg.method == "cache" && cache_ptr == nullptr) {
    throw Error(ErrorCode::missing_slice, "--method cache needs ECDF_BANDS_CACHE to name a gamma grid");
  }
  Outcome out;
  out.plot.kind = kind;
  if (input.columns.size() == 1) {
    PitValues pit{input.columns.front(), resolution ? resolution : input.resolution};
    SingleTestOptions opt;
    opt.alpha = cfg.alpha;
    opt.method = band_method(cfg.method);
    opt.k_max = cfg.grid_k;
    opt.replicates = cfg.m_reps;
    opt.seed = cfg.seed;
    opt.cache = cache_ptr;
    const long n = static_cast<long>(pit.values.size());
    if (cfg.method == "cache" &&
        !cached_gamma(cache_ptr, n, 1, cfg.alpha, default_grid(n, pit.resolution, cfg.grid_k), cfg.grid_k)) {
      throw Error(ErrorCode::out_of_range, "the gamma cache does not cover this sample");
    }
    const auto report = test_single(pit, opt);
    out.inside = report.inside;
    out.json = io::report_json(report, cfg.alpha);
    out.plot.bands = report.bands;
    out.plot.trajectories.push_back(report.trajectory);
    out.plot.labels.push_back("sample");
    return out;
  }
  const ChainSet chains(input.columns);
  MultiTestOptions opt;
  opt.alpha = cfg.alpha;
  opt.method = band_method(cfg.method);
  opt.k_max = cfg.grid_k;
  opt.tie = {tie_policy(cfg.tie_policy), cfg.seed};
  opt.replicates = cfg.m_reps;
  opt.seed = cfg.seed;
  opt.cache = cache_ptr;
  const long n = static_cast<long>(chains.length());
  const long l = static_cast<long>(chains.chain_count());
  if (cfg.method == "cache" &&
      !cached_gamma(cache_ptr, n, l, cfg.alpha, default_grid(n, std::nullopt, cfg.grid_k), cfg.grid_k)) {
    throw Error(ErrorCode::out_of_range, "the gamma cache does not cover these chains");
  }
  const auto report = test_multi(chains, opt);
  out.inside = report.inside;
  out.json = io::report_json(report, cfg.alpha);
  out.plot.bands = report.bands;
  for (std::size_t c = 0; c < report.chains.size(); ++c) {
    out.plot.trajectories.push_back(report.chains[c].trajectory);
    out.plot.labels.push_back("chain " + std::to_string(c + 1));
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::stringstream conv(item);
    T v{};
    if (!(conv >> v)) throw Error(ErrorCode::invalid_params, "bad list element '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::invalid_params, "empty list");
  return out;
}

std::string ess_json(const EssReport& r, const ThinningPlan& plan) {
  nlohmann::ordered_json doc;
  doc["ess_mean"] = r.ess_mean;
  doc["ess_bulk"] = r.ess_bulk;
  doc["ess_tail"] = r.ess_tail;
  doc["ess_quantiles"] = r.ess_quantiles;
  doc["strategy"] = to_string(plan.strategy);
  doc["factor"] = plan.factor;
  doc["length"] = plan.length;
  return doc.dump(2) + "\n";
}

std::string columns_csv(const ChainSet& chains) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t l = 0; l < chains.chain_count(); ++l) out << (l ? "," : "") << "chain" << l + 1;
  out << "\n";
  for (std::size_t j = 0; j < chains.length(); ++j) {
    for (std::size_t l = 0; l < chains.chain_count(); ++l) out << (l ? "," : "") << chains[l][j];
    out << "\n";
  }
  return out.str();
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "Significance level in (0, 0.5]");
  cmd->add_option("--method", cfg.method, "auto | simulate | optimize | cache");
  cmd->add_option("--m-reps", cfg.m_reps, "Monte Carlo replicates");
  cmd->add_option("--seed", cfg.seed, "Random seed");
  cmd->add_option("--grid-k", cfg.grid_k, "Maximum number of evaluation points");
  cmd->add_option("--tie-policy", cfg.tie_policy, "deterministic | random");
  cmd->add_option("--out", cfg.out, "Output path (default: stdout)");
  cmd->add_option("--threads", cfg.threads, "Worker threads (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simultaneous ECDF confidence bands for uniformity and multi-chain tests"};
  app.require_subcommand(1);
  RunConfig cfg;

  std::string input;
  std::optional<long> resolution;
  std::string svg_path;
  auto* test = app.add_subcommand("test", "Test PIT values (one column) or chains (several columns)");
  add_common(test, cfg);
  test->add_option("input", input, "CSV or NDJSON input")->required();
  test->add_option("--resolution", resolution, "Discrete PIT resolution S");
  test->add_option("--svg", svg_path, "Also write an ECDF difference plot");

  std::string draws_path, comparison_path;
  auto* pit = app.add_subcommand("pit", "Empirical PIT of draws against comparison samples");
  add_common(pit, cfg);
  pit->add_option("draws", draws_path, "One-column file of draws y_i")->required();
  pit->add_option("comparison", comparison_path, "File whose column i is the comparison sample of draw i")
      ->required();

  PowerOptions power_opt;
  std::string power_test = "bands", family = "A", ks_text = "0.2,0.5,0.8,1,1.25,1.5,2,3";
  auto* power = app.add_subcommand("power", "Rejection rates under a transformation family");
  add_common(power, cfg);
  power->add_option("--test", power_test, "bands | T1 | W2 | U2 | KS");
  power->add_option("--family", family, "A | B | C");
  power->add_option("--ks", ks_text, "Comma-separated powers k");
  power->add_option("--n", power_opt.n, "Sample size");
  power->add_option("--chains", power_opt.chains, "Chains (first chain transformed)");

  std::string report_path;
  auto* thin_cmd = app.add_subcommand("thin", "ESS report and thinning of autocorrelated chains");
  add_common(thin_cmd, cfg);
  thin_cmd->add_option("input", input, "Chains file")->required();
  thin_cmd->add_option("--strategy", cfg.strategy, "MEAN_ESS | QUANTILE_19 | BULK_TAIL_MIN | TAIL_ESS");
  thin_cmd->add_option("--report", report_path, "ESS report JSON path (default: stdout)");

  auto* gamma = app.add_subcommand("gamma", "Build or query precomputed gamma grids");
  gamma->require_subcommand(1);
  std::string ns_text = "50,100,200,400,800", ls_text = "1", alphas_text = "0.05";
  auto* build = gamma->add_subcommand("build", "Precompute a gamma grid");
  add_common(build, cfg);
  build->add_option("--ns", ns_text, "Comma-separated sample sizes");
  build->add_option("--ls", ls_text, "Comma-separated chain counts");
  build->add_option("--alphas", alphas_text, "Comma-separated levels");
  long query_n = 100, query_l = 1;
  std::string cache_path;
  auto* query = gamma->add_subcommand("query", "Look up or compute gamma for (N, L, alpha)");
  add_common(query, cfg);
  query->add_option("--n", query_n, "Sample size")->required();
  query->add_option("--l", query_l, "Chain count");
  query->add_option("--cache", cache_path, "Gamma grid file (default: ECDF_BANDS_CACHE)");

  std::string kind_text = "ecdf_diff", plot_json_path;
  long bins = 20;
  std::size_t hist_chain = 0;
  auto* plot = app.add_subcommand("plot", "Render bands and ECDFs (or a rank histogram) as SVG");
  add_common(plot, cfg);
  plot->add_option("input", input, "CSV or NDJSON input")->required();
  plot->add_option("--kind", kind_text, "ecdf | ecdf_diff | rank_hist");
  plot->add_option("--json", plot_json_path, "Also write plot data JSON");
  plot->add_option("--bins", bins, "Histogram bins");
  plot->add_option("--chain", hist_chain, "Chain shown in a rank histogram (0-based)");
  plot->add_option("--resolution", resolution, "Discrete PIT resolution S");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kFailure;
  }
  if (cfg.threads > 0) omp_set_num_threads(cfg.threads);

  try {
    if (test->parsed()) {
      const auto outcome = run_test(load_input(input), cfg, resolution, PlotKind::ecdf_diff);
      emit(cfg.out, outcome.json);
      if (!svg_path.empty()) io::write_file(svg_path, render_svg(outcome.plot));
      std::cerr << (outcome.inside ? "inside bands\n" : "outside bands\n");
      return outcome.inside ? kInside : kRejected;
    }
    if (pit->parsed()) {
      const auto draws = load_input(draws_path).columns;
      if (draws.size() != 1) throw Error(ErrorCode::invalid_params, "draws file must have one column");
      const auto comparison = load_input(comparison_path).columns;
      const auto u = empirical_pit(draws.front(), comparison);
      std::ostringstream csv;
      csv.precision(17);
      if (u.resolution) csv << "# resolution=" << *u.resolution << "\n";
      csv << "u\n";
      for (double v : u.values) csv << v << "\n";
      emit(cfg.out, csv.str());
      return kInside;
    }
    if (power->parsed()) {
      check_cli_alpha(cfg.alpha);
      power_opt.test = power_test_from_string(power_test);
      power_opt.family = family_from_string(family);
      power_opt.ks = parse_list<double>(ks_text);
      power_opt.alpha = cfg.alpha;
      power_opt.replicates = cfg.m_reps;
      power_opt.calibration_replicates = cfg.m_reps;
      power_opt.seed = cfg.seed;
      power_opt.k_max = cfg.grid_k;
      const auto curve = power_sweep(power_opt);
      std::ostringstream csv;
      csv << "k,rate,se\n";
      for (std::size_t i = 0; i < curve.ks.size(); ++i) {
        char line[96];
        std::snprintf(line, sizeof line, "%g,%.6f,%.6f\n", curve.ks[i], curve.rates[i], curve.std_errors[i]);
        csv << line;
      }
      emit(cfg.out, csv.str());
      return kInside;
    }
    if (thin_cmd->parsed()) {
      const ChainSet chains(load_input(input).columns);
      const auto report = ess_report(chains);
      const auto plan = thinning_factor(report, static_cast<long>(chains.total()),
                                        static_cast<long>(chains.length()), strategy_from_string(cfg.strategy));
      if (!cfg.out.empty()) io::write_file(cfg.out, columns_csv(thin(chains, plan.factor)));
      emit(report_path, ess_json(report, plan));
      return kInside;
    }
    if (build->parsed()) {
      GridBuildOptions opt;
      opt.k_max = cfg.grid_k;
      opt.replicates = cfg.m_reps;
      opt.seed = cfg.seed;
      const auto grid = build_grid(parse_list<long>(ns_text), parse_list<long>(ls_text),
                                   parse_list<double>(alphas_text), opt);
      emit(cfg.out, grid.to_json());
      return kInside;
    }
    if (query->parsed()) {
      check_cli_alpha(cfg.alpha);
      std::optional<GammaGrid> cache = cache_path.empty() ? load_cache() : GammaGrid::load(cache_path);
      GammaResult g;
      if (cache) {
        g = interpolate(*cache, query_n, query_l, cfg.alpha, cfg.grid_k);
      } else {
        const auto grid = default_grid(query_n, std::nullopt, cfg.grid_k);
        if (query_l == 1) {
          g = cfg.method == "simulate" ? gamma_simulate(query_n, grid, cfg.alpha, cfg.m_reps, cfg.seed)
                                       : gamma_optimize(query_n, grid, cfg.alpha);
        } else {
          g = multi_bands(query_n, query_l, grid, cfg.alpha, band_method(cfg.method), cfg.m_reps, cfg.seed)
                  .gamma;
        }
      }
      nlohmann::ordered_json doc;
      doc["n"] = query_n;
      doc["l"] = query_l;
      doc["alpha"] = cfg.alpha;
      doc["gamma"] = g.gamma;
      doc["method"] = to_string(g.method);
      if (g.attained_coverage > 0.0) doc["coverage"] = g.attained_coverage;
      emit(cfg.out, doc.dump(2) + "\n");
      return kInside;
    }
    if (plot->parsed()) {
      const auto loaded = load_input(input);
      PlotSpec spec;
      if (kind_text == "rank_hist") {
        std::vector<double> values;
        if (loaded.columns.size() == 1) {
          values = loaded.columns.front();
        } else {
          const auto ranks = joint_fractional_ranks(ChainSet(loaded.columns), {tie_policy(cfg.tie_policy), cfg.seed});
          if (hist_chain >= ranks.size()) throw Error(ErrorCode::invalid_params, "--chain out of range");
          values = ranks[hist_chain];
        }
        check_cli_alpha(cfg.alpha);
        spec.kind = PlotKind::rank_hist;
        spec.histogram = rank_hist(values, bins, cfg.alpha, static_cast<long>(values.size()));
      } else {
        const PlotKind kind = kind_text == "ecdf" ? PlotKind::ecdf : PlotKind::ecdf_diff;
        if (kind_text != "ecdf" && kind_text != "ecdf_diff") {
          throw Error(ErrorCode::invalid_params, "unknown plot kind '" + kind_text + "'");
        }
        spec = run_test(loaded, cfg, resolution, kind).plot;
      }
      emit(cfg.out, render_svg(spec));
      if (!plot_json_path.empty()) io::write_file(plot_json_path, plot_json(spec));
      return kInside;
    }
  } catch (const Error& e) {
    std::cerr << "ecdf-bands: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "ecdf-bands: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
