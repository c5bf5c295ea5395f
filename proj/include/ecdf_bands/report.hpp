#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecdf_bands/bands_single.hpp"
#include "ecdf_bands/transform.hpp"

namespace ecdfb {

enum class PlotKind { ecdf, ecdf_diff, rank_hist };

const char* to_string(PlotKind kind) noexcept;

/// Bands and per-chain series on the ECDF scale at the grid points, optionally shifted by -z_i.
struct PlotData {
  std::vector<double> z;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::vector<double>> series;
  bool difference = false;
};

PlotData plot_data(const ConfidenceBands& bands, const std::vector<EcdfTrajectory>& trajectories);

/// Subtracts z_i from every band limit and series value.
PlotData diff_transform(const ConfidenceBands& bands,
                        const std::vector<EcdfTrajectory>& trajectories);

/// Bin counts over right-closed equal-width bins of [0, 1] with a per-bin binomial interval.
struct RankHistogram {
  long bins = 0;
  std::vector<long> heights;
  long lower = 0;
  long upper = 0;
  double expected = 0.0;
};

RankHistogram rank_hist(std::span<const double> values, long bins, double alpha, long expected_total);

struct PlotSpec {
  PlotKind kind = PlotKind::ecdf_diff;
  std::optional<ConfidenceBands> bands;
  std::vector<EcdfTrajectory> trajectories;
  std::optional<RankHistogram> histogram;
  std::vector<std::string> labels;
  std::string title;
};

/// Deterministic 600x400 SVG; identical specs give byte-identical documents.
std::string render_svg(const PlotSpec& spec);

/// JSON export of the plotted data (schema plot-data/1).
std::string plot_json(const PlotSpec& spec);

}  // namespace ecdfb
