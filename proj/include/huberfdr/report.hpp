#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "huberfdr/huber_params.hpp"
#include "huberfdr/zdata.hpp"

namespace huberfdr {

enum class SeriesKind { histogram, density_curve, qq_pairs, fdr_curve, f1_curve };

const char* series_kind_name(SeriesKind kind);

// One plottable series: (x, y) pairs with x strictly increasing, plus
// free-form metadata emitted as comment lines in the CSV export.
struct PlotSeries {
  SeriesKind kind = SeriesKind::density_curve;
  std::vector<std::pair<double, double>> points;
  std::vector<std::pair<std::string, std::string>> meta;
};

struct CallRow {
  Eigen::Index index = 0;  // 1-based position in the input data
  double z = 0.0;
  double fdr = 1.0;
  bool called = false;
};

// Per-observation fdr values sorted by fdr ascending, ties broken by
// |standardized z| descending, then by index.
struct CallTable {
  std::vector<CallRow> rows;
  double threshold = 0.2;

  Eigen::Index n_called() const;
};

struct GridSpec {
  double lo = -6.0;
  double hi = 6.0;
  int n = 512;

  // Default window: 6 sigma either side, stretched when a knot exceeds 1.5
  // so the exponential tails stay visible.
  static GridSpec around(const HuberParams& p, int n = 512);
};

// QQ pairs of the sorted data against the fitted Huber quantiles, and a
// companion series against the naive N(mu0, sigma0^2) quantiles.
// Plotting positions are (i - 0.5)/n.
std::pair<PlotSeries, PlotSeries> qq_points(const ZData& data,
                                            const HuberParams& p);

PlotSeries fdr_curve(const HuberParams& p, const GridSpec& grid,
                     const NumericPolicy& policy = {});

// Alternative density on the grid.  Empty (with an explanatory meta entry)
// when both knots sit at the boundary; meta carries the (1 - p0) overlay
// scale otherwise.
PlotSeries f1_curve(const HuberParams& p, const GridSpec& grid,
                    const NumericPolicy& policy = {});

CallTable call_nonnull(const ZData& data, const HuberParams& p,
                       double threshold = 0.2,
                       const NumericPolicy& policy = {});

// Density-normalized histogram (bin masses sum to 1).  Requires bins >= 5.
PlotSeries histogram_series(const ZData& data, int bins);

// Freedman-Diaconis rule clamped to [20, 120].
int default_bin_count(const ZData& data);

PlotSeries density_curve(const HuberParams& p, const GridSpec& grid);

struct ReportOptions {
  int bins = 0;  // 0: Freedman-Diaconis default
  double threshold = 0.2;
  int grid_points = 512;
  NumericPolicy policy;
};

// Everything behind the four-panel summary: histogram with the fitted
// marginal, the two QQ series, the fdr curve, the f1 curve and the calls.
struct ReportBundle {
  std::string label;
  HuberParams params;
  bool boundary = false;  // both tails vanished
  PlotSeries histogram;
  PlotSeries density;
  PlotSeries qq_huber;
  PlotSeries qq_normal;
  PlotSeries fdr;
  PlotSeries f1;
  CallTable calls;
};

ReportBundle build_report(const ZData& data, const HuberParams& params,
                          const ReportOptions& options = {});

}  // namespace huberfdr
