#include "huberfdr/report.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/normal.hpp"
#include "huberfdr/stats.hpp"

namespace huberfdr {

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Eigen::VectorXd grid_values(const GridSpec& grid) {
  if (grid.n < 2 || !(grid.lo < grid.hi)) {
    throw std::invalid_argument("GridSpec: need n >= 2 and lo < hi");
  }
  return Eigen::VectorXd::LinSpaced(grid.n, grid.lo, grid.hi);
}

}  // namespace

const char* series_kind_name(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::histogram: return "histogram";
    case SeriesKind::density_curve: return "density_curve";
    case SeriesKind::qq_pairs: return "qq_pairs";
    case SeriesKind::fdr_curve: return "fdr_curve";
    case SeriesKind::f1_curve: return "f1_curve";
  }
  return "unknown";
}

Eigen::Index CallTable::n_called() const {
  return static_cast<Eigen::Index>(
      std::count_if(rows.begin(), rows.end(),
                    [](const CallRow& r) { return r.called; }));
}

GridSpec GridSpec::around(const HuberParams& p, int n) {
  GridSpec g;
  g.n = n;
  g.lo = p.mu0 - 6.0 * p.sigma0 * std::max(1.0, p.ka / 1.5);
  g.hi = p.mu0 + 6.0 * p.sigma0 * std::max(1.0, p.kb / 1.5);
  return g;
}

std::pair<PlotSeries, PlotSeries> qq_points(const ZData& data,
                                            const HuberParams& p) {
  if (data.n() < 1) {
    throw std::invalid_argument("qq_points: need at least one z-value");
  }
  std::vector<double> sorted(data.values.data(),
                             data.values.data() + data.n());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());

  PlotSeries huber;
  huber.kind = SeriesKind::qq_pairs;
  huber.meta = {{"model", "huber"}, {"reference", "y=x"}};
  PlotSeries normal;
  normal.kind = SeriesKind::qq_pairs;
  normal.meta = {{"model", "normal"}, {"reference", "y=x"}};

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double q = (static_cast<double>(i) + 0.5) / n;
    huber.points.emplace_back(quantile(q, p), sorted[i]);
    normal.points.emplace_back(p.mu0 + p.sigma0 * norm_quantile(q), sorted[i]);
  }
  return {std::move(huber), std::move(normal)};
}

PlotSeries fdr_curve(const HuberParams& p, const GridSpec& grid,
                     const NumericPolicy& policy) {
  const Eigen::VectorXd xs = grid_values(grid);
  PlotSeries s;
  s.kind = SeriesKind::fdr_curve;
  s.meta = {{"mu0", format_number(p.mu0)},
            {"core_lo", format_number(p.mu0 - p.sigma0 * p.ka)},
            {"core_hi", format_number(p.mu0 + p.sigma0 * p.kb)}};
  s.points.reserve(static_cast<std::size_t>(xs.size()));
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    s.points.emplace_back(xs(i), fdr_local(xs(i), p, policy));
  }
  return s;
}

PlotSeries f1_curve(const HuberParams& p, const GridSpec& grid,
                    const NumericPolicy& policy) {
  PlotSeries s;
  s.kind = SeriesKind::f1_curve;
  if (left_tail_vanished(p, policy) && right_tail_vanished(p, policy)) {
    s.meta = {{"empty_reason", "p0 = 1: no alternative component"}};
    return s;
  }
  const double alt_mass = null_proportion_complement(p.ka, p.kb);
  // Points carry raw f1; scale by alt_mass to overlay on the marginal.
  s.meta = {{"alt_mass", format_number(alt_mass)}, {"scale", "raw"}};
  const Eigen::VectorXd xs = grid_values(grid);
  s.points.reserve(static_cast<std::size_t>(xs.size()));
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    s.points.emplace_back(xs(i), alt_density(xs(i), p, policy));
  }
  return s;
}

CallTable call_nonnull(const ZData& data, const HuberParams& p,
                       double threshold, const NumericPolicy& policy) {
  CallTable table;
  table.threshold = threshold;
  table.rows.reserve(static_cast<std::size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double z = data.values(i);
    const double f = fdr_local(z, p, policy);
    table.rows.push_back({i + 1, z, f, f < threshold});
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [&](const CallRow& a, const CallRow& b) {
              if (a.fdr != b.fdr) return a.fdr < b.fdr;
              const double ua = std::abs(standardize(a.z, p).u);
              const double ub = std::abs(standardize(b.z, p).u);
              if (ua != ub) return ua > ub;
              return a.index < b.index;
            });
  return table;
}

PlotSeries histogram_series(const ZData& data, int bins) {
  if (bins < 5) {
    throw std::invalid_argument("histogram_series: need at least 5 bins");
  }
  if (data.n() < 1) {
    throw std::invalid_argument("histogram_series: empty data");
  }
  double lo = data.values.minCoeff();
  double hi = data.values.maxCoeff();
  if (!(lo < hi)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double w = (hi - lo) / bins;
  std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    auto b = static_cast<std::ptrdiff_t>((data.values(i) - lo) / w);
    b = std::clamp<std::ptrdiff_t>(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)] += 1.0;
  }
  PlotSeries s;
  s.kind = SeriesKind::histogram;
  s.meta = {{"bin_width", format_number(w)},
            {"lo", format_number(lo)},
            {"hi", format_number(hi)},
            {"n", std::to_string(data.n())}};
  const double denom = static_cast<double>(data.n()) * w;
  for (int b = 0; b < bins; ++b) {
    const double center = lo + (b + 0.5) * w;
    s.points.emplace_back(center, counts[static_cast<std::size_t>(b)] / denom);
  }
  return s;
}

int default_bin_count(const ZData& data) {
  if (data.n() < 2) return 20;
  std::vector<double> sorted(data.values.data(),
                             data.values.data() + data.n());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = interpolated_quantile_sorted(sorted, 0.75) -
                     interpolated_quantile_sorted(sorted, 0.25);
  const double range = sorted.back() - sorted.front();
  int bins;
  if (iqr > 0.0 && range > 0.0) {
    const double h =
        2.0 * iqr / std::cbrt(static_cast<double>(data.n()));
    bins = static_cast<int>(std::ceil(range / h));
  } else {
    bins = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(data.n()))));
  }
  return std::clamp(bins, 20, 120);
}

PlotSeries density_curve(const HuberParams& p, const GridSpec& grid) {
  const Eigen::VectorXd xs = grid_values(grid);
  PlotSeries s;
  s.kind = SeriesKind::density_curve;
  s.meta = {{"p0", format_number(null_proportion(p.ka, p.kb))}};
  s.points.reserve(static_cast<std::size_t>(xs.size()));
  for (Eigen::Index i = 0; i < xs.size(); ++i) {
    s.points.emplace_back(xs(i), density(xs(i), p));
  }
  return s;
}

ReportBundle build_report(const ZData& data, const HuberParams& params,
                          const ReportOptions& options) {
  validate(params, options.policy);
  ReportBundle bundle;
  bundle.label = data.label;
  bundle.params = params;
  bundle.boundary = left_tail_vanished(params, options.policy) &&
                    right_tail_vanished(params, options.policy);
  const int bins = options.bins > 0 ? options.bins : default_bin_count(data);
  const GridSpec grid = GridSpec::around(params, options.grid_points);
  bundle.histogram = histogram_series(data, bins);
  bundle.density = density_curve(params, grid);
  auto qq = qq_points(data, params);
  bundle.qq_huber = std::move(qq.first);
  bundle.qq_normal = std::move(qq.second);
  bundle.fdr = fdr_curve(params, grid, options.policy);
  bundle.f1 = f1_curve(params, grid, options.policy);
  bundle.calls = call_nonnull(data, params, options.threshold, options.policy);
  return bundle;
}

}  // namespace huberfdr
