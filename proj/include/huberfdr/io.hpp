#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "huberfdr/mcmc.hpp"
#include "huberfdr/mle_fit.hpp"
#include "huberfdr/regression.hpp"
#include "huberfdr/report.hpp"
#include "huberfdr/zdata.hpp"

namespace huberfdr {

using json = nlohmann::ordered_json;

// One value per line; '#' comments and blank lines skipped.  A leading
// non-numeric line is accepted as a single-column CSV header.  Parse
// errors name the offending line; an empty file is an error.  The dataset
// label is the file stem.
ZData read_zdata(const std::string& path);

// CSV with a header row.  The response column becomes y, all remaining
// columns become X (with a prepended intercept column unless
// add_intercept is false).  Errors name the row and column.
RegressionData read_regression_csv(const std::string& path,
                                   const std::string& response,
                                   bool add_intercept = true);

// Envelope for every structured result the CLI emits.
struct ResultDocument {
  std::string schema_version = "1";
  std::string label;
  std::string kind;
  json payload;

  bool operator==(const ResultDocument&) const = default;
};

std::string serialize(const ResultDocument& doc);
ResultDocument parse_document(const std::string& text);

// Plain key/value rendering of a document for --format text.
std::string render_text(const ResultDocument& doc);

void to_json(json& j, const StdErrors& se);
void from_json(const json& j, StdErrors& se);
void to_json(json& j, const FitResult& fit);
void from_json(const json& j, FitResult& fit);
void to_json(json& j, const LrtResult& lrt);
void from_json(const json& j, LrtResult& lrt);
void to_json(json& j, const ParamInterval& iv);
void from_json(const json& j, ParamInterval& iv);
void to_json(json& j, const IntervalTable& t);
void from_json(const json& j, IntervalTable& t);
void to_json(json& j, const ParamSummary& s);
void from_json(const json& j, ParamSummary& s);
void to_json(json& j, const PosteriorSummary& s);
void from_json(const json& j, PosteriorSummary& s);

ResultDocument make_fit_document(const std::string& label,
                                 const FitResult& fit);
ResultDocument make_lrt_document(const std::string& label,
                                 const LrtResult& lrt);
ResultDocument make_intervals_document(const std::string& label,
                                       const IntervalTable& table);
ResultDocument make_posterior_document(const std::string& label,
                                       const PosteriorSummary& summary,
                                       const PosteriorChain& chain,
                                       Eigen::Index iters);
ResultDocument make_regression_document(
    const std::string& label, const RegressionFit& fit,
    const std::vector<std::string>& column_names);
ResultDocument make_fdr_document(const std::string& label,
                                 const HuberParams& params,
                                 const CallTable& table);

// Shortest representation that parses back to the same double.
std::string format_double(double v);

void write_series_csv(const PlotSeries& series, std::ostream& out);
void write_calls_csv(const CallTable& table, std::ostream& out);
void write_chain_csv(const PosteriorChain& chain, std::ostream& out);
void write_zdata_lines(const Eigen::VectorXd& values, std::ostream& out);

std::string render_report_svg(const ReportBundle& bundle);

// Writes through a temp file in the target directory and renames, so an
// interrupted or failed write never leaves a partial file at the target.
void atomic_write_file(const std::filesystem::path& target,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace huberfdr
