#include "huberfdr/io.hpp"

#include <unistd.h>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace huberfdr {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, delim)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

// Locale-independent, whole-token parse ('.' decimal point only).
bool parse_double_strict(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;  // from_chars rejects an explicit plus
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

ZData read_zdata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_zdata: cannot open " + path);
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    std::vector<std::string> fields = split_fields(content, ',');
    while (fields.size() > 1 && fields.back().empty()) fields.pop_back();
    if (fields.size() > 1) {
      throw std::runtime_error("read_zdata: expected a single column at line " +
                               std::to_string(lineno) + " of " + path);
    }
    const std::string token = fields.empty() ? content : fields.front();
    double v = 0.0;
    if (parse_double_strict(token, v)) {
      values.push_back(v);
      header_allowed = false;
    } else if (header_allowed) {
      header_allowed = false;  // single-column CSV header
    } else {
      throw std::runtime_error("read_zdata: non-numeric value '" + token +
                               "' at line " + std::to_string(lineno) + " of " +
                               path);
    }
  }
  if (values.empty()) {
    throw std::runtime_error("read_zdata: no z-values found in " + path);
  }
  Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(
      values.data(), static_cast<Eigen::Index>(values.size()));
  return ZData(std::move(v), fs::path(path).stem().string());
}

RegressionData read_regression_csv(const std::string& path,
                                   const std::string& response,
                                   bool add_intercept) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_regression_csv: cannot open " + path);

  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    header = split_fields(content, ',');
    for (std::string& name : header) name = strip_quotes(name);
    break;
  }
  if (header.empty()) {
    throw std::runtime_error("read_regression_csv: no header row in " + path);
  }

  std::ptrdiff_t response_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == response) {
      response_idx = static_cast<std::ptrdiff_t>(i);
      break;
    }
  }
  if (response_idx < 0) {
    std::ostringstream os;
    os << "read_regression_csv: response column '" << response
       << "' not found; available columns:";
    for (const std::string& name : header) os << ' ' << name;
    throw std::runtime_error(os.str());
  }

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#') continue;
    const std::vector<std::string> fields = split_fields(content, ',');
    if (fields.size() != header.size()) {
      throw std::runtime_error(
          "read_regression_csv: line " + std::to_string(lineno) + " has " +
          std::to_string(fields.size()) + " fields, expected " +
          std::to_string(header.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!parse_double_strict(fields[c], row[c])) {
        throw std::runtime_error("read_regression_csv: non-numeric value '" +
                                 fields[c] + "' at line " +
                                 std::to_string(lineno) + ", column '" +
                                 header[c] + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error("read_regression_csv: no data rows in " + path);
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto n_pred = static_cast<Eigen::Index>(header.size()) - 1;
  const Eigen::Index p = n_pred + (add_intercept ? 1 : 0);
  Eigen::VectorXd y(n);
  Eigen::MatrixXd X(n, p);
  std::vector<std::string> names;
  if (add_intercept) {
    X.col(0).setOnes();
    names.push_back("(intercept)");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = rows[static_cast<std::size_t>(i)]
               [static_cast<std::size_t>(response_idx)];
  }
  Eigen::Index col = add_intercept ? 1 : 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (static_cast<std::ptrdiff_t>(c) == response_idx) continue;
    for (Eigen::Index i = 0; i < n; ++i) {
      X(i, col) = rows[static_cast<std::size_t>(i)][c];
    }
    names.push_back(header[c]);
    ++col;
  }
  return RegressionData(std::move(X), std::move(y), std::move(names));
}

std::string serialize(const ResultDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["label"] = doc.label;
  j["kind"] = doc.kind;
  j["payload"] = doc.payload;
  return j.dump(2) + "\n";
}

ResultDocument parse_document(const std::string& text) {
  const json j = json::parse(text);
  ResultDocument doc;
  doc.schema_version = j.at("schema_version").get<std::string>();
  if (doc.schema_version != "1") {
    throw std::runtime_error("parse_document: unsupported schema_version " +
                             doc.schema_version);
  }
  doc.label = j.at("label").get<std::string>();
  doc.kind = j.at("kind").get<std::string>();
  doc.payload = j.at("payload");
  return doc;
}

namespace {

void render_json_text(const json& j, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      out << pad << key << ":\n";
      render_json_text(value, out, indent + 1);
    } else if (value.is_array()) {
      if (value.size() > 12) {
        out << pad << key << ": [" << value.size() << " entries]\n";
      } else {
        out << pad << key << ": " << value.dump() << "\n";
      }
    } else if (value.is_string()) {
      out << pad << key << ": " << value.get<std::string>() << "\n";
    } else {
      out << pad << key << ": " << value.dump() << "\n";
    }
  }
}

}  // namespace

std::string render_text(const ResultDocument& doc) {
  std::ostringstream os;
  os << "kind: " << doc.kind << "\n";
  os << "label: " << doc.label << "\n";
  render_json_text(doc.payload, os, 0);
  return os.str();
}

void to_json(json& j, const StdErrors& se) {
  j = json{{"mu0", se.mu0},
           {"sigma0", se.sigma0},
           {"ka", se.ka},
           {"kb", se.kb},
           {"p0", se.p0}};
}

void from_json(const json& j, StdErrors& se) {
  j.at("mu0").get_to(se.mu0);
  j.at("sigma0").get_to(se.sigma0);
  j.at("ka").get_to(se.ka);
  j.at("kb").get_to(se.kb);
  j.at("p0").get_to(se.p0);
}

void to_json(json& j, const FitResult& fit) {
  j = json{{"mu0", fit.params.mu0},
           {"sigma0", fit.params.sigma0},
           {"ka", fit.params.ka},
           {"kb", fit.params.kb},
           {"p0", fit.p0},
           {"loglik", fit.loglik},
           {"symmetric", fit.symmetric},
           {"converged", fit.converged},
           {"boundary_ka", fit.boundary_ka},
           {"boundary_kb", fit.boundary_kb},
           {"n_restarts_used", fit.n_restarts_used},
           {"n_evaluations", fit.n_evaluations},
           {"diagnostics", fit.diagnostics}};
  if (fit.se) {
    j["se"] = *fit.se;
  } else {
    j["se"] = nullptr;
  }
}

void from_json(const json& j, FitResult& fit) {
  j.at("mu0").get_to(fit.params.mu0);
  j.at("sigma0").get_to(fit.params.sigma0);
  j.at("ka").get_to(fit.params.ka);
  j.at("kb").get_to(fit.params.kb);
  j.at("p0").get_to(fit.p0);
  j.at("loglik").get_to(fit.loglik);
  j.at("symmetric").get_to(fit.symmetric);
  j.at("converged").get_to(fit.converged);
  j.at("boundary_ka").get_to(fit.boundary_ka);
  j.at("boundary_kb").get_to(fit.boundary_kb);
  j.at("n_restarts_used").get_to(fit.n_restarts_used);
  j.at("n_evaluations").get_to(fit.n_evaluations);
  j.at("diagnostics").get_to(fit.diagnostics);
  if (j.at("se").is_null()) {
    fit.se.reset();
  } else {
    fit.se = j.at("se").get<StdErrors>();
  }
}

void to_json(json& j, const LrtResult& lrt) {
  j = json{{"loglik_free", lrt.loglik_free},
           {"loglik_common", lrt.loglik_common},
           {"statistic", lrt.statistic},
           {"p_value", lrt.p_value},
           {"boundary_caveat", lrt.boundary_caveat}};
}

void from_json(const json& j, LrtResult& lrt) {
  j.at("loglik_free").get_to(lrt.loglik_free);
  j.at("loglik_common").get_to(lrt.loglik_common);
  j.at("statistic").get_to(lrt.statistic);
  j.at("p_value").get_to(lrt.p_value);
  j.at("boundary_caveat").get_to(lrt.boundary_caveat);
}

void to_json(json& j, const ParamInterval& iv) {
  j = json{{"estimate", iv.estimate}, {"lo", iv.lo}, {"hi", iv.hi}};
}

void from_json(const json& j, ParamInterval& iv) {
  j.at("estimate").get_to(iv.estimate);
  j.at("lo").get_to(iv.lo);
  j.at("hi").get_to(iv.hi);
}

void to_json(json& j, const IntervalTable& t) {
  j = json{{"method", t.method},
           {"level", t.level},
           {"b_replicates", t.b_replicates},
           {"seed", t.seed},
           {"n_failed", t.n_failed},
           {"unreliable", t.unreliable},
           {"mu0", t.mu0},
           {"sigma0", t.sigma0},
           {"ka", t.ka},
           {"kb", t.kb},
           {"p0", t.p0}};
}

void from_json(const json& j, IntervalTable& t) {
  j.at("method").get_to(t.method);
  j.at("level").get_to(t.level);
  j.at("b_replicates").get_to(t.b_replicates);
  j.at("seed").get_to(t.seed);
  j.at("n_failed").get_to(t.n_failed);
  j.at("unreliable").get_to(t.unreliable);
  j.at("mu0").get_to(t.mu0);
  j.at("sigma0").get_to(t.sigma0);
  j.at("ka").get_to(t.ka);
  j.at("kb").get_to(t.kb);
  j.at("p0").get_to(t.p0);
}

void to_json(json& j, const ParamSummary& s) {
  j = json{{"mean", s.mean}, {"median", s.median}, {"lo", s.lo}, {"hi", s.hi}};
}

void from_json(const json& j, ParamSummary& s) {
  j.at("mean").get_to(s.mean);
  j.at("median").get_to(s.median);
  j.at("lo").get_to(s.lo);
  j.at("hi").get_to(s.hi);
}

void to_json(json& j, const PosteriorSummary& s) {
  j = json{{"level", s.level}, {"mu0", s.mu0},     {"sigma0", s.sigma0},
           {"ka", s.ka},       {"kb", s.kb},       {"p0", s.p0}};
}

void from_json(const json& j, PosteriorSummary& s) {
  j.at("level").get_to(s.level);
  j.at("mu0").get_to(s.mu0);
  j.at("sigma0").get_to(s.sigma0);
  j.at("ka").get_to(s.ka);
  j.at("kb").get_to(s.kb);
  j.at("p0").get_to(s.p0);
}

ResultDocument make_fit_document(const std::string& label,
                                 const FitResult& fit) {
  ResultDocument doc;
  doc.label = label;
  doc.kind = "fit";
  doc.payload = fit;
  return doc;
}

ResultDocument make_lrt_document(const std::string& label,
                                 const LrtResult& lrt) {
  ResultDocument doc;
  doc.label = label;
  doc.kind = "lrt";
  doc.payload = lrt;
  return doc;
}

ResultDocument make_intervals_document(const std::string& label,
                                       const IntervalTable& table) {
  ResultDocument doc;
  doc.label = label;
  doc.kind = "intervals";
  doc.payload = table;
  return doc;
}

ResultDocument make_posterior_document(const std::string& label,
                                       const PosteriorSummary& summary,
                                       const PosteriorChain& chain,
                                       Eigen::Index iters) {
  ResultDocument doc;
  doc.label = label;
  doc.kind = "posterior";
  doc.payload = summary;
  doc.payload["iters"] = iters;
  doc.payload["burnin"] = chain.burnin;
  doc.payload["seed"] = chain.seed;
  doc.payload["acceptance_rate"] = chain.acceptance_rate;
  doc.payload["warning"] = chain.warning;
  return doc;
}

ResultDocument make_regression_document(
    const std::string& label, const RegressionFit& fit,
    const std::vector<std::string>& column_names) {
  ResultDocument doc;
  doc.label = label;
  doc.kind = "regression";
  json beta = json::array();
  for (Eigen::Index i = 0; i < fit.beta.size(); ++i) beta.push_back(fit.beta(i));
  doc.payload = json{{"column_names", column_names},
                     {"beta", beta},
                     {"scale", fit.scale},
                     {"ka", fit.ka},
                     {"kb", fit.kb},
                     {"loglik", fit.loglik},
                     {"converged", fit.converged},
                     {"boundary_ka", fit.boundary_ka},
                     {"boundary_kb", fit.boundary_kb},
                     {"se_near_boundary", fit.se_near_boundary},
                     {"n_restarts_used", fit.n_restarts_used}};
  if (fit.se_beta) {
    json se = json::array();
    for (Eigen::Index i = 0; i < fit.se_beta->size(); ++i) {
      se.push_back((*fit.se_beta)(i));
    }
    doc.payload["se_beta"] = se;
  } else {
    doc.payload["se_beta"] = nullptr;
  }
  return doc;
}

ResultDocument make_fdr_document(const std::string& label,
                                 const HuberParams& params,
                                 const CallTable& table) {
  ResultDocument doc;
  doc.label = label;
  doc.kind = "fdr";
  json rows = json::array();
  for (const CallRow& r : table.rows) {
    rows.push_back(json{{"index", r.index},
                        {"z", r.z},
                        {"fdr", r.fdr},
                        {"called", r.called}});
  }
  doc.payload = json{{"mu0", params.mu0},
                     {"sigma0", params.sigma0},
                     {"ka", params.ka},
                     {"kb", params.kb},
                     {"p0", null_proportion(params.ka, params.kb)},
                     {"threshold", table.threshold},
                     {"n", table.rows.size()},
                     {"n_called", table.n_called()},
                     {"rows", std::move(rows)}};
  return doc;
}

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_series_csv(const PlotSeries& series, std::ostream& out) {
  out << "# kind=" << series_kind_name(series.kind) << "\n";
  for (const auto& [key, value] : series.meta) {
    out << "# " << key << "=" << value << "\n";
  }
  out << "x,y\n";
  for (const auto& [x, y] : series.points) {
    out << format_double(x) << ',' << format_double(y) << "\n";
  }
}

void write_calls_csv(const CallTable& table, std::ostream& out) {
  out << "# threshold=" << format_double(table.threshold) << "\n";
  out << "index,z,fdr,called\n";
  for (const CallRow& r : table.rows) {
    out << r.index << ',' << format_double(r.z) << ',' << format_double(r.fdr)
        << ',' << (r.called ? 1 : 0) << "\n";
  }
}

void write_chain_csv(const PosteriorChain& chain, std::ostream& out) {
  out << "iter,mu0,sigma0,ka,kb,p0\n";
  for (Eigen::Index t = 0; t < chain.draws.rows(); ++t) {
    out << (t + 1);
    for (int c = 0; c < 5; ++c) out << ',' << format_double(chain.draws(t, c));
    out << "\n";
  }
}

void write_zdata_lines(const Eigen::VectorXd& values, std::ostream& out) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    out << format_double(values(i)) << "\n";
  }
}

namespace {

struct PanelRect {
  double x0, y0, w, h;
};

struct AxisMap {
  double xlo, xhi, ylo, yhi;
  PanelRect rect;

  double px(double x) const {
    return rect.x0 + (x - xlo) / (xhi - xlo) * rect.w;
  }
  double py(double y) const {
    return rect.y0 + rect.h - (y - ylo) / (yhi - ylo) * rect.h;
  }
};

std::string px_fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

void svg_frame(std::ostream& out, const PanelRect& r, const std::string& title) {
  out << "<rect x=\"" << px_fmt(r.x0) << "\" y=\"" << px_fmt(r.y0)
      << "\" width=\"" << px_fmt(r.w) << "\" height=\"" << px_fmt(r.h)
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  out << "<text x=\"" << px_fmt(r.x0) << "\" y=\"" << px_fmt(r.y0 - 8)
      << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#222\">"
      << title << "</text>\n";
}

void svg_polyline(std::ostream& out,
                  const std::vector<std::pair<double, double>>& pts,
                  const AxisMap& m, const char* color, double width,
                  bool dashed = false) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
      << width << "\"";
  if (dashed) out << " stroke-dasharray=\"5,4\"";
  out << " points=\"";
  for (const auto& [x, y] : pts) {
    out << px_fmt(m.px(x)) << ',' << px_fmt(m.py(y)) << ' ';
  }
  out << "\"/>\n";
}

void series_extent(const PlotSeries& s, double& xlo, double& xhi, double& ylo,
                   double& yhi) {
  for (const auto& [x, y] : s.points) {
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  }
}

}  // namespace

std::string render_report_svg(const ReportBundle& bundle) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::ostringstream os;
  const int width = 980, height = 740;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
     << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
     << height << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"30\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" "
        "fill=\"#111\">"
     << bundle.label << "</text>\n";

  const PanelRect panels[4] = {{60, 60, 390, 260},
                               {540, 60, 390, 260},
                               {60, 420, 390, 260},
                               {540, 420, 390, 260}};

  // Panel 1: histogram and fitted marginal.
  {
    double xlo = kInf, xhi = -kInf, ylo = 0.0, yhi = -kInf;
    series_extent(bundle.histogram, xlo, xhi, ylo, yhi);
    series_extent(bundle.density, xlo, xhi, ylo, yhi);
    const AxisMap m{xlo, xhi, 0.0, yhi * 1.08 + 1e-12, panels[0]};
    svg_frame(os, panels[0], "z-values and fitted marginal");
    const auto& hist = bundle.histogram.points;
    const double bw = hist.size() > 1 ? hist[1].first - hist[0].first : 1.0;
    for (const auto& [center, density] : hist) {
      const double x = m.px(center - 0.5 * bw);
      const double y = m.py(density);
      const double w = m.px(center + 0.5 * bw) - x;
      const double h = m.py(0.0) - y;
      os << "<rect x=\"" << px_fmt(x) << "\" y=\"" << px_fmt(y)
         << "\" width=\"" << px_fmt(w) << "\" height=\"" << px_fmt(h)
         << "\" fill=\"#ccd6e8\" stroke=\"none\"/>\n";
    }
    svg_polyline(os, bundle.density.points, m, "#1f3d7a", 1.6);
  }

  // Panel 2: QQ against the fitted and the naive normal quantiles.
  {
    double xlo = kInf, xhi = -kInf, ylo = kInf, yhi = -kInf;
    series_extent(bundle.qq_huber, xlo, xhi, ylo, yhi);
    series_extent(bundle.qq_normal, xlo, xhi, ylo, yhi);
    const double pad = 0.05 * std::max(xhi - xlo, yhi - ylo) + 1e-12;
    const AxisMap m{xlo - pad, xhi + pad, ylo - pad, yhi + pad, panels[1]};
    svg_frame(os, panels[1], "QQ: fitted (dark), naive normal (light)");
    const double lo = std::max(m.xlo, m.ylo), hi = std::min(m.xhi, m.yhi);
    svg_polyline(os, {{lo, lo}, {hi, hi}}, m, "#999999", 1.0, true);
    svg_polyline(os, bundle.qq_normal.points, m, "#bb6677", 1.2);
    svg_polyline(os, bundle.qq_huber.points, m, "#1f3d7a", 1.2);
  }

  // Panel 3: fitted fdr.
  {
    double xlo = kInf, xhi = -kInf, ylo = 0.0, yhi = 1.0;
    series_extent(bundle.fdr, xlo, xhi, ylo, yhi);
    const AxisMap m{xlo, xhi, 0.0, 1.05, panels[2]};
    svg_frame(os, panels[2], "fitted fdr");
    svg_polyline(os, bundle.fdr.points, m, "#1f3d7a", 1.6);
  }

  // Panel 4: alternative density.
  {
    svg_frame(os, panels[3], "alternative density f1");
    if (bundle.f1.points.empty()) {
      os << "<text x=\"" << px_fmt(panels[3].x0 + 40) << "\" y=\""
         << px_fmt(panels[3].y0 + 0.5 * panels[3].h)
         << "\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#666\">"
         << "no alternative component (fdr = 1 everywhere)</text>\n";
    } else {
      double xlo = kInf, xhi = -kInf, ylo = 0.0, yhi = -kInf;
      series_extent(bundle.f1, xlo, xhi, ylo, yhi);
      const AxisMap m{xlo, xhi, 0.0, yhi * 1.08 + 1e-12, panels[3]};
      svg_polyline(os, bundle.f1.points, m, "#bb6677", 1.6);
    }
  }

  os << "</svg>\n";
  return os.str();
}

void atomic_write_file(const std::filesystem::path& target,
                       const std::function<void(std::ostream&)>& writer) {
  const fs::path dir = target.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(static_cast<unsigned long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("atomic_write_file: cannot open " +
                               tmp.string());
    }
    try {
      writer(out);
      out.flush();
      if (!out) {
        throw std::runtime_error("atomic_write_file: write failed for " +
                                 tmp.string());
      }
    } catch (...) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
  }
  fs::rename(tmp, target);
}

}  // namespace huberfdr
