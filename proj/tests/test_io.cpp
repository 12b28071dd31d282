#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/io.hpp"

using namespace huberfdr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "huberfdr_io_tests";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = temp_dir() / name;
  std::ofstream out(p);
  out << content;
  return p;
}

}  // namespace

TEST_CASE("read_zdata: plain values with comments and blanks") {
  const fs::path p =
      write_file("plain.txt", "0.5\n-1.2\n# note\n\n3.4\n");
  const ZData d = read_zdata(p.string());
  REQUIRE(d.n() == 3);
  CHECK(d.values(0) == 0.5);
  CHECK(d.values(1) == -1.2);
  CHECK(d.values(2) == 3.4);
  CHECK(d.label == "plain");
}

TEST_CASE("read_zdata: non-numeric token names its line") {
  const fs::path p = write_file(
      "bad.txt", "1\n2\n3\n4\n5\n6\nabc\n8\n");
  try {
    read_zdata(p.string());
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 7") != std::string::npos);
    CHECK(msg.find("abc") != std::string::npos);
  }
}

TEST_CASE("read_zdata: single-column CSV with header") {
  const fs::path p = write_file("csv.csv", "z\n0.1\n0.2\n");
  const ZData d = read_zdata(p.string());
  REQUIRE(d.n() == 2);
  CHECK(d.values(0) == 0.1);
  CHECK(d.values(1) == 0.2);
  CHECK(d.label == "csv");
}

TEST_CASE("read_zdata: empty and multi-column files are errors") {
  const fs::path empty = write_file("empty.txt", "");
  CHECK_THROWS_AS(read_zdata(empty.string()), std::runtime_error);
  const fs::path comments = write_file("comments.txt", "# a\n# b\n");
  CHECK_THROWS_AS(read_zdata(comments.string()), std::runtime_error);
  const fs::path multi = write_file("multi.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS(read_zdata(multi.string()), std::runtime_error);
  CHECK_THROWS_AS(read_zdata("/nonexistent/file.txt"), std::runtime_error);
}

TEST_CASE("read_regression_csv: intercept handling") {
  const fs::path p = write_file("reg.csv",
                                "y,x\n1,2\n3,4\n0,1\n2,0\n1,5\n4,2\n-1,3\n"
                                "2,2\n0,4\n1,1\n3,3\n2,5\n");
  const RegressionData with = read_regression_csv(p.string(), "y");
  CHECK(with.n() == 12);
  CHECK(with.p() == 2);
  CHECK(with.column_names[0] == "(intercept)");
  CHECK(with.column_names[1] == "x");
  CHECK(with.X.col(0).isOnes());

  const RegressionData without = read_regression_csv(p.string(), "y", false);
  CHECK(without.p() == 1);
  CHECK(without.column_names[0] == "x");
}

TEST_CASE("read_regression_csv: missing response lists available columns") {
  const fs::path p = write_file("reg2.csv", "a,b\n1,2\n");
  try {
    read_regression_csv(p.string(), "y");
    FAIL("expected missing-column error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'y'") != std::string::npos);
    CHECK(msg.find("a") != std::string::npos);
    CHECK(msg.find("b") != std::string::npos);
  }
}

TEST_CASE("read_regression_csv: bad cell names row and column") {
  std::string content = "y,x\n";
  for (int i = 0; i < 10; ++i) content += "1,2\n";
  content += "1,oops\n";
  const fs::path p = write_file("reg3.csv", content);
  try {
    read_regression_csv(p.string(), "y");
    FAIL("expected cell parse error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 12") != std::string::npos);
    CHECK(msg.find("'x'") != std::string::npos);
    CHECK(msg.find("oops") != std::string::npos);
  }
}

TEST_CASE("document round trip: fit") {
  FitResult fit;
  fit.params = {-0.001, 1.059, 1.8, 1.75};
  fit.p0 = 0.983116886;
  fit.loglik = -7328.25;
  fit.converged = true;
  fit.boundary_kb = false;
  fit.n_restarts_used = 1;
  fit.n_evaluations = 512;
  fit.se = StdErrors{0.015, 0.015, 0.1, 0.09, 0.004};
  const ResultDocument doc = make_fit_document("prostate", fit);
  const ResultDocument back = parse_document(serialize(doc));
  CHECK(back == doc);
  const FitResult fit2 = back.payload.get<FitResult>();
  CHECK(fit2.params.mu0 == fit.params.mu0);
  CHECK(fit2.params.sigma0 == fit.params.sigma0);
  CHECK(fit2.loglik == fit.loglik);
  REQUIRE(fit2.se.has_value());
  CHECK(fit2.se->p0 == fit.se->p0);

  fit.se.reset();
  const ResultDocument doc2 = make_fit_document("prostate", fit);
  const FitResult fit3 =
      parse_document(serialize(doc2)).payload.get<FitResult>();
  CHECK(!fit3.se.has_value());
}

TEST_CASE("document round trip: lrt, intervals, posterior") {
  const LrtResult lrt{-100.5, -102.25, 3.5, 0.0614, false};
  const ResultDocument lrt_doc = make_lrt_document("hiv", lrt);
  CHECK(parse_document(serialize(lrt_doc)) == lrt_doc);
  const LrtResult lrt2 = lrt_doc.payload.get<LrtResult>();
  CHECK(lrt2.statistic == lrt.statistic);
  CHECK(lrt2.p_value == lrt.p_value);

  IntervalTable t;
  t.method = "bootstrap";
  t.level = 0.95;
  t.b_replicates = 1000;
  t.seed = 42;
  t.mu0 = {-0.001, -0.031, 0.03};
  t.p0 = {0.983, 0.975, 0.99};
  const ResultDocument t_doc = make_intervals_document("prostate", t);
  CHECK(parse_document(serialize(t_doc)) == t_doc);
  const IntervalTable t2 = t_doc.payload.get<IntervalTable>();
  CHECK(t2.mu0.lo == t.mu0.lo);
  CHECK(t2.seed == t.seed);
  CHECK(t2.method == "bootstrap");

  PosteriorSummary s;
  s.level = 0.95;
  s.p0 = {0.983, 0.984, 0.975, 0.99};
  PosteriorChain chain;
  chain.burnin = 5000;
  chain.seed = 7;
  chain.acceptance_rate = 0.31;
  chain.draws.resize(1, 5);
  chain.draws.setZero();
  const ResultDocument s_doc = make_posterior_document("prostate", s, chain, 20000);
  CHECK(parse_document(serialize(s_doc)) == s_doc);
  CHECK(s_doc.payload.at("iters") == 20000);
  CHECK(s_doc.payload.at("acceptance_rate") == 0.31);
  const PosteriorSummary s2 = s_doc.payload.get<PosteriorSummary>();
  CHECK(s2.p0.hi == s.p0.hi);
}

TEST_CASE("parse_document rejects unknown schema versions") {
  ResultDocument doc = make_lrt_document("x", LrtResult{});
  std::string text = serialize(doc);
  const auto pos = text.find("\"1\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 3, "\"2\"");
  CHECK_THROWS_AS(parse_document(text), std::runtime_error);
}

TEST_CASE("render_text: flat key-value view") {
  FitResult fit;
  fit.params = {0.5, 1.0, 1.5, 1.5};
  fit.p0 = 0.96;
  const std::string text = render_text(make_fit_document("demo", fit));
  CHECK(text.find("kind: fit") != std::string::npos);
  CHECK(text.find("label: demo") != std::string::npos);
  CHECK(text.find("mu0: 0.5") != std::string::npos);
}

TEST_CASE("format_double survives a parse round trip") {
  for (double v : {0.1, -1.2345678901234567e-7, 3.0, 0.98311688639930111,
                   1e300, -0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("write_series_csv: meta comments then x,y rows") {
  PlotSeries s;
  s.kind = SeriesKind::fdr_curve;
  s.meta = {{"alpha", "0.5"}};
  s.points = {{-1.0, 1.0}, {0.0, 1.0}, {2.5, 0.75}};
  std::ostringstream os;
  write_series_csv(s, os);
  const std::string text = os.str();
  CHECK(text.rfind("# kind=fdr_curve\n# alpha=0.5\nx,y\n-1,1\n", 0) == 0);
  CHECK(text.find("2.5,0.75") != std::string::npos);
}

TEST_CASE("write_calls_csv and write_chain_csv headers") {
  CallTable t;
  t.threshold = 0.2;
  t.rows = {{3, 4.5, 0.01, true}, {1, 0.2, 1.0, false}};
  std::ostringstream os;
  write_calls_csv(t, os);
  CHECK(os.str().find("index,z,fdr,called\n3,4.5,0.01,1\n1,0.2,1,0\n") !=
        std::string::npos);

  PosteriorChain chain;
  chain.burnin = 0;
  chain.draws.resize(2, 5);
  chain.draws << 0.0, 1.0, 1.5, 1.5, 0.96, 0.1, 1.1, 1.6, 1.4, 0.95;
  std::ostringstream cs;
  write_chain_csv(chain, cs);
  const std::string text = cs.str();
  CHECK(text.rfind("iter,mu0,sigma0,ka,kb,p0\n1,0,1,1.5,1.5,0.96\n", 0) == 0);
  CHECK(text.find("\n2,0.1,1.1,1.6,1.4,0.95\n") != std::string::npos);
}

TEST_CASE("atomic_write_file: success writes, failure leaves nothing") {
  const fs::path target = temp_dir() / "atomic" / "result.json";
  fs::remove_all(temp_dir() / "atomic");

  atomic_write_file(target, [](std::ostream& os) { os << "ok\n"; });
  REQUIRE(fs::exists(target));
  std::ifstream in(target);
  std::string content;
  std::getline(in, content);
  CHECK(content == "ok");

  // A writer that throws mid-stream must not clobber the target or leave
  // temp litter behind.
  CHECK_THROWS_AS(atomic_write_file(target,
                                    [](std::ostream& os) {
                                      os << "partial";
                                      throw std::runtime_error("boom");
                                    }),
                  std::runtime_error);
  std::ifstream again(target);
  std::string content2;
  std::getline(again, content2);
  CHECK(content2 == "ok");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(target.parent_path())) {
    (void)entry;
    ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("render_report_svg emits one svg with four panels") {
  const HuberParams p{0.0, 1.0, 1.8, 1.75};
  const ZData data = sample(500, p, 33);
  const ReportBundle bundle = build_report(data, p, {});
  const std::string svg = render_report_svg(bundle);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("fitted fdr") != std::string::npos);
  CHECK(svg.find("alternative density f1") != std::string::npos);
  // deterministic rendering
  CHECK(render_report_svg(bundle) == svg);
}
