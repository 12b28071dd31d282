#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "huberfdr/io.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "huberfdr_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += std::string(HUBERFDR_CLI_PATH) + " " + args + " > " + out.string() +
         " 2> " + err.string();
  RunResult r;
  const int raw = std::system(cmd.c_str());
  r.status = WEXITSTATUS(raw);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& content) {
  const fs::path p = work_dir() / name;
  std::ofstream f(p);
  f << content;
  return p;
}

}  // namespace

TEST_CASE("fit: JSON document carries the full schema") {
  const fs::path zs = work_dir() / "sim.txt";
  const RunResult sim = run_cli(
      "simulate -n 4000 --mu 0 --sigma 1 --ka 1.8 --kb 1.75 --seed 7 -o " +
      zs.string());
  REQUIRE(sim.status == 0);

  const RunResult fit = run_cli("fit " + zs.string() + " --format json");
  REQUIRE(fit.status == 0);
  const ordered_json doc = ordered_json::parse(fit.out);
  CHECK(doc.at("schema_version") == "1");
  CHECK(doc.at("kind") == "fit");
  CHECK(doc.at("label") == "sim");
  const ordered_json& payload = doc.at("payload");
  for (const char* field :
       {"mu0", "sigma0", "ka", "kb", "p0", "loglik", "converged",
        "boundary_ka", "boundary_kb", "se", "n_restarts_used"}) {
    CHECK(payload.contains(field));
  }
  CHECK(payload.at("converged") == true);
}

TEST_CASE("simulate then fit recovers the generating parameters") {
  const fs::path zs = work_dir() / "roundtrip.txt";
  REQUIRE(run_cli("simulate -n 4000 --mu 0 --sigma 1 --ka 1.8 --kb 1.75 "
                  "--seed 7 -o " +
                  zs.string())
              .status == 0);
  const RunResult fit = run_cli("fit " + zs.string());
  REQUIRE(fit.status == 0);
  const ordered_json payload = ordered_json::parse(fit.out).at("payload");
  CHECK(std::abs(payload.at("mu0").get<double>() - 0.0) < 0.1);
  CHECK(std::abs(payload.at("sigma0").get<double>() - 1.0) < 0.1);
  CHECK(std::abs(payload.at("ka").get<double>() - 1.8) < 0.6);
  CHECK(std::abs(payload.at("kb").get<double>() - 1.75) < 0.6);
}

TEST_CASE("identical command lines produce byte-identical outputs") {
  const fs::path a = work_dir() / "det_a.txt";
  const fs::path b = work_dir() / "det_b.txt";
  REQUIRE(run_cli("simulate -n 500 --mu 1 --sigma 2 --ka 1.5 --kb 1.5 "
                  "--seed 123 -o " +
                  a.string())
              .status == 0);
  REQUIRE(run_cli("simulate -n 500 --mu 1 --sigma 2 --ka 1.5 --kb 1.5 "
                  "--seed 123 -o " +
                  b.string())
              .status == 0);
  CHECK(slurp(a) == slurp(b));

  const fs::path fit_a = work_dir() / "fit_a.json";
  const fs::path fit_b = work_dir() / "fit_b.json";
  REQUIRE(run_cli("fit " + a.string() + " -o " + fit_a.string()).status == 0);
  REQUIRE(run_cli("fit " + a.string() + " -o " + fit_b.string()).status == 0);
  CHECK(slurp(fit_a) == slurp(fit_b));
}

TEST_CASE("HUBERFDR_SEED is the fallback seed; flags win") {
  const fs::path env_out = work_dir() / "env_seed.txt";
  const fs::path flag_out = work_dir() / "flag_seed.txt";
  const fs::path win_out = work_dir() / "win_seed.txt";
  REQUIRE(run_cli("simulate -n 50 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 -o " +
                      env_out.string(),
                  "HUBERFDR_SEED=42")
              .status == 0);
  REQUIRE(run_cli("simulate -n 50 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 "
                  "--seed 42 -o " +
                  flag_out.string())
              .status == 0);
  CHECK(slurp(env_out) == slurp(flag_out));
  REQUIRE(run_cli("simulate -n 50 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 "
                  "--seed 9 -o " +
                      win_out.string(),
                  "HUBERFDR_SEED=42")
              .status == 0);
  CHECK(slurp(win_out) != slurp(env_out));
}

TEST_CASE("report on pure-null data: flat fdr curve, zero calls") {
  // H(mu, sigma, 10, 10) is the pure normal: the refit drives both knots
  // back to the boundary for this seed.
  const fs::path zs = work_dir() / "purenull.txt";
  REQUIRE(run_cli("simulate -n 3000 --mu -0.03 --sigma 1.43 --ka 10 "
                  "--kb 10 --seed 7 -o " +
                  zs.string())
              .status == 0);
  const fs::path dir = work_dir() / "null_report";
  fs::remove_all(dir);
  const RunResult rep =
      run_cli("report " + zs.string() + " -o " + dir.string() + " --svg");
  REQUIRE(rep.status == 0);
  for (const char* name :
       {"fit.json", "histogram.csv", "density_curve.csv", "qq_huber.csv",
        "qq_normal.csv", "fdr_curve.csv", "f1_curve.csv", "calls.csv",
        "report.svg"}) {
    CHECK(fs::exists(dir / name));
  }

  // every fdr_curve y is exactly 1
  std::ifstream fdr(dir / "fdr_curve.csv");
  std::string line;
  bool past_header = false;
  int rows = 0;
  while (std::getline(fdr, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!past_header) {
      CHECK(line == "x,y");
      past_header = true;
      continue;
    }
    const auto comma = line.find(',');
    REQUIRE(comma != std::string::npos);
    CHECK(line.substr(comma + 1) == "1");
    ++rows;
  }
  CHECK(rows > 100);

  // zero called rows in calls.csv
  std::ifstream calls(dir / "calls.csv");
  past_header = false;
  while (std::getline(calls, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!past_header) {
      past_header = true;
      continue;
    }
    CHECK(line.substr(line.size() - 2) == ",0");
  }

  const ordered_json fit_doc = ordered_json::parse(slurp(dir / "fit.json"));
  CHECK(fit_doc.at("payload").at("boundary_ka") == true);
  CHECK(fit_doc.at("payload").at("boundary_kb") == true);
}

TEST_CASE("fdr with fixed params and text format") {
  const fs::path zs = work_dir() / "fdr_in.txt";
  REQUIRE(run_cli("simulate -n 200 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 "
                  "--seed 3 -o " +
                  zs.string())
              .status == 0);
  const RunResult r =
      run_cli("fdr " + zs.string() + " --params 0,1,1.5,1.5");
  REQUIRE(r.status == 0);
  const ordered_json payload = ordered_json::parse(r.out).at("payload");
  CHECK(payload.at("n") == 200);
  CHECK(payload.at("rows").size() == 200);
  CHECK(payload.at("threshold") == 0.2);

  const RunResult text =
      run_cli("fdr " + zs.string() + " --params 0,1,1.5,1.5 --format text");
  REQUIRE(text.status == 0);
  CHECK(text.out.find("kind: fdr") != std::string::npos);
}

TEST_CASE("lrt and regress run end to end") {
  const fs::path zs = work_dir() / "lrt_in.txt";
  REQUIRE(run_cli("simulate -n 2000 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 "
                  "--seed 21 -o " +
                  zs.string())
              .status == 0);
  const RunResult lrt = run_cli("lrt " + zs.string());
  REQUIRE(lrt.status == 0);
  const ordered_json lp = ordered_json::parse(lrt.out).at("payload");
  CHECK(lp.at("statistic").get<double>() >= 0.0);
  CHECK(lp.at("p_value").get<double>() <= 1.0);

  std::ostringstream csv;
  csv << "y,x\n";
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    const double v = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    const double eps = std::sqrt(-2.0 * std::log(u)) *
                       std::cos(6.283185307179586 * v);
    const double x = static_cast<double>(i) / 100.0;
    csv << 2.0 + 3.0 * x + eps << "," << x << "\n";
  }
  const fs::path reg = write_file("reg_cli.csv", csv.str());
  const RunResult rr = run_cli("regress " + reg.string() + " --response y");
  REQUIRE(rr.status == 0);
  const ordered_json rp = ordered_json::parse(rr.out).at("payload");
  CHECK(rp.at("beta").size() == 2);
  CHECK(std::abs(rp.at("beta")[0].get<double>() - 2.0) < 0.5);
  CHECK(std::abs(rp.at("beta")[1].get<double>() - 3.0) < 0.5);
}

TEST_CASE("boot subcommand reports percentile intervals") {
  const fs::path zs = work_dir() / "boot_in.txt";
  REQUIRE(run_cli("simulate -n 1000 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 "
                  "--seed 77 -o " +
                  zs.string())
              .status == 0);
  const RunResult r =
      run_cli("boot " + zs.string() + " -B 50 --seed 5 --threads 2");
  REQUIRE(r.status == 0);
  const ordered_json payload = ordered_json::parse(r.out).at("payload");
  CHECK(payload.at("method") == "bootstrap");
  CHECK(payload.at("b_replicates") == 50);
  CHECK(payload.at("mu0").at("lo").get<double>() <=
        payload.at("mu0").at("hi").get<double>());
}

TEST_CASE("bayes subcommand writes a chain CSV on request") {
  const fs::path zs = work_dir() / "bayes_in.txt";
  REQUIRE(run_cli("simulate -n 500 --mu 0 --sigma 1 --ka 1.5 --kb 1.5 "
                  "--seed 13 -o " +
                  zs.string())
              .status == 0);
  const fs::path chain = work_dir() / "chain.csv";
  const RunResult r = run_cli("bayes " + zs.string() +
                              " --iters 3000 --burnin 1000 --seed 2 "
                              "--chain-csv " +
                              chain.string());
  REQUIRE(r.status == 0);
  const ordered_json payload = ordered_json::parse(r.out).at("payload");
  CHECK(payload.at("iters") == 3000);
  CHECK(payload.contains("p0"));
  std::ifstream in(chain);
  std::string header;
  std::getline(in, header);
  CHECK(header == "iter,mu0,sigma0,ka,kb,p0");
  int nrows = 0;
  std::string line;
  while (std::getline(in, line)) ++nrows;
  CHECK(nrows == 3000);
}

TEST_CASE("failures exit nonzero with a machine-readable error") {
  const RunResult missing = run_cli("fit /nonexistent/zs.txt");
  CHECK(missing.status != 0);
  const ordered_json err = ordered_json::parse(missing.err);
  CHECK(err.contains("error"));
  CHECK(err.at("error").at("message").get<std::string>().find(
            "cannot open") != std::string::npos);

  // a failed run must not leave an output file behind
  const fs::path out = work_dir() / "never_written.json";
  fs::remove(out);
  const RunResult bad =
      run_cli("fit /nonexistent/zs.txt -o " + out.string());
  CHECK(bad.status != 0);
  CHECK(!fs::exists(out));
}

TEST_CASE("--defaults prints the numeric defaults") {
  const RunResult r = run_cli("--defaults");
  REQUIRE(r.status == 0);
  const ordered_json defaults = ordered_json::parse(r.out);
  CHECK(defaults.at("k_max") == 10.0);
  CHECK(defaults.at("bootstrap_B") == 1000);
  CHECK(defaults.at("mcmc_iters") == 20000);
  CHECK(defaults.at("mcmc_burnin") == 5000);
  CHECK(defaults.at("fdr_threshold") == 0.2);
}
