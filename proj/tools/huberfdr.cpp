// Command-line front end: fit the asymmetric Huber distribution to
// z-values and derive local fdr, intervals, posterior summaries and
// report series from the fit.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "huberfdr/huber_dist.hpp"
#include "huberfdr/io.hpp"
#include "huberfdr/mcmc.hpp"
#include "huberfdr/mle_fit.hpp"
#include "huberfdr/regression.hpp"
#include "huberfdr/report.hpp"

namespace {

namespace fs = std::filesystem;
using huberfdr::json;

void emit(const huberfdr::ResultDocument& doc, const std::string& format,
          const std::string& out_path) {
  const std::string text =
      format == "text" ? huberfdr::render_text(doc) : huberfdr::serialize(doc);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    huberfdr::atomic_write_file(
        out_path, [&](std::ostream& os) { os << text; });
  }
}

void add_format_option(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"json", "text"}))
      ->capture_default_str();
}

std::string print_defaults() {
  json j{{"k_max", 10.0},
         {"bootstrap_B", 1000},
         {"mcmc_iters", 20000},
         {"mcmc_burnin", 5000},
         {"fdr_threshold", 0.2},
         {"interval_level", 0.95},
         {"seed", 1},
         {"grid_points", 512},
         {"bins", "freedman-diaconis, clamped to [20, 120]"},
         {"seed_env_var", "HUBERFDR_SEED"}};
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymmetric Huber distribution fitting and local fdr analysis"};
  app.require_subcommand(0, 1);

  bool show_defaults = false;
  app.add_flag("--defaults", show_defaults,
               "Print the numeric defaults as JSON and exit");

  // ---- fit ----
  struct {
    std::string input, output, format = "json";
    bool symmetric = false;
    double k_max = 10.0;
  } fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Maximum likelihood fit");
  fit_cmd->add_option("input", fit_args.input, "z-value file")->required();
  fit_cmd->add_flag("--symmetric", fit_args.symmetric, "Constrain ka = kb");
  fit_cmd->add_option("--k-max", fit_args.k_max, "Knot cap")
      ->capture_default_str();
  add_format_option(fit_cmd, fit_args.format);
  fit_cmd->add_option("-o,--output", fit_args.output, "Output path");

  // ---- fdr ----
  struct {
    std::string input, output, format = "json";
    std::vector<double> params;
    double threshold = 0.2;
    double k_max = 10.0;
  } fdr_args;
  CLI::App* fdr_cmd =
      app.add_subcommand("fdr", "Per-observation local fdr and calls");
  fdr_cmd->add_option("input", fdr_args.input, "z-value file")->required();
  fdr_cmd
      ->add_option("--params", fdr_args.params,
                   "Fixed MU,SIGMA,KA,KB (fits when absent)")
      ->delimiter(',')
      ->expected(4);
  fdr_cmd->add_option("--threshold", fdr_args.threshold, "Call threshold")
      ->capture_default_str();
  fdr_cmd->add_option("--k-max", fdr_args.k_max, "Knot cap")
      ->capture_default_str();
  add_format_option(fdr_cmd, fdr_args.format);
  fdr_cmd->add_option("-o,--output", fdr_args.output, "Output path");

  // ---- lrt ----
  struct {
    std::string input, output, format = "json";
    double k_max = 10.0;
  } lrt_args;
  CLI::App* lrt_cmd =
      app.add_subcommand("lrt", "Likelihood ratio test for common k");
  lrt_cmd->add_option("input", lrt_args.input, "z-value file")->required();
  lrt_cmd->add_option("--k-max", lrt_args.k_max, "Knot cap")
      ->capture_default_str();
  add_format_option(lrt_cmd, lrt_args.format);
  lrt_cmd->add_option("-o,--output", lrt_args.output, "Output path");

  // ---- boot ----
  struct {
    std::string input, output, format = "json";
    int b = 1000;
    std::uint64_t seed = 1;
    double level = 0.95;
    int threads = 1;
    double k_max = 10.0;
    bool symmetric = false;
  } boot_args;
  CLI::App* boot_cmd =
      app.add_subcommand("boot", "Parametric bootstrap intervals");
  boot_cmd->add_option("input", boot_args.input, "z-value file")->required();
  boot_cmd->add_option("-B,--replicates", boot_args.b, "Bootstrap replicates")
      ->capture_default_str();
  boot_cmd->add_option("--seed", boot_args.seed, "RNG seed")
      ->envname("HUBERFDR_SEED")
      ->capture_default_str();
  boot_cmd->add_option("--level", boot_args.level, "Interval level")
      ->capture_default_str();
  boot_cmd->add_option("--threads", boot_args.threads, "Worker threads")
      ->capture_default_str();
  boot_cmd->add_flag("--symmetric", boot_args.symmetric, "Constrain ka = kb");
  boot_cmd->add_option("--k-max", boot_args.k_max, "Knot cap")
      ->capture_default_str();
  add_format_option(boot_cmd, boot_args.format);
  boot_cmd->add_option("-o,--output", boot_args.output, "Output path");

  // ---- bayes ----
  struct {
    std::string input, output, chain_csv, format = "json";
    std::int64_t iters = 20000, burnin = 5000;
    std::uint64_t seed = 1;
    double level = 0.95;
    double k_max = 10.0;
  } bayes_args;
  CLI::App* bayes_cmd =
      app.add_subcommand("bayes", "Random-walk Metropolis posterior");
  bayes_cmd->add_option("input", bayes_args.input, "z-value file")->required();
  bayes_cmd->add_option("--iters", bayes_args.iters, "Total iterations")
      ->capture_default_str();
  bayes_cmd->add_option("--burnin", bayes_args.burnin, "Burn-in iterations")
      ->capture_default_str();
  bayes_cmd->add_option("--seed", bayes_args.seed, "RNG seed")
      ->envname("HUBERFDR_SEED")
      ->capture_default_str();
  bayes_cmd->add_option("--level", bayes_args.level, "Credible level")
      ->capture_default_str();
  bayes_cmd->add_option("--k-max", bayes_args.k_max, "Knot cap")
      ->capture_default_str();
  bayes_cmd->add_option("--chain-csv", bayes_args.chain_csv,
                        "Write the full chain as CSV");
  add_format_option(bayes_cmd, bayes_args.format);
  bayes_cmd->add_option("-o,--output", bayes_args.output, "Output path");

  // ---- simulate ----
  struct {
    std::int64_t n = 0;
    double mu = 0.0, sigma = 1.0, ka = 1.5, kb = 1.5;
    std::uint64_t seed = 1;
    std::string output;
  } sim_args;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Draw z-values from H(mu,sigma,ka,kb)");
  sim_cmd->add_option("-n,--n", sim_args.n, "Sample size")->required();
  sim_cmd->add_option("--mu", sim_args.mu, "Location")->required();
  sim_cmd->add_option("--sigma", sim_args.sigma, "Scale")->required();
  sim_cmd->add_option("--ka", sim_args.ka, "Left knot")->required();
  sim_cmd->add_option("--kb", sim_args.kb, "Right knot")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "RNG seed")
      ->envname("HUBERFDR_SEED")
      ->capture_default_str();
  sim_cmd->add_option("-o,--output", sim_args.output, "Output path")
      ->required();

  // ---- regress ----
  struct {
    std::string input, output, response, format = "json";
    bool no_intercept = false;
  } reg_args;
  CLI::App* reg_cmd =
      app.add_subcommand("regress", "Regression with Huber-distributed errors");
  reg_cmd->add_option("input", reg_args.input, "CSV file with header")
      ->required();
  reg_cmd->add_option("--response", reg_args.response, "Response column name")
      ->required();
  reg_cmd->add_flag("--no-intercept", reg_args.no_intercept,
                    "Do not prepend an intercept column");
  add_format_option(reg_cmd, reg_args.format);
  reg_cmd->add_option("-o,--output", reg_args.output, "Output path");

  // ---- report ----
  struct {
    std::string input, output;
    int bins = 0;
    bool svg = false;
    double threshold = 0.2;
    double k_max = 10.0;
  } rep_args;
  CLI::App* rep_cmd =
      app.add_subcommand("report", "CSV (and optional SVG) report series");
  rep_cmd->add_option("input", rep_args.input, "z-value file")->required();
  rep_cmd->add_option("-o,--output", rep_args.output,
                      "Output directory (default: <stem>_report)");
  rep_cmd->add_option("--bins", rep_args.bins,
                      "Histogram bins (default: Freedman-Diaconis)");
  rep_cmd->add_flag("--svg", rep_args.svg, "Also render report.svg");
  rep_cmd->add_option("--threshold", rep_args.threshold, "Call threshold")
      ->capture_default_str();
  rep_cmd->add_option("--k-max", rep_args.k_max, "Knot cap")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (show_defaults) {
    std::cout << print_defaults();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }

  try {
    if (*fit_cmd) {
      const huberfdr::ZData data = huberfdr::read_zdata(fit_args.input);
      huberfdr::FitOptions options;
      options.policy.k_max = fit_args.k_max;
      const huberfdr::FitResult fit =
          fit_args.symmetric ? huberfdr::fit_mle_symmetric(data, options)
                             : huberfdr::fit_mle(data, options);
      emit(huberfdr::make_fit_document(data.label, fit), fit_args.format,
           fit_args.output);
    } else if (*fdr_cmd) {
      const huberfdr::ZData data = huberfdr::read_zdata(fdr_args.input);
      huberfdr::NumericPolicy policy;
      policy.k_max = fdr_args.k_max;
      huberfdr::HuberParams params;
      if (!fdr_args.params.empty()) {
        params = {fdr_args.params[0], fdr_args.params[1], fdr_args.params[2],
                  fdr_args.params[3]};
        huberfdr::validate(params, policy);
      } else {
        huberfdr::FitOptions options;
        options.policy = policy;
        options.compute_se = false;
        const huberfdr::FitResult fit = huberfdr::fit_mle(data, options);
        if (!fit.converged) {
          throw std::runtime_error("fdr: fit did not converge: " +
                                   fit.diagnostics);
        }
        params = fit.params;
      }
      const huberfdr::CallTable table =
          huberfdr::call_nonnull(data, params, fdr_args.threshold, policy);
      emit(huberfdr::make_fdr_document(data.label, params, table),
           fdr_args.format, fdr_args.output);
    } else if (*lrt_cmd) {
      const huberfdr::ZData data = huberfdr::read_zdata(lrt_args.input);
      huberfdr::FitOptions options;
      options.policy.k_max = lrt_args.k_max;
      const huberfdr::LrtResult lrt = huberfdr::lrt_common_k(data, options);
      emit(huberfdr::make_lrt_document(data.label, lrt), lrt_args.format,
           lrt_args.output);
    } else if (*boot_cmd) {
      const huberfdr::ZData data = huberfdr::read_zdata(boot_args.input);
      huberfdr::FitOptions options;
      options.policy.k_max = boot_args.k_max;
      const huberfdr::FitResult fit =
          boot_args.symmetric ? huberfdr::fit_mle_symmetric(data, options)
                              : huberfdr::fit_mle(data, options);
      if (!fit.converged) {
        throw std::runtime_error("boot: fit did not converge: " +
                                 fit.diagnostics);
      }
      huberfdr::BootstrapOptions boot;
      boot.b = boot_args.b;
      boot.seed = boot_args.seed;
      boot.level = boot_args.level;
      boot.threads = boot_args.threads;
      boot.policy = options.policy;
      const huberfdr::IntervalTable table =
          huberfdr::parametric_bootstrap(fit, data, boot);
      emit(huberfdr::make_intervals_document(data.label, table),
           boot_args.format, boot_args.output);
    } else if (*bayes_cmd) {
      const huberfdr::ZData data = huberfdr::read_zdata(bayes_args.input);
      huberfdr::McmcOptions options;
      options.iters = bayes_args.iters;
      options.burnin = bayes_args.burnin;
      options.seed = bayes_args.seed;
      options.policy.k_max = bayes_args.k_max;
      const huberfdr::PriorSpec prior =
          huberfdr::PriorSpec::default_for(data, options.policy);
      const huberfdr::PosteriorChain chain =
          huberfdr::run_chain(data, prior, options);
      const huberfdr::PosteriorSummary summary =
          huberfdr::posterior_summary(chain, bayes_args.level);
      if (!bayes_args.chain_csv.empty()) {
        huberfdr::atomic_write_file(bayes_args.chain_csv, [&](std::ostream& os) {
          huberfdr::write_chain_csv(chain, os);
        });
      }
      emit(huberfdr::make_posterior_document(data.label, summary, chain,
                                             options.iters),
           bayes_args.format, bayes_args.output);
    } else if (*sim_cmd) {
      const huberfdr::HuberParams params{sim_args.mu, sim_args.sigma,
                                         sim_args.ka, sim_args.kb};
      huberfdr::NumericPolicy policy;
      policy.k_max = std::max(policy.k_max, std::max(sim_args.ka, sim_args.kb));
      huberfdr::validate(params, policy);
      const huberfdr::ZData draws =
          huberfdr::sample(sim_args.n, params, sim_args.seed);
      huberfdr::atomic_write_file(sim_args.output, [&](std::ostream& os) {
        huberfdr::write_zdata_lines(draws.values, os);
      });
    } else if (*reg_cmd) {
      const huberfdr::RegressionData data = huberfdr::read_regression_csv(
          reg_args.input, reg_args.response, !reg_args.no_intercept);
      const huberfdr::RegressionFit fit = huberfdr::fit_huber_lm(data);
      const std::string label = fs::path(reg_args.input).stem().string();
      emit(huberfdr::make_regression_document(label, fit, data.column_names),
           reg_args.format, reg_args.output);
    } else if (*rep_cmd) {
      const huberfdr::ZData data = huberfdr::read_zdata(rep_args.input);
      huberfdr::ReportOptions options;
      options.bins = rep_args.bins;
      options.threshold = rep_args.threshold;
      options.policy.k_max = rep_args.k_max;
      huberfdr::FitOptions fit_options;
      fit_options.policy = options.policy;
      const huberfdr::FitResult fit = huberfdr::fit_mle(data, fit_options);
      if (!fit.converged) {
        throw std::runtime_error("report: fit did not converge: " +
                                 fit.diagnostics);
      }
      const huberfdr::ReportBundle bundle =
          huberfdr::build_report(data, fit.params, options);
      const fs::path dir = rep_args.output.empty()
                               ? fs::path(data.label + "_report")
                               : fs::path(rep_args.output);
      huberfdr::atomic_write_file(dir / "fit.json", [&](std::ostream& os) {
        os << huberfdr::serialize(huberfdr::make_fit_document(data.label, fit));
      });
      const auto write_series = [&](const char* name,
                                    const huberfdr::PlotSeries& series) {
        huberfdr::atomic_write_file(dir / name, [&](std::ostream& os) {
          huberfdr::write_series_csv(series, os);
        });
      };
      write_series("histogram.csv", bundle.histogram);
      write_series("density_curve.csv", bundle.density);
      write_series("qq_huber.csv", bundle.qq_huber);
      write_series("qq_normal.csv", bundle.qq_normal);
      write_series("fdr_curve.csv", bundle.fdr);
      write_series("f1_curve.csv", bundle.f1);
      huberfdr::atomic_write_file(dir / "calls.csv", [&](std::ostream& os) {
        huberfdr::write_calls_csv(bundle.calls, os);
      });
      if (rep_args.svg) {
        huberfdr::atomic_write_file(dir / "report.svg", [&](std::ostream& os) {
          os << huberfdr::render_report_svg(bundle);
        });
      }
    }
  } catch (const std::exception& e) {
    const json error{{"error", json{{"type", "runtime"},
                                    {"message", e.what()}}}};
    std::cerr << error.dump(2) << "\n";
    return 1;
  }
  return 0;
}
