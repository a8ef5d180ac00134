// Command-line front end for the huberpl shared library. Every subcommand
// emits a single table, as CSV (default) or JSON, to stdout or --out. The
// first CSV line is a comment recording the resolved run parameters so a
// result file is self-describing; identical invocations produce identical
// bytes.

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "huberpl.h"
#include "json.hpp"

namespace {

using Cell = std::variant<double, std::string>;

struct Table {
  std::string run;  // resolved parameter string
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(const Table& t, std::ostream& out) {
  out << "# huberpl " << t.run << "\n";
  for (size_t j = 0; j < t.columns.size(); ++j)
    out << (j ? "," : "") << t.columns[j];
  out << "\n";
  for (const auto& row : t.rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      if (std::holds_alternative<double>(row[j]))
        out << fmt(std::get<double>(row[j]));
      else
        out << std::get<std::string>(row[j]);
    }
    out << "\n";
  }
}

void write_json(const Table& t, std::ostream& out) {
  nlohmann::ordered_json j;
  j["run"] = "huberpl " + t.run;
  j["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto jr = nlohmann::ordered_json::array();
    for (const auto& c : row) {
      if (std::holds_alternative<double>(c)) {
        double v = std::get<double>(c);
        if (std::isfinite(v))
          jr.push_back(v);
        else
          jr.push_back(nullptr);  // inf and undefined both map to null
      } else {
        jr.push_back(std::get<std::string>(c));
      }
    }
    rows.push_back(jr);
  }
  j["rows"] = rows;
  out << j.dump(2) << "\n";
}

struct Output {
  std::string format = "csv";
  std::string path;

  void emit(const Table& t) const {
    std::ostringstream buf;
    if (format == "json")
      write_json(t, buf);
    else
      write_csv(t, buf);
    if (path.empty()) {
      std::cout << buf.str();
    } else {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw std::runtime_error("cannot open output file: " + path);
      f << buf.str();
    }
  }
};

[[noreturn]] void die_numeric(const std::string& where, hpl_status s) {
  std::cerr << "huberpl: " << where << ": " << hpl_status_str(s);
  const char* detail = hpl_last_error();
  if (detail && *detail) std::cerr << " (" << detail << ")";
  std::cerr << "\n";
  std::exit(s == HPL_ERR_INVALID ? 2 : 3);
}

void check(hpl_status s, const std::string& where) {
  if (s != HPL_OK) die_numeric(where, s);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

hpl_noise make_noise(double eps, double mu) {
  return eps == 0.0 ? hpl_noise_gaussian() : hpl_noise_two_point(eps, mu);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Huber regression in the proportional regime: minimax tuning, "
               "state evolution, and Monte Carlo validation"};
  app.require_subcommand(1);

  Output output;
  app.add_option("--format", output.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", output.path, "write output to this file");

  // Shared option storage; each subcommand wires the subset it uses.
  std::vector<double> eps_list{0.05};
  std::vector<double> m_list{2.0};
  std::vector<double> mu_list{5.0};
  double m = 2.0, eps = 0.05, mu = 5.0, lambda = 1.0, kappa = 1.0, tol = 0.0;
  long n = 500, p = 250, reps = 200;
  uint64_t seed = 1;
  std::string grid = "40x40";
  std::string quantity = "vstar";
  std::string solver_name = "irls";
  std::string data_in, data_out;

  auto* c_classical = app.add_subcommand(
      "classical", "classical minimax description over contamination levels");
  c_classical->add_option("--eps", eps_list, "contamination levels");

  auto* c_minimax =
      app.add_subcommand("minimax", "minimax variance and tuning at (m, eps)");
  c_minimax->add_option("--m", m, "observations per parameter");
  c_minimax->add_option("--eps", eps, "contamination level");

  auto* c_breakdown =
      app.add_subcommand("breakdown", "variance-breakdown contamination level");
  c_breakdown->add_option("--m", m, "observations per parameter");

  auto* c_phase = app.add_subcommand(
      "phase", "minimax surface over the (eps, 1/m) phase plane");
  c_phase->add_option("--quantity", quantity, "surface to tabulate")
      ->check(CLI::IsMember({"vstar", "kappastar", "lambdastar"}));
  c_phase->add_option("--grid", grid, "grid size, e.g. 40x40");

  auto* c_semaps = app.add_subcommand(
      "semaps", "state-evolution maps against the least-favorable envelope");
  c_semaps->add_option("--m", m, "observations per parameter");
  c_semaps->add_option("--eps", eps, "contamination level");
  c_semaps->add_option("--mu", mu_list, "contamination locations");
  c_semaps->add_option("--kappa", kappa, "floating clipping ratio");
  c_semaps->add_option("--grid", grid, "number of tau^2 samples on [0,10]");

  auto* c_mono = app.add_subcommand(
      "lambda-mono", "threshold calibration curves under the extremal law");
  c_mono->add_option("--m", m_list, "aspect ratios");
  c_mono->add_option("--eps", eps_list, "contamination levels");
  c_mono->add_option("--grid", grid, "number of kappa samples per curve");

  std::vector<double> t1_eps{0.05, 0.10, 0.15, 0.175, 0.1875, 0.20, 0.25};
  std::vector<double> t2_eps{0.05, 0.1875};
  std::vector<double> t2_mu{2, 5, 10, 20, 100};

  auto* c_table1 =
      app.add_subcommand("table1", "minimax variance at m = 2 across eps");
  c_table1->add_option("--m", m, "observations per parameter");
  c_table1->add_option("--eps", t1_eps, "contamination levels");

  auto* c_table2 = app.add_subcommand(
      "table2", "Monte Carlo standard errors at the minimax tuning");
  c_table2->add_option("--m", m, "observations per parameter");
  c_table2->add_option("--eps", t2_eps, "contamination levels");
  c_table2->add_option("--mu", t2_mu, "contamination locations");
  c_table2->add_option("--n", n, "rows per dataset");
  c_table2->add_option("--p", p, "parameters per dataset");
  c_table2->add_option("--reps", reps, "Monte Carlo replications");
  c_table2->add_option("--seed", seed, "master seed");

  auto* c_amp = app.add_subcommand("amp-run", "single AMP fit on one dataset");
  c_amp->add_option("--n", n, "rows");
  c_amp->add_option("--p", p, "parameters");
  c_amp->add_option("--eps", eps, "contamination level");
  c_amp->add_option("--mu", mu, "contamination location");
  c_amp->add_option("--lambda", lambda, "Huber threshold");
  c_amp->add_option("--seed", seed, "dataset seed");
  c_amp->add_option("--tol", tol, "convergence tolerance");
  c_amp->add_option("--data", data_in, "read dataset from CSV instead of simulating");
  c_amp->add_option("--dump-data", data_out, "also write the dataset to CSV");

  auto* c_mc = app.add_subcommand("monte-carlo", "replicated finite-n experiment");
  c_mc->add_option("--n", n, "rows");
  c_mc->add_option("--p", p, "parameters");
  c_mc->add_option("--eps", eps, "contamination level");
  c_mc->add_option("--mu", mu, "contamination location");
  c_mc->add_option("--lambda", lambda, "Huber threshold");
  c_mc->add_option("--reps", reps, "replications");
  c_mc->add_option("--seed", seed, "master seed");
  c_mc->add_option("--solver", solver_name, "fitting algorithm")
      ->check(CLI::IsMember({"irls", "amp"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    Table t;

    if (*c_classical) {
      t.run = "classical --eps=" + join(eps_list);
      t.columns = {"eps", "kappa_star", "i_star", "v_star"};
      for (double e : eps_list) {
        hpl_classical cm;
        check(hpl_classical_minimax(e, &cm), "classical");
        t.rows.push_back({cm.epsilon, cm.kappa_star, cm.i_star, cm.v_star});
      }
    } else if (*c_minimax) {
      t.run = "minimax --m=" + fmt(m) + " --eps=" + fmt(eps);
      t.columns = {"m", "eps", "kappa_underline_star", "lambda_star", "v_star",
                   "breakdown"};
      hpl_minimax_solution s;
      check(hpl_minimax(m, eps, &s), "minimax");
      t.rows.push_back({s.m, s.epsilon, s.kappa_underline_star, s.lambda_star,
                        s.v_star, double(s.breakdown)});
    } else if (*c_breakdown) {
      t.run = "breakdown --m=" + fmt(m);
      t.columns = {"m", "eps_star"};
      double e;
      check(hpl_breakdown_epsilon(m, &e), "breakdown");
      t.rows.push_back({m, e});
    } else if (*c_phase) {
      size_t nx = 40, ny = 40;
      if (std::sscanf(grid.c_str(), "%zux%zu", &nx, &ny) != 2 || nx < 2 || ny < 2) {
        std::cerr << "huberpl: bad --grid, expected like 40x40\n";
        return 2;
      }
      t.run = "phase --quantity=" + quantity + " --grid=" + grid;
      t.columns = {"record", "eps", "inv_m", "value"};
      // Cell centers of an open (0, 0.5) x (0, 1) grid.
      for (size_t i = 0; i < nx; ++i) {
        double e = 0.5 * (double(i) + 0.5) / double(nx);
        hpl_classical cm;
        check(hpl_classical_minimax(e, &cm), "phase");
        for (size_t j = 0; j < ny; ++j) {
          double inv_m = (double(j) + 0.5) / double(ny);
          double v = std::numeric_limits<double>::infinity();
          if (inv_m < cm.i_star) {
            hpl_minimax_solution s;
            check(hpl_minimax(1.0 / inv_m, e, &s), "phase");
            v = quantity == "kappastar" ? s.kappa_underline_star
                : quantity == "lambdastar" ? s.lambda_star
                                           : s.v_star;
          }
          t.rows.push_back({std::string("cell"), e, inv_m, v});
        }
      }
      {
        const size_t nc = 512;
        std::vector<double> ce(nc), ci(nc);
        check(hpl_critical_curve(1e-3, 0.499, nc, ce.data(), ci.data()), "phase");
        for (size_t i = 0; i < nc; ++i)
          t.rows.push_back({std::string("curve"), ce[i], ci[i],
                            std::numeric_limits<double>::infinity()});
      }
    } else if (*c_semaps) {
      long samples = 200;
      std::sscanf(grid.c_str(), "%ld", &samples);
      if (samples < 2) samples = 2;
      t.run = "semaps --m=" + fmt(m) + " --eps=" + fmt(eps) +
              " --mu=" + join(mu_list) + " --kappa=" + fmt(kappa) +
              " --grid=" + std::to_string(samples);
      t.columns = {"tau_sq", "curve", "value"};
      for (long i = 0; i < samples; ++i) {
        double tau_sq = 10.0 * double(i) / double(samples - 1);
        for (double muv : mu_list) {
          hpl_se_config cfg{m, 1, kappa, make_noise(eps, muv), tau_sq, 0.0, 0};
          double v;
          check(hpl_se_t_map(tau_sq, &cfg, &v), "semaps");
          t.rows.push_back({tau_sq, "mu=" + fmt(muv), v});
        }
        double lf;
        check(hpl_lfse_t(tau_sq, m, eps, kappa, &lf), "semaps");
        t.rows.push_back({tau_sq, std::string("least-favorable"), lf});
        t.rows.push_back({tau_sq, std::string("identity"), tau_sq});
      }
    } else if (*c_mono) {
      long samples = 64;
      std::sscanf(grid.c_str(), "%ld", &samples);
      if (samples < 2) samples = 2;
      t.run = "lambda-mono --m=" + join(m_list) + " --eps=" + join(eps_list) +
              " --grid=" + std::to_string(samples);
      t.columns = {"m", "eps", "kappa", "lambda_bar", "monotone"};
      for (double mv : m_list) {
        for (double ev : eps_list) {
          double kp;
          check(hpl_kappa_plus(mv, ev, &kp), "lambda-mono");
          std::vector<double> ks, ls;
          for (long i = 0; i < samples; ++i) {
            double k = kp * (double(i) + 0.5) / double(samples);
            double lb;
            check(hpl_lambda_bar(mv, k, ev, &lb), "lambda-mono");
            ks.push_back(k);
            ls.push_back(lb);
          }
          bool mono = true;
          for (size_t i = 1; i < ls.size(); ++i)
            if (!(ls[i] > ls[i - 1])) mono = false;
          for (size_t i = 0; i < ls.size(); ++i)
            t.rows.push_back({mv, ev, ks[i], ls[i],
                              std::string(mono ? "yes" : "no")});
        }
      }
    } else if (*c_table1) {
      t.run = "table1 --m=" + fmt(m) + " --eps=" + join(t1_eps);
      t.columns = {"eps", "v_star"};
      for (double e : t1_eps) {
        hpl_minimax_solution s;
        check(hpl_minimax(m, e, &s), "table1");
        t.rows.push_back({e, s.v_star});
      }
    } else if (*c_table2) {
      t.run = "table2 --m=" + fmt(m) + " --eps=" + join(t2_eps) +
              " --mu=" + join(t2_mu) + " --n=" + std::to_string(n) +
              " --p=" + std::to_string(p) + " --reps=" + std::to_string(reps) +
              " --seed=" + std::to_string(seed);
      t.columns = {"eps", "mu", "lambda_star", "se_estimate", "mse",
                   "mc_std_error", "reps", "failures"};
      for (double e : t2_eps) {
        hpl_minimax_solution s;
        check(hpl_minimax(m, e, &s), "table2");
        if (s.breakdown) die_numeric("table2: breakdown phase", HPL_ERR_NO_SOLUTION);
        for (double muv : t2_mu) {
          hpl_noise nz = make_noise(e, muv);
          hpl_mc_summary mc;
          check(hpl_monte_carlo(n, p, &nz, s.lambda_star, reps, seed,
                                HPL_SOLVER_IRLS, 0, &mc),
                "table2");
          t.rows.push_back({e, muv, s.lambda_star, mc.se_estimate,
                            mc.per_coordinate_mse, mc.mc_std_error,
                            double(mc.reps), double(mc.failures)});
        }
      }
    } else if (*c_amp) {
      t.run = "amp-run --n=" + std::to_string(n) + " --p=" + std::to_string(p) +
              " --eps=" + fmt(eps) + " --mu=" + fmt(mu) +
              " --lambda=" + fmt(lambda) + " --seed=" + std::to_string(seed);
      hpl_dataset* ds = nullptr;
      if (!data_in.empty())
        check(hpl_dataset_read_csv(data_in.c_str(), &ds), "amp-run");
      else {
        hpl_noise nz = make_noise(eps, mu);
        check(hpl_dataset_generate(n, p, &nz, seed, &ds), "amp-run");
      }
      if (!data_out.empty())
        check(hpl_dataset_write_csv(ds, data_out.c_str()), "amp-run");
      long pp = hpl_dataset_p(ds);
      std::vector<double> theta(static_cast<size_t>(pp));
      hpl_fit_info info;
      hpl_status s = hpl_fit(ds, lambda, HPL_SOLVER_AMP, 0, tol, theta.data(), &info);
      hpl_dataset_free(ds);
      check(s, "amp-run");
      t.columns = {"j", "theta_j"};
      t.rows.push_back({std::string("iterations"), double(info.iterations)});
      t.rows.push_back({std::string("converged"), double(info.converged)});
      t.rows.push_back({std::string("objective"), info.objective});
      t.rows.push_back({std::string("r"), info.r});
      t.rows.push_back({std::string("mse"), info.mse});
      for (long j = 0; j < pp; ++j)
        t.rows.push_back({double(j + 1), theta[size_t(j)]});
    } else if (*c_mc) {
      t.run = "monte-carlo --n=" + std::to_string(n) + " --p=" + std::to_string(p) +
              " --eps=" + fmt(eps) + " --mu=" + fmt(mu) +
              " --lambda=" + fmt(lambda) + " --reps=" + std::to_string(reps) +
              " --seed=" + std::to_string(seed) + " --solver=" + solver_name;
      hpl_noise nz = make_noise(eps, mu);
      hpl_mc_summary mc;
      check(hpl_monte_carlo(n, p, &nz, lambda, reps, seed,
                            solver_name == "amp" ? HPL_SOLVER_AMP : HPL_SOLVER_IRLS,
                            0, &mc),
            "monte-carlo");
      t.columns = {"n", "p", "eps", "mu", "lambda", "reps", "failures", "mse",
                   "se_estimate", "mc_std_error"};
      t.rows.push_back({double(n), double(p), eps, mu, lambda, double(mc.reps),
                        double(mc.failures), mc.per_coordinate_mse,
                        mc.se_estimate, mc.mc_std_error});
    }

    output.emit(t);
  } catch (const std::exception& e) {
    std::cerr << "huberpl: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
