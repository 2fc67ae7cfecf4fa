#pragma once

// Command-line front end. run() is callable in-process for tests.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 precondition
// refusal, 4 admissibility violation, 5 malformed input data.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "quadsig/quadsig.hpp"

namespace quadsig::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntime = 1,
  kUsage = 2,
  kRefused = 3,
  kAdmissibility = 4,
  kDataError = 5,
};

struct usage_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fmt6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_header(std::ostream& out, const Json& config) { out << "# " << config.dump() << '\n'; }

// Writes to `path`, or to `fallback` when path is empty.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
    }
    os_ = path.empty() ? &fallback : &file_;
  }
  std::ostream& get() { return *os_; }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

// ---- rate ----------------------------------------------------------------

struct RateArgs {
  double sigma_x2 = 1.0, sigma_y2 = 1.0, d = 0.0;
  std::string csv;
};

inline int cmd_rate(const RateArgs& a, std::ostream& out) {
  const ExtendedRate r = id_rate(GaussianPair{a.sigma_x2, a.sigma_y2}, a.d);
  out << format_rate(r) << '\n';
  if (!a.csv.empty()) {
    Sink sink(a.csv, out);
    write_header(sink.get(), Json{{"command", "rate"},
                                  {"sigma_x2", a.sigma_x2},
                                  {"sigma_y2", a.sigma_y2},
                                  {"d", a.d}});
    sink.get() << "sigma_x2,sigma_y2,d,r_id\n"
               << fmt6(a.sigma_x2) << ',' << fmt6(a.sigma_y2) << ',' << fmt6(a.d) << ','
               << format_rate(r) << '\n';
  }
  return kOk;
}

// ---- sweep ---------------------------------------------------------------

struct SweepArgs {
  std::string axis;
  int figure = 0;
  std::optional<double> from, to, step;
  double sigma_x2 = 1.0, sigma_y2 = 1.0, d = 1.5, rate = 3.0;
  std::string out;
};

inline void apply_figure_preset(SweepArgs& a) {
  switch (a.figure) {
    case 0: return;
    case 2:
      a.axis = "sigma-y2";
      a.sigma_x2 = 1.0;
      a.d = 0.4;
      if (!a.from) a.from = 0.01;
      if (!a.to) a.to = 2.0;
      if (!a.step) a.step = 0.01;
      return;
    case 3:
      a.axis = "d";
      a.sigma_x2 = a.sigma_y2 = 1.0;
      if (!a.from) a.from = 0.01;
      if (!a.to) a.to = 1.99;
      if (!a.step) a.step = 0.01;
      return;
    case 4:
      a.axis = "rate";
      a.sigma_x2 = a.sigma_y2 = 1.0;
      a.d = 1.5;
      if (!a.from) a.from = 2.05;
      if (!a.to) a.to = 8.0;
      if (!a.step) a.step = 0.05;
      return;
    default: throw usage_error("--figure must be 2, 3 or 4");
  }
}

inline std::vector<double> grid(double from, double to, double step) {
  if (!(step > 0.0)) throw usage_error("--step must be positive");
  if (!(to >= from)) throw usage_error("empty range: --to is below --from");
  std::vector<double> v;
  const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long k = 0; k <= count; ++k) v.push_back(from + step * static_cast<double>(k));
  return v;
}

inline int cmd_sweep(SweepArgs a, std::ostream& out) {
  apply_figure_preset(a);
  if (a.axis.empty()) throw usage_error("sweep needs --axis or --figure");
  if (!a.from || !a.to || !a.step) throw usage_error("sweep needs --from, --to and --step");
  const auto xs = grid(*a.from, *a.to, *a.step);

  Sink sink(a.out, out);
  std::ostream& os = sink.get();
  Json cfg{{"command", "sweep"}, {"axis", a.axis},         {"figure", a.figure},
           {"from", *a.from},    {"to", *a.to},             {"step", *a.step},
           {"sigma_x2", a.sigma_x2}, {"sigma_y2", a.sigma_y2}, {"d", a.d}};
  if (a.axis == "sigma-y2") {
    write_header(os, cfg);
    os << "sigma_y2,r_id\n";
    for (double s : xs) {
      os << fmt6(s) << ',' << format_rate(id_rate(GaussianPair{a.sigma_x2, s}, a.d)) << '\n';
    }
  } else if (a.axis == "d") {
    write_header(os, cfg);
    os << "d,r_id,r_d\n";
    for (double d : xs) {
      if (!(d > 0.0)) throw usage_error("d axis values must be positive");
      os << fmt6(d) << ',' << format_rate(id_rate(GaussianPair{a.sigma_x2, a.sigma_y2}, d)) << ','
         << fmt6(rate_distortion(a.sigma_x2, d)) << '\n';
    }
  } else if (a.axis == "rate") {
    write_header(os, cfg);
    os << "rate,e_id,rho_x,rho_y\n";
    const GaussianPair pair{a.sigma_x2, a.sigma_y2};
    for (double r : xs) {
      const ExponentSolution s = id_exponent(pair, a.d, r);
      os << fmt6(r) << ',' << fmt6(s.value) << ',' << fmt6(s.rho_x) << ',' << fmt6(s.rho_y) << '\n';
    }
  } else {
    throw usage_error("--axis must be sigma-y2, d or rate");
  }
  return kOk;
}

// ---- exponent ------------------------------------------------------------

struct ExponentArgs {
  double sigma_x2 = 1.0, sigma_y2 = 1.0, d = 1.5, rate = 0.0;
  std::string csv;
};

inline int cmd_exponent(const ExponentArgs& a, std::ostream& out) {
  const GaussianPair pair{a.sigma_x2, a.sigma_y2};
  const ExponentSolution s = id_exponent(pair, a.d, a.rate);
  const double ez = similarity_exponent(pair, a.d);
  out << "e_id " << fmt6(s.value) << '\n'
      << "rho_x " << fmt6(s.rho_x) << '\n'
      << "rho_y " << fmt6(s.rho_y) << '\n'
      << "boundary gap=" << s.at_boundary.gap_constraint << " sum=" << s.at_boundary.sum_constraint
      << " rho_max=" << s.at_boundary.rho_max << '\n'
      << "e_z " << fmt6(ez) << '\n';
  if (!a.csv.empty()) {
    Sink sink(a.csv, out);
    write_header(sink.get(), Json{{"command", "exponent"},
                                  {"sigma_x2", a.sigma_x2},
                                  {"sigma_y2", a.sigma_y2},
                                  {"d", a.d},
                                  {"rate", a.rate}});
    sink.get() << "rate,e_id,rho_x,rho_y,e_z\n"
               << fmt6(a.rate) << ',' << fmt6(s.value) << ',' << fmt6(s.rho_x) << ','
               << fmt6(s.rho_y) << ',' << fmt6(ez) << '\n';
  }
  return kOk;
}

// ---- cover ---------------------------------------------------------------

struct CoverArgs {
  int n = 0;
  double sigma2 = 1.0, d0 = 0.5;
  std::uint64_t seed = 1;
  std::size_t audit_samples = 100000;
  std::size_t verify_samples = 100000;
  std::size_t max_centers = CoveringLimits{}.max_centers;
  std::string out;
};

inline int cmd_cover(const CoverArgs& a, std::ostream& out) {
  if (!(a.d0 < a.sigma2)) throw usage_error("--d0 must be below --sigma2");
  CoveringLimits limits;
  limits.max_centers = a.max_centers;
  const CoveringCode code = build_covering(a.n, a.sigma2, a.d0, a.seed, a.audit_samples, limits);
  if (!a.out.empty()) save_covering(a.out, code);
  const CoveringReport rep = verify_covering(code, a.verify_samples, derive_seed(a.seed, 0x5eed));
  out << "centers " << code.size() << '\n'
      << "rate " << fmt6(rep.rate) << '\n'
      << "bound " << fmt6(rep.bound) << '\n'
      << "overhead " << fmt6(rep.rate - rep.bound) << " budget " << fmt6(rep.overhead_budget) << '\n'
      << "coverage " << fmt6(rep.sampled_coverage) << " samples " << rep.samples << '\n';
  return kOk;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::vector<int> n_list{8, 16, 32, 64};
  double rate = 3.0, d = 1.5, sigma_x2 = 1.0, sigma_y2 = 1.0;
  std::string dist_x = "gaussian", dist_y = "gaussian";
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string mode = "basic";
  std::string codebook = "auto";
  std::uint64_t audit_pairs = 0;
  std::string out;
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.trials < 1) throw usage_error("--trials must be >= 1");
  ExperimentSpec spec;
  spec.pair = GaussianPair{a.sigma_x2, a.sigma_y2};
  spec.d = a.d;
  spec.target_rate = a.rate;
  spec.n_list = a.n_list;
  try {
    spec.spec_x = SourceSpec{parse_family(a.dist_x), a.sigma_x2};
    spec.spec_y = SourceSpec{parse_family(a.dist_y), a.sigma_y2};
    spec.mode = parse_mode(a.mode);
    spec.codebook = parse_codebook(a.codebook);
  } catch (const std::invalid_argument& e) {
    throw usage_error(e.what());
  }
  spec.trials = a.trials;
  spec.seed = a.seed;
  const auto rows = run_experiment(spec);

  Sink sink(a.out, out);
  std::ostream& os = sink.get();
  write_header(os, Json{{"command", "simulate"},  {"n_list", a.n_list},   {"rate", a.rate},
                        {"d", a.d},                {"sigma_x2", a.sigma_x2}, {"sigma_y2", a.sigma_y2},
                        {"dist_x", a.dist_x},      {"dist_y", a.dist_y},   {"trials", a.trials},
                        {"seed", a.seed},          {"mode", a.mode},       {"codebook", a.codebook},
                        {"audit_pairs", a.audit_pairs}});
  os << kCsvHeader << '\n';
  std::uint64_t fn = 0;
  for (const auto& r : rows) {
    os << to_csv(r) << '\n';
    fn += r.estimate.false_negative_count;
    if (a.audit_pairs > 0) {
      AuditResult ar;
      if (r.codebook == "explicit") {
        const CoveringCode code = build_covering(r.n, r.config.sigma_x2, r.config.d0,
                                                 derive_seed(a.seed, static_cast<std::uint64_t>(r.n)));
        ar = audit_admissibility(r.config, ExplicitQuantizer(code), spec.spec_x, a.audit_pairs, a.seed);
      } else {
        const RandomCodeEnsemble ens(r.n, r.config.sigma_x2, r.config.d0);
        ar = audit_admissibility(r.config, EnsembleQuantizer(ens), spec.spec_x, a.audit_pairs, a.seed);
      }
      fn += ar.false_negatives;
      err << "audit n=" << r.n << " similar_pairs=" << ar.similar_pairs
          << " false_negatives=" << ar.false_negatives << '\n';
    }
  }
  if (fn > 0) {
    err << "error: " << fn << " false negatives observed\n";
    return kAdmissibility;
  }
  return kOk;
}

// ---- fit -----------------------------------------------------------------

struct FitArgs {
  std::string csv;
  std::optional<double> rate, d, sigma_x2, sigma_y2;
};

struct ParsedCsv {
  Json config;
  std::vector<std::pair<double, double>> points;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_number(const std::string& s, int line_no, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw data_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
}

inline ParsedCsv read_points(std::istream& in) {
  ParsedCsv res;
  std::string line;
  int line_no = 0;
  int n_col = -1, p_col = -1;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      try {
        res.config = Json::parse(line.substr(1));
      } catch (const Json::exception&) {
        throw data_error("line " + std::to_string(line_no) + ": header is not JSON");
      }
      continue;
    }
    const auto cells = split_csv_line(line);
    if (n_col < 0) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] == "n") n_col = static_cast<int>(k);
        if (cells[k] == "p_hat") p_col = static_cast<int>(k);
      }
      if (n_col < 0 || p_col < 0) {
        throw data_error("line " + std::to_string(line_no) + ": column header needs n and p_hat");
      }
      columns = cells.size();
      continue;
    }
    if (cells.size() != columns) {
      throw data_error("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                       " fields, found " + std::to_string(cells.size()));
    }
    const double n = parse_number(cells[n_col], line_no, "n");
    const double p = parse_number(cells[p_col], line_no, "p_hat");
    if (!(p >= 0.0 && p <= 1.0)) {
      throw data_error("line " + std::to_string(line_no) + ": p_hat outside [0, 1]");
    }
    res.points.emplace_back(n, p);
  }
  if (res.points.empty()) throw data_error("no data rows");
  return res;
}

inline int cmd_fit(const FitArgs& a, std::ostream& out) {
  std::ifstream in(a.csv);
  if (!in) throw data_error("cannot open " + a.csv);
  const ParsedCsv csv = read_points(in);
  ExponentFit fit;
  try {
    fit = fit_exponent(csv.points);
  } catch (const std::invalid_argument& e) {
    throw data_error(e.what());
  }
  out << "slope " << fmt6(fit.slope) << '\n' << "intercept " << fmt6(fit.intercept) << '\n';

  auto pick = [&](const std::optional<double>& flag, const char* key) -> std::optional<double> {
    if (flag) return flag;
    if (csv.config.is_object() && csv.config.contains(key) && csv.config[key].is_number()) {
      return csv.config[key].get<double>();
    }
    return std::nullopt;
  };
  const auto rate = pick(a.rate, "rate");
  const auto d = pick(a.d, "d");
  const double sx = pick(a.sigma_x2, "sigma_x2").value_or(1.0);
  const double sy = pick(a.sigma_y2, "sigma_y2").value_or(1.0);
  if (rate && d) {
    const ExponentSolution s = id_exponent(GaussianPair{sx, sy}, *d, *rate);
    out << "e_id " << fmt6(s.value) << '\n';
    if (s.value > 0.0) out << "ratio " << fmt6(fit.slope / s.value) << '\n';
  }
  return kOk;
}

// ---- entry point ---------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Identification rate, exponent and similarity-query schemes for Gaussian data"};
  app.require_subcommand(1);

  RateArgs rate_args;
  auto* rate = app.add_subcommand("rate", "identification rate R_ID in bits/symbol");
  rate->add_option("--sigma-x2", rate_args.sigma_x2)->required()->check(CLI::PositiveNumber);
  rate->add_option("--sigma-y2", rate_args.sigma_y2)->required()->check(CLI::PositiveNumber);
  rate->add_option("--d", rate_args.d)->required()->check(CLI::PositiveNumber);
  rate->add_option("--csv", rate_args.csv, "also write a CSV row here");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "tabulate R_ID, R(D) or E_ID over a grid");
  sweep->add_option("--axis", sweep_args.axis)->check(CLI::IsMember({"sigma-y2", "d", "rate"}));
  sweep->add_option("--figure", sweep_args.figure, "preset: 2, 3 or 4");
  sweep->add_option("--from", sweep_args.from);
  sweep->add_option("--to", sweep_args.to);
  sweep->add_option("--step", sweep_args.step);
  sweep->add_option("--sigma-x2", sweep_args.sigma_x2)->check(CLI::PositiveNumber);
  sweep->add_option("--sigma-y2", sweep_args.sigma_y2)->check(CLI::PositiveNumber);
  sweep->add_option("--d", sweep_args.d)->check(CLI::PositiveNumber);
  sweep->add_option("--out", sweep_args.out);

  ExponentArgs exp_args;
  auto* exponent = app.add_subcommand("exponent", "identification exponent E_ID");
  exponent->add_option("--sigma-x2", exp_args.sigma_x2)->check(CLI::PositiveNumber);
  exponent->add_option("--sigma-y2", exp_args.sigma_y2)->check(CLI::PositiveNumber);
  exponent->add_option("--d", exp_args.d)->required()->check(CLI::PositiveNumber);
  exponent->add_option("--rate", exp_args.rate)->required()->check(CLI::NonNegativeNumber);
  exponent->add_option("--csv", exp_args.csv);

  CoverArgs cover_args;
  auto* cover = app.add_subcommand("cover", "build and audit a covering code");
  cover->add_option("--n", cover_args.n)->required()->check(CLI::Range(2, 1 << 20));
  cover->add_option("--sigma2", cover_args.sigma2)->required()->check(CLI::PositiveNumber);
  cover->add_option("--d0", cover_args.d0)->required()->check(CLI::PositiveNumber);
  cover->add_option("--seed", cover_args.seed)->required();
  cover->add_option("--audit-samples", cover_args.audit_samples)->check(CLI::PositiveNumber);
  cover->add_option("--verify-samples", cover_args.verify_samples)->check(CLI::PositiveNumber);
  cover->add_option("--max-centers", cover_args.max_centers)->check(CLI::PositiveNumber);
  cover->add_option("--out", cover_args.out, "write the code as JSON");

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo Pr{maybe} per block length");
  simulate->add_option("--n-list", sim_args.n_list)->delimiter(',')->check(CLI::Range(2, 4096));
  simulate->add_option("--rate", sim_args.rate)->required();
  simulate->add_option("--d", sim_args.d)->required()->check(CLI::PositiveNumber);
  simulate->add_option("--sigma-x2", sim_args.sigma_x2)->check(CLI::PositiveNumber);
  simulate->add_option("--sigma-y2", sim_args.sigma_y2)->check(CLI::PositiveNumber);
  simulate->add_option("--dist-x", sim_args.dist_x);
  simulate->add_option("--dist-y", sim_args.dist_y);
  simulate->add_option("--trials", sim_args.trials);
  simulate->add_option("--seed", sim_args.seed);
  simulate->add_option("--mode", sim_args.mode)->check(CLI::IsMember({"basic", "shape_gain"}));
  simulate->add_option("--codebook", sim_args.codebook)
      ->check(CLI::IsMember({"auto", "explicit", "ensemble"}));
  simulate->add_option("--audit-pairs", sim_args.audit_pairs);
  simulate->add_option("--out", sim_args.out);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit an exponent to simulate output");
  fit->add_option("--csv", fit_args.csv)->required();
  fit->add_option("--rate", fit_args.rate);
  fit->add_option("--d", fit_args.d);
  fit->add_option("--sigma-x2", fit_args.sigma_x2);
  fit->add_option("--sigma-y2", fit_args.sigma_y2);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (rate->parsed()) return cmd_rate(rate_args, out);
    if (sweep->parsed()) return cmd_sweep(sweep_args, out);
    if (exponent->parsed()) return cmd_exponent(exp_args, out);
    if (cover->parsed()) return cmd_cover(cover_args, out);
    if (simulate->parsed()) return cmd_simulate(sim_args, out, err);
    if (fit->parsed()) return cmd_fit(fit_args, out);
  } catch (const usage_error& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const precondition_failed& e) {
    err << "refused: " << e.what() << '\n';
    return kRefused;
  } catch (const data_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace quadsig::cli
