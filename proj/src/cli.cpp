#include "qrf/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrf/extraction.hpp"
#include "qrf/general_basis.hpp"
#include "qrf/protocol.hpp"
#include "qrf/spin.hpp"

namespace qrf::cli {
namespace {

using nlohmann::ordered_json;

struct Common {
  double spin = 0.5;
  std::string alpha = "0,0,0";
  int n_iter = 256;
  std::string state = "bloch:0,0";
  unsigned long seed = 1;
  std::string format = "json";
  std::string out_path;
};

Vec3 parse_alpha(const std::string& text) {
  const std::vector<double> v = parse_list(text);
  if (v.size() == 1) return {v[0], 0.0, 0.0};
  if (v.size() != 3) throw InvalidInput("--alpha expects one or three comma-separated values");
  return {v[0], v[1], v[2]};
}

void require_positive(int n) {
  if (n < 1) throw InvalidInput("N must be positive");
}

ordered_json vec_json(const Vec3& v) { return ordered_json::array({v[0], v[1], v[2]}); }

ordered_json ledger_json(const BatteryLedger& ledger) {
  ordered_json j = ordered_json::object();
  for (Axis part : kAxes) j[std::string(1, axis_name(part))] = vec_json(ledger[part]);
  return j;
}

ordered_json matrix_json(const ComplexMatrix& m) {
  ordered_json re = ordered_json::array(), im = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json rr = ordered_json::array(), ir = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ir.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  return {{"re", re}, {"im", im}};
}

ordered_json bounds_json(const BoundSet& b) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, value] : b.named()) j[name] = value;
  j["step_valid"] = b.step_valid;
  j["sequence_valid"] = b.sequence_valid;
  return j;
}

ordered_json envelope(const std::string& command, ordered_json config) {
  return {{"schema", 1},
          {"command", command},
          {"config", std::move(config)},
          {"results", ordered_json::object()},
          {"bounds", ordered_json::object()},
          {"passes", ordered_json::object()}};
}

bool all_true(const std::map<std::string, bool>& m) {
  return std::all_of(m.begin(), m.end(), [](const auto& kv) { return kv.second; });
}

// One sweep/rotate row in kSweepHeader order.
std::string csv_row(const std::string& n, const std::string& seed,
                    const ProtocolResult& r) {
  std::ostringstream row;
  row << n << ',' << seed << ',' << format_double(r.error_trace_norm);
  const Vec3 diag = diagonal_separation(r);
  for (double v : diag) row << ',' << format_double(v);
  const auto off = off_diagonal_separation(r);
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      if (j != k) row << ',' << format_double(off[j][k]);
    }
  }
  row << ',' << format_double(r.bound_values.total) << ','
      << format_double(r.bound_values.separation_diag) << ','
      << format_double(r.bound_values.separation_off) << ','
      << (all_true(r.passes) ? 1 : 0);
  return row.str();
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InvalidInput("cannot open output file " + path);
      stream_ = &file_;
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int protocol_exit(const ProtocolResult& r) {
  return r.bounds_applicable && !all_true(r.passes) ? kVerificationFailed : kOk;
}

int cmd_rotate(const Common& c, std::ostream& out, std::ostream& err) {
  require_positive(c.n_iter);
  const Spin s = Spin::from_value(c.spin);
  const Vec3 alpha = parse_alpha(c.alpha);
  ProtocolConfig config{s, c.n_iter, alpha, parse_state(c.state, s.dim(), c.seed)};
  config.validate();
  if (!bounds(alpha, c.n_iter).sequence_valid) {
    err << "warning: N < 36 pi, the explicit bounds do not apply\n";
  }
  const ProtocolResult r = run_protocol(config);

  Output sink(c.out_path, out);
  if (c.format == "csv") {
    sink.get() << kSweepHeader << '\n' << csv_row(std::to_string(c.n_iter), std::to_string(c.seed), r) << '\n';
    return protocol_exit(r);
  }
  ordered_json j = envelope("rotate", {{"s", c.spin},
                                       {"alpha", vec_json(alpha)},
                                       {"N", c.n_iter},
                                       {"state", c.state},
                                       {"seed", c.seed}});
  j["results"] = {{"error_trace_norm", r.error_trace_norm},
                  {"system_delta", vec_json(r.system_delta)},
                  {"ledger", ledger_json(r.ledger)},
                  {"separation_diag", vec_json(diagonal_separation(r))},
                  {"rho_final", matrix_json(r.rho_final.matrix())},
                  {"bounds_applicable", r.bounds_applicable}};
  j["bounds"] = bounds_json(r.bound_values);
  for (const auto& [name, ok] : r.passes) j["passes"][name] = ok;
  sink.get() << j.dump(2) << '\n';
  return protocol_exit(r);
}

int cmd_sweep(const Common& c, const std::string& n_list,
              const std::string& seed_list, std::ostream& out, std::ostream& err) {
  const Spin s = Spin::from_value(c.spin);
  const Vec3 alpha = parse_alpha(c.alpha);
  std::vector<int> ns;
  for (double v : parse_list(n_list)) {
    if (v != std::floor(v)) throw InvalidInput("--Ns must list integers");
    ns.push_back(static_cast<int>(v));
    require_positive(ns.back());
  }
  if (ns.empty()) throw InvalidInput("--Ns must not be empty");
  for (std::size_t k = 1; k < ns.size(); ++k) {
    if (ns[k] <= ns[k - 1]) throw InvalidInput("--Ns must be strictly increasing");
  }
  std::vector<unsigned long> seeds;
  for (double v : parse_list(seed_list)) {
    if (v < 0 || v != std::floor(v)) throw InvalidInput("--seeds must list non-negative integers");
    seeds.push_back(static_cast<unsigned long>(v));
  }
  if (seeds.empty()) throw InvalidInput("--seeds must not be empty");
  if (!bounds(alpha, ns.front()).sequence_valid) {
    err << "warning: N < 36 pi for part of the sweep, the explicit bounds do not apply there\n";
  }

  // Validate every configuration before any computation starts.
  std::vector<ProtocolConfig> configs;
  for (int n : ns) {
    for (unsigned long seed : seeds) {
      configs.push_back({s, n, alpha, parse_state(c.state, s.dim(), seed)});
      configs.back().validate();
    }
  }

  std::vector<std::future<ProtocolResult>> jobs;
  for (const ProtocolConfig& cfg : configs) {
    jobs.push_back(std::async(std::launch::async, [cfg] { return run_protocol(cfg); }));
  }
  std::vector<ProtocolResult> results;
  for (auto& job : jobs) results.push_back(job.get());

  std::vector<double> xs, ys;
  int code = kOk;
  Output sink(c.out_path, out);
  sink.get() << kSweepHeader << '\n';
  for (std::size_t k = 0; k < results.size(); ++k) {
    const int n = configs[k].n_iter;
    const unsigned long seed = seeds[k % seeds.size()];
    sink.get() << csv_row(std::to_string(n), std::to_string(seed), results[k]) << '\n';
    xs.push_back(n);
    ys.push_back(results[k].error_trace_norm);
    if (protocol_exit(results[k]) != kOk) code = kVerificationFailed;
  }
  const double slope = ns.size() > 1 ? loglog_slope(xs, ys) : NAN;
  sink.get() << "fit,," << format_double(slope) << std::string(13, ',') << '\n';
  return code;
}

int cmd_extract(const Common& c, std::ostream& out) {
  require_positive(c.n_iter);
  const DensityMatrix rho = parse_state(c.state, 2, c.seed);
  const ExtractionResult r = run_extraction(rho, c.n_iter);

  Vec3 total = r.register_delta;
  for (Axis part : kAxes) {
    for (int k = 0; k < 3; ++k) total[k] += r.reference_ledger[part][k];
  }
  const bool conserved = max_abs(total) <= 1e-8;

  ordered_json targets = ordered_json::object();
  for (Axis part : kAxes) targets[std::string(1, axis_name(part))] = vec_json(r.target_gains[index(part)]);
  const ComplexMatrix mixed = identity(2) * 0.5;

  ordered_json j = envelope("extract", {{"state", c.state}, {"N", c.n_iter}, {"seed", c.seed}});
  j["results"] = {{"gains", ledger_json(r.ledger)},
                  {"targets", targets},
                  {"reference_ledger", ledger_json(r.reference_ledger)},
                  {"register_delta", vec_json(r.register_delta)},
                  {"system_marginal", matrix_json(r.system_marginal.matrix())},
                  {"marginal_distance", trace_norm(r.system_marginal.matrix() - mixed)}};
  j["passes"] = {{"conservation", conserved}};

  Output sink(c.out_path, out);
  sink.get() << j.dump(2) << '\n';
  return conserved ? kOk : kVerificationFailed;
}

int cmd_bounds(const Common& c, std::ostream& out) {
  require_positive(c.n_iter);
  const Vec3 alpha = parse_alpha(c.alpha);
  const BoundSet b = bounds(alpha, c.n_iter);
  ordered_json j = envelope("bounds", {{"alpha", vec_json(alpha)}, {"N", c.n_iter}});
  j["bounds"] = bounds_json(b);
  Output sink(c.out_path, out);
  sink.get() << j.dump(2) << '\n';
  return kOk;
}

int cmd_basis(int n, const std::string& out_path, std::ostream& out) {
  const OperatorBasis basis = pauli_string_basis(n);
  const auto [report, table] = basis_report(basis);

  ordered_json pairs = ordered_json::array();
  for (int k = 0; k < basis.size(); ++k) {
    for (int l = k + 1; l < basis.size(); ++l) {
      const StructureEntry& e = table.at(k, l);
      ordered_json p = {{"k", basis.labels[k]}, {"l", basis.labels[l]}};
      if (e.zero) {
        p["commutator"] = "zero";
      } else {
        p["commutator"] = basis.labels[e.m];
        p["coefficient"] = {e.coefficient.real(), e.coefficient.imag()};
      }
      pairs.push_back(p);
    }
  }
  ordered_json j = envelope("basis", {{"n", n}});
  j["results"] = {{"d", basis.d},
                  {"K", basis.size()},
                  {"labels", basis.labels},
                  {"pairs_checked", report.pairs_checked},
                  {"zero_pairs", report.zero_pairs},
                  {"proportional_pairs", report.proportional_pairs},
                  {"closure_violations", report.closure_violations},
                  {"max_trace", report.max_trace},
                  {"max_overlap", report.max_overlap},
                  {"structure", pairs}};
  j["passes"] = {{"traceless", report.traceless},
                 {"orthogonal", report.orthogonal},
                 {"closed", report.closed}};
  Output sink(out_path, out);
  sink.get() << j.dump(2) << '\n';
  return report.traceless && report.orthogonal && report.closed ? kOk : kVerificationFailed;
}

int cmd_conserve(const Common& c, std::ostream& out) {
  require_positive(c.n_iter);
  const Spin s = Spin::from_value(c.spin);
  const std::vector<double> alphas = parse_list(c.alpha);
  if (alphas.size() != 1) throw InvalidInput("conserve expects a single --alpha value");
  const StepUnitary v = build_V(s, alphas[0], c.n_iter);

  ordered_json residuals = ordered_json::object();
  bool ok = true;
  for (Axis k : kAxes) {
    const double r = conservation_residual(v, k);
    residuals[std::string(1, axis_name(k))] = r;
    ok = ok && r <= kExactTol;
  }
  ordered_json j = envelope("conserve", {{"s", c.spin}, {"alpha", alphas[0]}, {"N", c.n_iter}});
  j["results"] = {{"residuals", residuals}};
  j["passes"] = {{"conservation", ok}};
  Output sink(c.out_path, out);
  sink.get() << j.dump(2) << '\n';
  return ok ? kOk : kVerificationFailed;
}

}  // namespace

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidInput("not a number: '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(v)) {
      throw InvalidInput("not a number: '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

DensityMatrix parse_state(const std::string& spec, int dim, unsigned long seed) {
  if (spec == "mixed") return DensityMatrix::maximally_mixed(dim);
  if (spec == "random") return random_pure_state(dim, seed);
  if (spec.rfind("bloch:", 0) == 0) {
    if (dim != 2) throw InvalidInput("bloch states need spin 1/2");
    const std::vector<double> angles = parse_list(spec.substr(6));
    if (angles.size() != 2) throw InvalidInput("bloch state expects THETA,PHI");
    return bloch_state(angles[0], angles[1]);
  }
  if (spec.rfind("file:", 0) == 0) {
    std::ifstream in(spec.substr(5));
    if (!in) throw InvalidInput("cannot read state file " + spec.substr(5));
    nlohmann::json j;
    try {
      in >> j;
      const auto re = j.at("re").get<std::vector<std::vector<double>>>();
      const auto im = j.at("im").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(re.size()) != dim || im.size() != re.size()) {
        throw InvalidInput("state file has the wrong dimension");
      }
      ComplexMatrix m(dim, dim);
      for (int r = 0; r < dim; ++r) {
        if (static_cast<int>(re[r].size()) != dim || static_cast<int>(im[r].size()) != dim) {
          throw InvalidInput("state file has the wrong dimension");
        }
        for (int col = 0; col < dim; ++col) m(r, col) = Complex{re[r][col], im[r][col]};
      }
      return DensityMatrix(m);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("malformed state file: ") + e.what());
    }
  }
  throw InvalidInput("unknown state spec '" + spec + "' (bloch:THETA,PHI | mixed | random | file:PATH)");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw InvalidInput("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference-frame rotations with separate angular-momentum batteries", "qrf"};
  app.require_subcommand(1);

  Common c;
  std::string n_list = "128,256,512,1024";
  std::string seed_list = "1";
  int basis_n = 1;

  CLI::App* rotate = app.add_subcommand("rotate", "Run the framed protocol for exp(-i alpha.s)");
  rotate->add_option("--s", c.spin, "Spin quantum number");
  rotate->add_option("--alpha", c.alpha, "alpha_x,alpha_y,alpha_z");
  rotate->add_option("--N", c.n_iter, "Iterations");
  rotate->add_option("--state", c.state, "bloch:THETA,PHI | mixed | random | file:PATH");
  rotate->add_option("--seed", c.seed, "Seed for random states");
  rotate->add_option("--format", c.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  rotate->add_option("--out", c.out_path, "Output path (default stdout)");

  CLI::App* sweep = app.add_subcommand("sweep", "Error and separation over a list of N");
  sweep->add_option("--s", c.spin, "Spin quantum number");
  sweep->add_option("--alpha", c.alpha, "alpha_x,alpha_y,alpha_z");
  sweep->add_option("--Ns", n_list, "Strictly increasing iteration counts");
  sweep->add_option("--state", c.state, "State spec; random draws one state per seed");
  sweep->add_option("--seeds", seed_list, "Comma-separated seeds");
  sweep->add_option("--format", c.format, "csv")->check(CLI::IsMember({"csv"}));
  sweep->add_option("--out", c.out_path, "Output path (default stdout)");

  CLI::App* extract = app.add_subcommand("extract", "Extract the spin components of a qubit");
  extract->add_option("--state", c.state, "bloch:THETA,PHI | mixed | random | file:PATH");
  extract->add_option("--N", c.n_iter, "Iterations per framed rotation");
  extract->add_option("--seed", c.seed, "Seed for random states");
  extract->add_option("--format", c.format, "json")->check(CLI::IsMember({"json"}));
  extract->add_option("--out", c.out_path, "Output path (default stdout)");

  CLI::App* bnd = app.add_subcommand("bounds", "Evaluate the explicit error bounds");
  bnd->add_option("--alpha", c.alpha, "alpha or alpha_x,alpha_y,alpha_z");
  bnd->add_option("--N", c.n_iter, "Iterations");
  bnd->add_option("--out", c.out_path, "Output path (default stdout)");

  CLI::App* basis = app.add_subcommand("basis", "Check the Pauli-string basis on n qubits");
  basis->add_option("--n", basis_n, "Number of qubits (1 or 2)");
  basis->add_option("--out", c.out_path, "Output path (default stdout)");

  CLI::App* conserve = app.add_subcommand("conserve", "Commutators of V with total spin");
  conserve->add_option("--s", c.spin, "Spin quantum number");
  conserve->add_option("--alpha", c.alpha, "Rotation angle");
  conserve->add_option("--N", c.n_iter, "Iterations");
  conserve->add_option("--out", c.out_path, "Output path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kUsage;
  }
  if (sweep->parsed() && !sweep->get_option("--format")->count()) c.format = "csv";

  try {
    if (rotate->parsed()) {
      if (!rotate->get_option("--state")->count() && c.spin != 0.5) c.state = "random";
      return cmd_rotate(c, out, err);
    }
    if (sweep->parsed()) {
      if (!sweep->get_option("--state")->count()) c.state = "random";
      return cmd_sweep(c, n_list, seed_list, out, err);
    }
    if (extract->parsed()) return cmd_extract(c, out);
    if (bnd->parsed()) return cmd_bounds(c, out);
    if (basis->parsed()) return cmd_basis(basis_n, c.out_path, out);
    if (conserve->parsed()) return cmd_conserve(c, out);
  } catch (const ScopeError& e) {
    err << "scope error: " << e.what() << '\n';
    return kScope;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace qrf::cli
