#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "copulafit/copulas.hpp"
#include "copulafit/empirical.hpp"
#include "copulafit/estimators.hpp"
#include "copulafit/gof.hpp"
#include "copulafit/hydro.hpp"
#include "copulafit/simstudy.hpp"

using json = nlohmann::ordered_json;
namespace cf = copulafit;

namespace {

constexpr const char* drought_header = "event,start_year,start_month,duration,severity,interval";

int default_jobs() {
  const char* env = std::getenv("COPULAFIT_JOBS");
  if (!env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return 1;
  return static_cast<int>(v);
}

// Two numeric columns, with an optional single header row; drought-event CSV
// is recognized by its header and reduced to the requested pair.
cf::RawSample load_xy(std::istream& is, const std::string& pair, bool abs_severity) {
  std::string first;
  if (!std::getline(is, first)) throw std::invalid_argument("input csv: empty input");
  if (!first.empty() && first.back() == '\r') first.pop_back();
  if (first == drought_header) {
    std::stringstream all;
    all << first << '\n' << is.rdbuf();
    cf::DroughtRecord rec = cf::read_droughts_csv(all);
    return pair == "duration-interval" ? cf::duration_interval_pairs(rec)
                                       : cf::severity_interval_pairs(rec, abs_severity);
  }
  cf::RawSample rs;
  int lineno = 0;
  std::string line = first;
  bool have = true;
  while (have) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) {
      std::size_t comma = line.find(',');
      bool parsed = false;
      if (comma != std::string::npos && line.find(',', comma + 1) == std::string::npos) {
        std::string a = line.substr(0, comma), b = line.substr(comma + 1);
        std::size_t ua = 0, ub = 0;
        try {
          double xa = std::stod(a, &ua), xb = std::stod(b, &ub);
          if (ua == a.size() && ub == b.size()) {
            rs.x.push_back(xa);
            rs.y.push_back(xb);
            parsed = true;
          }
        } catch (const std::exception&) {
        }
      }
      if (!parsed && lineno > 1) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "input csv: malformed row at line %d", lineno);
        throw std::invalid_argument(buf);
      }
      // a non-numeric first row is treated as a header and skipped
    }
    have = static_cast<bool>(std::getline(is, line));
  }
  if (rs.x.size() < 2) throw std::invalid_argument("input csv: need at least 2 data rows");
  return rs;
}

cf::RawSample load_xy_path(const std::string& path, const std::string& pair, bool abs_severity) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  return load_xy(in, pair, abs_severity);
}

std::unique_ptr<std::ofstream> open_out(const std::string& path, std::ostream*& os) {
  if (path.empty()) {
    os = &std::cout;
    return nullptr;
  }
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw std::invalid_argument("cannot open output file '" + path + "'");
  os = f.get();
  return f;
}

json fit_json(const cf::FitResult& fit) {
  json j;
  j["method"] = fit.method;
  j["theta_hat"] = fit.theta_hat;
  j["tau_hat"] = fit.tau_hat;
  j["objective_at_opt"] = fit.objective_at_opt;
  j["evaluations"] = fit.evaluations;
  j["converged"] = fit.converged;
  return j;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semiparametric copula fitting, goodness of fit, and drought analysis"};
  app.require_subcommand(1);

  std::string data_path, out_path, family_s = "clayton", method_s = "mpl";
  std::string pair_s = "severity-interval";
  double k_frac = 0.5, nu = 4.0;
  bool abs_severity = false;
  std::uint64_t seed = 1;
  int B = 199, jobs = default_jobs(), timescale = 1;

  CLI::App* fit = app.add_subcommand("fit", "fit a copula family to bivariate data");
  fit->add_option("data", data_path, "input csv")->required();
  fit->add_option("--family", family_s, "clayton|gumbel|frank|gaussian|student_t")->required();
  fit->add_option("--method", method_s, "mpl|mphd|mpnd|mpad:<alpha>");
  fit->add_option("--k-frac", k_frac, "nearest-neighbor fraction for the reference density");
  fit->add_option("--nu", nu, "degrees of freedom for student_t");
  fit->add_option("--seed", seed, "rng seed (fits are deterministic; recorded in output)");
  fit->add_option("--pair", pair_s, "severity-interval|duration-interval for drought csv");
  fit->add_flag("--abs-severity", abs_severity, "use |severity| for drought pairs");
  fit->add_option("--out", out_path, "output path (default stdout)");

  CLI::App* gof = app.add_subcommand("gof", "parametric bootstrap goodness of fit");
  gof->add_option("data", data_path, "input csv")->required();
  gof->add_option("--family", family_s, "copula family")->required();
  gof->add_option("--method", method_s, "estimation method");
  gof->add_option("-B,--bootstrap", B, "bootstrap replicates (>= 99)");
  gof->add_option("--seed", seed, "rng seed");
  gof->add_option("--k-frac", k_frac, "nearest-neighbor fraction");
  gof->add_option("--nu", nu, "degrees of freedom for student_t");
  gof->add_option("--jobs", jobs, "worker threads");
  gof->add_option("--pair", pair_s, "severity-interval|duration-interval for drought csv");
  gof->add_flag("--abs-severity", abs_severity, "use |severity| for drought pairs");
  gof->add_option("--out", out_path, "output path (default stdout)");

  std::string families_s = "clayton,gumbel,frank,gaussian,student_t";
  std::string taus_s = "0.1,0.2,0.4,0.6,0.8", ns_s = "30,75,150", methods_s = "mpl,mphd,mpnd";
  std::string config_path;
  int M = 300;
  bool progress = false;
  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo bias/mse study over a grid");
  sim->add_option("--config", config_path, "json config (grid flags override)");
  sim->add_option("--families", families_s, "comma list");
  sim->add_option("--taus", taus_s, "comma list");
  sim->add_option("--ns", ns_s, "comma list of sample sizes");
  sim->add_option("--methods", methods_s, "comma list");
  sim->add_option("-M,--replications", M, "Monte Carlo replications per cell");
  sim->add_option("--k-frac", k_frac, "nearest-neighbor fraction");
  sim->add_option("--nu", nu, "degrees of freedom for student_t");
  sim->add_option("--seed", seed, "master seed");
  sim->add_option("--jobs", jobs, "worker threads");
  sim->add_flag("--progress", progress, "log finished cells to stderr");
  sim->add_option("--out", out_path, "output csv path (default stdout)");

  CLI::App* spi_cmd = app.add_subcommand("spi", "standardized precipitation index");
  spi_cmd->add_option("data", data_path, "precipitation csv")->required();
  spi_cmd->add_option("--timescale", timescale, "rolling window in months");
  spi_cmd->add_option("--out", out_path, "output csv path (default stdout)");

  CLI::App* dr = app.add_subcommand("droughts", "extract drought events from precipitation");
  dr->add_option("data", data_path, "precipitation csv")->required();
  dr->add_option("--timescale", timescale, "rolling window in months");
  dr->add_option("--out", out_path, "output csv path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    std::ostream* os = nullptr;
    std::unique_ptr<std::ofstream> holder;

    if (fit->parsed()) {
      cf::Method method = cf::Method::parse(method_s);
      cf::Family family = cf::family_from_name(family_s);
      cf::RawSample rs = load_xy_path(data_path, pair_s, abs_severity);
      cf::PseudoSample ps = cf::pseudo_observations(rs);
      cf::FitResult r = cf::fit_with_method(method, family, ps, k_frac, nu);
      json j = fit_json(r);
      j["family"] = family_s;
      j["n"] = ps.size();
      j["seed"] = seed;
      holder = open_out(out_path, os);
      *os << j.dump() << '\n';
    } else if (gof->parsed()) {
      cf::Method method = cf::Method::parse(method_s);
      cf::Family family = cf::family_from_name(family_s);
      cf::RawSample rs = load_xy_path(data_path, pair_s, abs_severity);
      cf::PseudoSample ps = cf::pseudo_observations(rs);
      cf::GofResult r = cf::bootstrap_pvalue(family, ps, method, B, seed, k_frac, nu, jobs);
      json j;
      j["family"] = family_s;
      j["method"] = r.method;
      j["s_n"] = r.s_n;
      j["p_value"] = r.p_value;
      j["bootstrap_reps"] = r.bootstrap_reps;
      j["dropped"] = r.dropped;
      j["aic"] = r.aic;
      j["theta_hat"] = r.fit.theta_hat;
      j["tau_hat"] = r.fit.tau_hat;
      j["seed"] = seed;
      holder = open_out(out_path, os);
      *os << j.dump() << '\n';
    } else if (sim->parsed()) {
      cf::StudyConfig cfg;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw std::invalid_argument("cannot open config '" + config_path + "'");
        try {
          json jc = json::parse(in);
          // explicit grid flags take precedence over the config file
          auto absent = [&](const char* flag) { return sim->count(flag) == 0; };
          if (jc.contains("families") && absent("--families"))
            families_s = jc["families"].get<std::string>();
          if (jc.contains("taus") && absent("--taus")) taus_s = jc["taus"].get<std::string>();
          if (jc.contains("ns") && absent("--ns")) ns_s = jc["ns"].get<std::string>();
          if (jc.contains("methods") && absent("--methods"))
            methods_s = jc["methods"].get<std::string>();
          if (jc.contains("replications") && absent("--replications"))
            M = jc["replications"].get<int>();
          if (jc.contains("k_frac") && absent("--k-frac")) k_frac = jc["k_frac"].get<double>();
          if (jc.contains("nu") && absent("--nu")) nu = jc["nu"].get<double>();
          if (jc.contains("seed") && absent("--seed")) seed = jc["seed"].get<std::uint64_t>();
          if (jc.contains("jobs") && absent("--jobs")) jobs = jc["jobs"].get<int>();
        } catch (const json::exception& e) {
          throw std::invalid_argument("config '" + config_path + "': " + e.what());
        }
      }
      cfg.families.clear();
      for (const auto& f : split_list(families_s)) cfg.families.push_back(cf::family_from_name(f));
      cfg.taus.clear();
      for (const auto& t : split_list(taus_s)) cfg.taus.push_back(std::stod(t));
      cfg.ns.clear();
      for (const auto& n : split_list(ns_s)) cfg.ns.push_back(std::stoi(n));
      cfg.methods.clear();
      for (const auto& m : split_list(methods_s)) cfg.methods.push_back(cf::Method::parse(m));
      cfg.replications = M;
      cfg.k_frac = k_frac;
      cfg.nu = nu;
      cfg.master_seed = seed;
      cfg.jobs = jobs;
      cfg.progress = progress;
      std::vector<cf::CellReport> rows = cf::run_study(cfg);
      holder = open_out(out_path, os);
      cf::write_csv(*os, rows);
    } else if (spi_cmd->parsed()) {
      std::ifstream in(data_path);
      if (!in) throw std::invalid_argument("cannot open input file '" + data_path + "'");
      cf::PrecipSeries ps = cf::read_precip_csv(in);
      cf::SpiSeries s = cf::spi(ps, timescale);
      holder = open_out(out_path, os);
      cf::write_spi_csv(*os, s);
    } else if (dr->parsed()) {
      std::ifstream in(data_path);
      if (!in) throw std::invalid_argument("cannot open input file '" + data_path + "'");
      cf::PrecipSeries ps = cf::read_precip_csv(in);
      cf::SpiSeries s = cf::spi(ps, timescale);
      cf::DroughtRecord rec = cf::extract_droughts(s);
      holder = open_out(out_path, os);
      cf::write_droughts_csv(*os, rec);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
