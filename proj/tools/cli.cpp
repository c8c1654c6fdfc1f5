#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "rmtp/bessel.hpp"
#include "rmtp/errors.hpp"
#include "rmtp/json_io.hpp"
#include "rmtp/predict.hpp"
#include "rmtp/simulate.hpp"
#include "rmtp/stats.hpp"

namespace rmtp::cli {

namespace {

Json load_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Fills fields from a JSON config unless the matching flag was given.
struct Merge {
  const Json& cfg;
  CLI::App* app;

  template <class T>
  void take(const char* key, const char* flag, T& dst) const {
    if (!cfg.contains(key) || app->count(flag) > 0) return;
    try {
      dst = cfg.at(key).get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
  }
};

std::vector<std::pair<double, double>> parse_pairs(const std::string& s, const char* what) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto c = item.find(':');
    if (c == std::string::npos) throw ConfigError(std::string(what) + ": expected a:b, got '" + item + "'");
    try {
      std::size_t p1 = 0, p2 = 0;
      double a = std::stod(item.substr(0, c), &p1), b = std::stod(item.substr(c + 1), &p2);
      if (p1 != c || p2 != item.size() - c - 1) throw std::invalid_argument("trailing");
      out.emplace_back(a, b);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------- measure flags

struct MeasureFlags {
  std::string ensemble = "ginibre";
  double gamma = 2.0, alpha_hat = 1.0, R_hat = 1.0, x0 = 0.0;
  std::string atoms;
  Json measure;  // from config; overrides the flags

  void add(CLI::App* sc) {
    sc->add_option("--ensemble", ensemble, "ginibre, jacobi, pointmass or atomic")
        ->check(CLI::IsMember({"ginibre", "jacobi", "pointmass", "atomic"}));
    sc->add_option("--gamma", gamma, "Ginibre aspect ratio L/N (> 1)");
    sc->add_option("--alpha-hat", alpha_hat, "Jacobi alpha/N");
    sc->add_option("--r-hat", R_hat, "Jacobi R/N");
    sc->add_option("--x0", x0, "point mass location");
    sc->add_option("--atoms", atoms, "atomic measure as s:w,s:w,...");
  }

  void merge(const Merge& m) {
    m.take("ensemble", "--ensemble", ensemble);
    m.take("gamma", "--gamma", gamma);
    m.take("alpha_hat", "--alpha-hat", alpha_hat);
    m.take("R_hat", "--r-hat", R_hat);
    m.take("x0", "--x0", x0);
    m.take("atoms", "--atoms", atoms);
    if (m.cfg.contains("measure")) measure = m.cfg.at("measure");
  }

  SpectralMeasure build() const {
    if (!measure.is_null()) return measure_from_json(measure);
    if (ensemble == "ginibre") return SpectralMeasure::ginibre(gamma);
    if (ensemble == "jacobi") return SpectralMeasure::jacobi(alpha_hat, R_hat);
    if (ensemble == "pointmass") return SpectralMeasure::point_mass(x0);
    std::vector<double> s, w;
    for (auto [a, b] : parse_pairs(atoms, "--atoms")) {
      s.push_back(a);
      w.push_back(b);
    }
    return SpectralMeasure::atomic(s, w);
  }
};

const std::initializer_list<const char*> kMeasureKeys = {"ensemble", "gamma", "alpha_hat", "R_hat", "x0", "atoms",
                                                         "measure"};

std::vector<const char*> keys_with(std::initializer_list<const char*> a, std::initializer_list<const char*> b) {
  std::vector<const char*> v(a);
  v.insert(v.end(), b);
  return v;
}

void check_keys(const Json& cfg, const std::vector<const char*>& allowed, const std::string& where) {
  if (!cfg.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (auto it = cfg.begin(); it != cfg.end(); ++it)
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
      throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError("cannot write '" + path + "'");
  os << text;
}

// ---------------------------------------------------------------- predict

struct PredictOptions {
  MeasureFlags m;
  int M = 1;
  std::string regime = "fixed";
  std::vector<int> moments{1, 2};
  bool covariances = true;
  bool cumulants = false;
  std::string cov2d;
  double eps_inner = 0.15, eps_outer = 0.30;
  std::string config, out;
};

Json record(const Prediction& p) { return prediction_to_json(p); }

int cmd_predict(CLI::App* sc, PredictOptions& o, std::ostream& out) {
  if (!o.config.empty()) {
    Json cfg = load_json(o.config);
    check_keys(cfg,
               keys_with(kMeasureKeys, {"M", "regime", "moments", "covariances", "cumulants", "cov2d", "eps_inner",
                                        "eps_outer", "out"}),
               "predict config");
    Merge mg{cfg, sc};
    o.m.merge(mg);
    mg.take("M", "--M", o.M);
    mg.take("regime", "--regime", o.regime);
    mg.take("moments", "--moments", o.moments);
    mg.take("covariances", "--no-covariances", o.covariances);
    mg.take("cumulants", "--cumulants", o.cumulants);
    mg.take("cov2d", "--cov2d", o.cov2d);
    mg.take("eps_inner", "--eps-inner", o.eps_inner);
    mg.take("eps_outer", "--eps-outer", o.eps_outer);
    mg.take("out", "--out", o.out);
  }
  if (o.regime != "fixed" && o.regime != "lyapunov") throw ConfigError("regime must be fixed or lyapunov");
  if (o.moments.empty()) throw ConfigError("no moments requested");
  for (int k : o.moments)
    if (k < 0) throw ConfigError("moment indices must be >= 0");
  if (!(0.0 < o.eps_inner && o.eps_inner < o.eps_outer)) throw ConfigError("need 0 < eps_inner < eps_outer");

  SpectralMeasure mu = o.m.build();
  bool lyap = o.regime == "lyapunov";
  EnsembleModel model = EnsembleModel::identical(mu, o.M, lyap ? Regime::Lyapunov : Regime::FixedM);
  ContourSpec cs;
  cs.eps_inner = o.eps_inner;
  cs.eps_outer = o.eps_outer;

  Json preds = Json::array();
  for (int k : o.moments) preds.push_back(record(lyap ? lln_moment_lyapunov(model, k, cs) : lln_moment_fixedM(model, k, cs)));
  if (o.covariances)
    for (std::size_t i = 0; i < o.moments.size(); ++i)
      for (std::size_t j = i; j < o.moments.size(); ++j) {
        int k = o.moments[i], l = o.moments[j];
        if (k < 1 || l < 1) continue;
        preds.push_back(record(lyap ? clt_cov_lyapunov(model, k, l, cs) : clt_cov_fixedM(model, k, l, cs)));
      }
  if (o.cumulants)
    for (int order : {3, 4})
      for (int k : o.moments) {
        if (k < 1) continue;
        Prediction p;
        p.statistic = "cumulant" + std::to_string(order);
        p.k = k;
        p.contour = cs;
        preds.push_back(record(p));
      }
  if (!o.cov2d.empty()) {
    if (!lyap) throw ConfigError("cov2d needs the lyapunov regime");
    for (auto [alpha, beta] : parse_pairs(o.cov2d, "--cov2d"))
      for (int k : o.moments)
        for (int l : o.moments) {
          if (k < 1 || l < 1) continue;
          Json r = record(cov_2d(model, k, alpha, l, beta, cs));
          r["alpha"] = alpha;
          r["beta"] = beta;
          preds.push_back(r);
        }
  }
  Json doc = {{"schema", "rmtp.predictions/1"},
              {"measure", measure_to_json(mu)},
              {"M", o.M},
              {"regime", o.regime},
              {"predictions", preds}};
  emit(o.out, doc.dump(2) + "\n", out);
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string ensemble = "ginibre";
  int N = 0, L = 0, alpha = 0, R = 0;
  double gamma = 0.0;
  std::vector<double> lambda;
  std::string atoms;
  int M = 1, trials = 1;
  std::string backend = "bigfloat";
  std::vector<double> checkpoints;
  std::uint64_t seed = 0;
  int threads = std::max(1u, std::thread::hardware_concurrency());
  int chunk = 16;
  std::string config, out, resume;
};

FactorSpec build_factor(const SimulateOptions& o) {
  if (o.ensemble == "ginibre") {
    int L = o.L;
    if (L == 0 && o.gamma > 0.0) {
      double l = o.gamma * o.N;
      if (std::abs(l - std::round(l)) > 1e-9) throw ConfigError("gamma * N must be an integer");
      L = static_cast<int>(std::lround(l));
    }
    return FactorSpec::ginibre(o.N, L);
  }
  if (o.ensemble == "jacobi") return FactorSpec::jacobi(o.N, o.alpha, o.R);
  if (!o.lambda.empty()) {
    if (o.N != 0 && o.N != static_cast<int>(o.lambda.size())) throw ConfigError("--N does not match --lambda");
    return FactorSpec::fixed(o.lambda);
  }
  if (o.atoms.empty()) throw ConfigError("fixed ensemble needs --lambda or --atoms");
  std::vector<double> s, w;
  for (auto [a, b] : parse_pairs(o.atoms, "--atoms")) {
    s.push_back(a);
    w.push_back(b);
  }
  if (o.N < 1) throw ConfigError("fixed ensemble with --atoms needs --N");
  return FactorSpec::fixed(quantile_spectrum(SpectralMeasure::atomic(s, w), o.N));
}

int cmd_simulate(CLI::App* sc, SimulateOptions& o, std::ostream& out) {
  if (!o.config.empty()) {
    Json cfg = load_json(o.config);
    check_keys(cfg,
               {"ensemble", "N", "L", "gamma", "alpha", "R", "lambda", "atoms", "M", "trials", "backend", "checkpoints",
                "threads", "chunk", "out", "resume"},
               "simulate config");
    Merge mg{cfg, sc};
    mg.take("ensemble", "--ensemble", o.ensemble);
    mg.take("N", "--N", o.N);
    mg.take("L", "--L", o.L);
    mg.take("gamma", "--gamma", o.gamma);
    mg.take("alpha", "--alpha", o.alpha);
    mg.take("R", "--R", o.R);
    mg.take("lambda", "--lambda", o.lambda);
    mg.take("atoms", "--atoms", o.atoms);
    mg.take("M", "--M", o.M);
    mg.take("trials", "--trials", o.trials);
    mg.take("backend", "--backend", o.backend);
    mg.take("checkpoints", "--checkpoints", o.checkpoints);
    mg.take("threads", "--threads", o.threads);
    mg.take("chunk", "--chunk", o.chunk);
    mg.take("out", "--out", o.out);
    mg.take("resume", "--resume", o.resume);
  }
  if (o.ensemble != "ginibre" && o.ensemble != "jacobi" && o.ensemble != "fixed")
    throw ConfigError("ensemble must be ginibre, jacobi or fixed");
  if (o.threads < 1) throw ConfigError("threads must be >= 1");
  if (o.chunk < 1) throw ConfigError("chunk must be >= 1");

  TrialPlan plan;
  plan.spec = build_factor(o);
  plan.M = o.M;
  plan.backend = parse_backend(o.backend);
  plan.checkpoints = o.checkpoints;
  plan.seed = o.seed;
  plan.trials = o.trials;
  plan.threads = o.threads;
  if (plan.trials < 1) throw DomainError("trials must be >= 1");
  if (plan.M < 1) throw DomainError("M must be >= 1");

  std::vector<ProductResult> rows;
  if (o.resume.empty()) {
    rows = run_trials(plan);
  } else {
    CheckpointHeader want;
    want.N = plan.spec.N;
    want.M = plan.M;
    want.backend = static_cast<std::int32_t>(plan.backend);
    want.seed = plan.seed;
    want.alphas = plan.checkpoints;
    want.has_qr = plan.backend != Backend::BigFloat;
    std::vector<ProductResult> done;
    if (std::filesystem::exists(o.resume)) {
      CheckpointHeader h;
      done = read_checkpoint(o.resume, h);
      if (h.N != want.N || h.M != want.M || h.backend != want.backend || h.seed != want.seed ||
          h.alphas != want.alphas)
        throw ConfigError("checkpoint '" + o.resume + "' was written by a different run");
      if (static_cast<int>(done.size()) > plan.trials) done.resize(plan.trials);
    }
    rows = done;
    for (int have = static_cast<int>(done.size()); have < plan.trials;) {
      TrialPlan part = plan;
      part.trials = std::min(plan.trials, have + o.chunk);
      rows = run_trials(part, have, &rows);
      have = part.trials;
      write_checkpoint(o.resume, want, rows);
    }
  }
  std::ostringstream csv;
  write_trials_csv(csv, rows);
  emit(o.out, csv.str(), out);
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
  std::string predictions, trials;
  double z = 3.0;
  std::string out_csv, out_json;
};

MomentSet moments_at(const std::vector<ProductResult>& rows, const std::vector<int>& ks, double alpha) {
  const auto& cps = rows.front().checkpoints;
  bool has = std::any_of(cps.begin(), cps.end(), [&](const auto& c) { return std::abs(c.first - alpha) < 1e-12; });
  if (!has && std::abs(alpha - 1.0) > 1e-12)
    throw ConfigError("trials have no checkpoint at alpha = " + std::to_string(alpha));
  return empirical_moments(rows, ks, MomentScale::Lyapunov, has ? alpha : -1.0);
}

std::vector<double> times(std::vector<double> v, double f) {
  for (double& x : v) x *= f;
  return v;
}

int cmd_compare(CompareOptions& o, std::ostream& out) {
  Json pj = load_json(o.predictions);
  require_keys(pj, {"schema", "measure", "M", "regime", "predictions"}, "predictions file");
  if (pj.value("schema", "") != "rmtp.predictions/1") throw ConfigError("unsupported predictions schema");
  std::string regime = pj.at("regime").get<std::string>();
  bool lyap = regime == "lyapunov";
  int Mpred = pj.at("M").get<int>();

  std::ifstream is(o.trials);
  if (!is) throw ConfigError("cannot open '" + o.trials + "'");
  std::vector<ProductResult> rows = read_trials_csv(is);
  if (rows.empty()) throw ConfigError("trial CSV has no rows");
  const int N = rows.front().N, M = rows.front().M;
  if (!lyap && M != Mpred) throw ConfigError("trials have M = " + std::to_string(M) + ", predictions M = " +
                                             std::to_string(Mpred));
  MomentScale scale = lyap ? MomentScale::Lyapunov : MomentScale::Raw;
  const double sqrtM = std::sqrt(static_cast<double>(M));

  std::vector<StatReport> reports;
  for (const auto& p : pj.at("predictions")) {
    std::string stat = p.at("statistic").get<std::string>();
    int k = p.at("k").get<int>(), l = p.at("l").get<int>();
    double value = p.at("value").get<double>();
    std::string id = stat + "[k=" + std::to_string(k);
    Estimate est;
    if (stat == "lln_moment_fixedM" || stat == "lln_moment_lyapunov") {
      id += "]";
      est = mean_estimate(times(empirical_moments(rows, {k}, scale).of(k), 1.0 / N));
    } else if (stat == "clt_cov_fixedM" || stat == "clt_cov_lyapunov") {
      id += ",l=" + std::to_string(l) + "]";
      est = covariance_estimate(empirical_moments(rows, {k, l}, scale), k, l, lyap);
    } else if (stat == "cumulant3" || stat == "cumulant4") {
      id += "]";
      est = cumulant_estimate(empirical_moments(rows, {k}, scale), k, stat == "cumulant3" ? 3 : 4, lyap);
    } else if (stat == "cov_2d") {
      double a = p.at("alpha").get<double>(), b = p.at("beta").get<double>();
      char buf[96];
      std::snprintf(buf, sizeof buf, ",alpha=%g,l=%d,beta=%g]", a, l, b);
      id += buf;
      MomentSet ma = moments_at(rows, {k}, a), mb = moments_at(rows, {l}, b);
      if (ma.T < 50) throw TooFewTrials("covariance needs T >= 50");
      est = covariance_jackknife(times(ma.of(k), sqrtM), times(mb.of(l), sqrtM));
    } else {
      throw ConfigError("unknown statistic '" + stat + "'");
    }
    reports.push_back(make_report(id, value, est, o.z));
  }
  std::ostringstream csv;
  write_reports_csv(csv, reports);
  emit(o.out_csv, csv.str(), out);
  if (!o.out_json.empty()) emit(o.out_json, reports_json(reports) + "\n", out);
  bool ok = std::all_of(reports.begin(), reports.end(), [](const StatReport& r) { return r.pass; });
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- bessel-check

struct BesselCheckOptions {
  int spectra = 5;
  std::uint64_t seed = 1;
  std::string out;
};

double rel_err(Cx a, Cx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

int cmd_bessel_check(BesselCheckOptions& o, std::ostream& out) {
  if (o.spectra < 1) throw ConfigError("spectra must be >= 1");
  Philox rng(o.seed, 0);
  auto spectrum = [&](int N) {
    std::vector<double> v(N);
    for (double& x : v) x = rng.uniform();
    std::sort(v.rbegin(), v.rend());
    return LogSpectrum(v);
  };

  double smoke = rel_err(bessel_ratio_direct(LogSpectrum({0.7}), {{Cx(2.5, 0.0), 0}}), Cx(std::exp(2.5 * 0.7), 0.0));
  double contour = 0.0, multi = 0.0;
  for (int N = 2; N <= 4; ++N)
    for (int b = 0; b < N; ++b)
      for (int a = N; a <= N + 3; ++a)
        for (int s = 0; s < o.spectra; ++s) {
          LogSpectrum ls = spectrum(N);
          HookIndex h{Cx(a, 0.0), b};
          contour = std::max(contour, rel_err(bessel_ratio_contour(ls, h), bessel_ratio_direct(ls, {h})));
        }
  for (int s = 0; s < o.spectra; ++s) {
    LogSpectrum ls = spectrum(4);
    std::vector<HookIndex> hooks{{Cx(6.0, 0.0), 3}, {Cx(4.5, 0.0), 1}};
    multi = std::max(multi, rel_err(bessel_ratio_multi(ls, hooks), bessel_ratio_direct(ls, hooks)));
  }
  Json trend = Json::array();
  double prev = INFINITY;
  bool decreasing = true;
  for (int N : {8, 16, 32}) {
    std::vector<double> lam(N);
    for (int i = 0; i < N; ++i) lam[i] = 1.0 - (i + 0.5) / N;
    Cx at(0.7, 0.1);
    double bt = 0.5;
    Cx d = bessel_ratio_direct(LogSpectrum(lam), {{at * double(N), static_cast<int>(bt * N)}});
    Cx as = bessel_ratio_asymptotic(SpectralMeasure::uniform_atoms(lam), {{at, bt}});
    double e = rel_err(as, d);
    decreasing = decreasing && e < prev;
    prev = e;
    trend.push_back({{"N", N}, {"relative_error", e}});
  }
  bool pass = smoke < 1e-8 && contour < 1e-8 && multi < 1e-8 && decreasing;
  Json doc = {{"schema", "rmtp.bessel_check/1"},
              {"n1_smoke_relative_error", smoke},
              {"contour_vs_direct_max_relative_error", contour},
              {"multi_vs_direct_max_relative_error", multi},
              {"asymptotic_trend", trend},
              {"verdict", pass ? "pass" : "fail"}};
  emit(o.out, doc.dump(2) + "\n", out);
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------- density

struct DensityOptions {
  MeasureFlags m;
  int M = 1;
  std::string kind = "product";
  int points = 200;
  std::string config, out;
};

int cmd_density(CLI::App* sc, DensityOptions& o, std::ostream& out) {
  if (!o.config.empty()) {
    Json cfg = load_json(o.config);
    check_keys(cfg, keys_with(kMeasureKeys, {"M", "kind", "points", "out"}), "density config");
    Merge mg{cfg, sc};
    o.m.merge(mg);
    mg.take("M", "--M", o.M);
    mg.take("kind", "--kind", o.kind);
    mg.take("points", "--points", o.points);
    mg.take("out", "--out", o.out);
  }
  if (o.points < 2) throw ConfigError("points must be >= 2");
  if (o.kind != "product" && o.kind != "lyapunov") throw ConfigError("kind must be product or lyapunov");
  SpectralMeasure mu = o.m.build();
  std::ostringstream csv;
  csv << "t,density\n";
  char buf[64];
  if (o.kind == "lyapunov") {
    auto [a, b] = lyapunov_support(mu);
    for (int i = 0; i < o.points; ++i) {
      double t = a + (b - a) * (i + 0.5) / o.points;
      std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", t, lyapunov_density(mu, t));
      csv << buf;
    }
  } else {
    SpectralMeasure prod = o.M == 1 ? mu : SpectralMeasure::free_power(mu, o.M);
    auto [a, b] = support(prod);
    for (int i = 0; i < o.points; ++i) {
      double t = a + (b - a) * (i + 0.5) / o.points;
      std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", t, density_from_boundary(prod, t));
      csv << buf;
    }
  }
  emit(o.out, csv.str(), out);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fluctuations of products of random matrices: predictions, simulation and checks", "rmtp"};
  app.require_subcommand(1);

  PredictOptions po;
  CLI::App* predict = app.add_subcommand("predict", "contour-integral predictions as JSON");
  po.m.add(predict);
  predict->add_option("--config", po.config, "JSON config file");
  predict->add_option("--M", po.M, "number of factors");
  predict->add_option("--regime", po.regime, "fixed or lyapunov")->check(CLI::IsMember({"fixed", "lyapunov"}));
  predict->add_option("--moments", po.moments, "moment indices")->delimiter(',');
  predict->add_flag("!--no-covariances", po.covariances, "skip covariance predictions");
  predict->add_flag("--cumulants", po.cumulants, "add zero third and fourth cumulant predictions");
  predict->add_option("--cov2d", po.cov2d, "checkpoint pairs alpha:beta,... for the 2-D field");
  predict->add_option("--eps-inner", po.eps_inner, "inner contour distance");
  predict->add_option("--eps-outer", po.eps_outer, "outer contour distance");
  predict->add_option("--out", po.out, "output path (default stdout)");

  SimulateOptions so;
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo trials as CSV");
  simulate->add_option("--config", so.config, "JSON config file");
  simulate->add_option("--ensemble", so.ensemble, "ginibre, jacobi or fixed");
  simulate->add_option("--N", so.N, "matrix size");
  simulate->add_option("--L", so.L, "Ginibre rows");
  simulate->add_option("--gamma", so.gamma, "Ginibre L/N (alternative to --L)");
  simulate->add_option("--alpha", so.alpha, "Jacobi alpha");
  simulate->add_option("--R", so.R, "Jacobi R");
  simulate->add_option("--lambda", so.lambda, "fixed log-eigenvalues")->delimiter(',');
  simulate->add_option("--atoms", so.atoms, "fixed spectrum from quantiles of s:w,...");
  simulate->add_option("--M", so.M, "number of factors");
  simulate->add_option("--trials", so.trials, "number of trials");
  simulate->add_option("--backend", so.backend, "direct, bigfloat or qr");
  simulate->add_option("--checkpoints", so.checkpoints, "fractions alpha of M to record")->delimiter(',');
  simulate->add_option("--seed", so.seed, "base seed")->required();
  simulate->add_option("--threads", so.threads, "worker threads");
  simulate->add_option("--chunk", so.chunk, "trials between checkpoint writes");
  simulate->add_option("--resume", so.resume, "binary checkpoint file to resume from and update");
  simulate->add_option("--out", so.out, "output path (default stdout)");

  CompareOptions co;
  CLI::App* compare = app.add_subcommand("compare", "z-score report of trials against predictions");
  compare->add_option("predictions", co.predictions, "predictions JSON")->required();
  compare->add_option("trials", co.trials, "trial CSV")->required();
  compare->add_option("--z", co.z, "pass threshold on |z|");
  compare->add_option("--out-csv", co.out_csv, "report CSV path (default stdout)");
  compare->add_option("--out-json", co.out_json, "report JSON path");

  BesselCheckOptions bo;
  CLI::App* bessel = app.add_subcommand("bessel-check", "contour, multi-hook and asymptotic Bessel checks");
  bessel->add_option("--spectra", bo.spectra, "random spectra per case");
  bessel->add_option("--seed", bo.seed, "seed for the spectra");
  bessel->add_option("--out", bo.out, "output path (default stdout)");

  DensityOptions dopt;
  CLI::App* density = app.add_subcommand("density", "limit density on a grid as CSV");
  dopt.m.add(density);
  density->add_option("--config", dopt.config, "JSON config file");
  density->add_option("--M", dopt.M, "number of factors (product kind)");
  density->add_option("--kind", dopt.kind, "product or lyapunov")->check(CLI::IsMember({"product", "lyapunov"}));
  density->add_option("--points", dopt.points, "grid points");
  density->add_option("--out", dopt.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*predict) return cmd_predict(predict, po, out);
    if (*simulate) return cmd_simulate(simulate, so, out);
    if (*compare) return cmd_compare(co, out);
    if (*bessel) return cmd_bessel_check(bo, out);
    if (*density) return cmd_density(density, dopt, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.error_class() == ErrorClass::Config ? 2 : 3;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace rmtp::cli
