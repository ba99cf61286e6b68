#pragma once
// Sequential filtering experiment: a shared truth trajectory and
// observations, B independent replications of the ensemble filters
// (proposed coupling update and assumed-model resampling), optionally the
// exact filter as reference, and the CSV/manifest reporting around them.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "binfilter/chain_model.hpp"
#include "binfilter/common.hpp"
#include "binfilter/ensemble.hpp"
#include "binfilter/evaluation.hpp"
#include "binfilter/oracle.hpp"
#include "binfilter/rng.hpp"
#include "binfilter/transition_optimizer.hpp"
#include "binfilter/true_process.hpp"

namespace binfilter {

inline constexpr int kFormatVersion = 1;

enum class Method { kProposed, kAssumed, kExact };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::kProposed: return "proposed";
    case Method::kAssumed: return "assumed";
    case Method::kExact: return "exact";
  }
  return "?";
}

inline const char* method_code(Method m) {
  switch (m) {
    case Method::kProposed: return "q";
    case Method::kAssumed: return "a";
    case Method::kExact: return "c";
  }
  return "?";
}

inline Method parse_method(const std::string& s) {
  if (s == "proposed" || s == "q") return Method::kProposed;
  if (s == "assumed" || s == "a") return Method::kAssumed;
  if (s == "exact" || s == "c") return Method::kExact;
  throw InvalidInput("unknown method '" + s + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const auto x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw InvalidInput("config key '" + key + "' expects a nonnegative integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return x;
  } catch (const std::exception&) {
    throw InvalidInput("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw InvalidInput("config key '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::vector<std::size_t> parse_index_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split(v, ',')) out.push_back(static_cast<std::size_t>(parse_uint(key, item)));
  return out;
}

}  // namespace detail

struct ExperimentConfig {
  ProcessConfig process;
  std::size_t M = 20;
  std::size_t B = 1000;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::kProposed, Method::kAssumed};
  EstimationPrior prior;
  // 1-based; empty means the defaults {60,70,80} / {115,210,290}, scaled.
  std::vector<std::size_t> eval_times;
  std::vector<std::size_t> probes;
  double level = 0.9;
  bool snapshots = false;  // gzip ensemble snapshots at the eval times
  // Oracle suite.
  std::size_t oracle_instances = 200;
  std::size_t oracle_grid_instances = 50;
  std::size_t oracle_grid_steps = 2000;
  std::size_t oracle_identity_instances = 20;

  bool has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

  void set(const std::string& key_in, const std::string& value_in) {
    const std::string key = detail::trim(key_in), v = detail::trim(value_in);
    if (key == "n") process.n = detail::parse_uint(key, v);
    else if (key == "T") process.T = detail::parse_uint(key, v);
    else if (key == "sigma") process.sigma = detail::parse_real(key, v);
    else if (key == "M") M = detail::parse_uint(key, v);
    else if (key == "B") B = detail::parse_uint(key, v);
    else if (key == "seed") seed = detail::parse_uint(key, v);
    else if (key == "alpha") prior.alpha = detail::parse_real(key, v);
    else if (key == "beta") prior.beta = detail::parse_real(key, v);
    else if (key == "level") level = detail::parse_real(key, v);
    else if (key == "snapshots") snapshots = detail::parse_bool(key, v);
    else if (key == "eval_times") eval_times = detail::parse_index_list(key, v);
    else if (key == "probes") probes = detail::parse_index_list(key, v);
    else if (key == "oracle_instances") oracle_instances = detail::parse_uint(key, v);
    else if (key == "oracle_grid_instances") oracle_grid_instances = detail::parse_uint(key, v);
    else if (key == "oracle_grid_steps") oracle_grid_steps = detail::parse_uint(key, v);
    else if (key == "oracle_identity_instances") oracle_identity_instances = detail::parse_uint(key, v);
    else if (key == "methods") {
      methods.clear();
      for (const auto& m : detail::split(v, ',')) {
        const Method pm = parse_method(m);
        if (!has(pm)) methods.push_back(pm);
      }
    } else {
      throw InvalidInput("unknown config key '" + key + "'");
    }
  }

  // "KEY=VAL"
  void set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw InvalidInput("expected KEY=VAL, got '" + assignment + "'");
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
  }

  // Flat key=value text; '#' starts a comment.
  void load(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (!line.empty()) set(line);
    }
  }

  void load_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot read config file '" + path + "'");
    load(f);
  }

  void validate() const {
    process.validate();
    if (M < 1) throw InvalidInput("M must be >= 1");
    if (B < 1) throw InvalidInput("B must be >= 1");
    if (methods.empty()) throw InvalidInput("no methods selected");
    if (has(Method::kExact) && process.n > kMaxFilterNodes) throw InvalidInput("exact method requires n <= 14");
    if (!(prior.alpha > 0.0 && prior.beta > 0.0)) throw InvalidInput("alpha and beta must be > 0");
    if (!(level > 0.0 && level < 1.0)) throw InvalidInput("level must lie in (0,1)");
    for (auto t : eval_times)
      if (t < 1 || t > process.T) throw InvalidInput("eval time outside 1..T");
    for (auto i : probes)
      if (i < 1 || i > process.n) throw InvalidInput("probe node outside 1..n");
    if (oracle_grid_steps < 1000) throw InvalidInput("oracle_grid_steps must be >= 1000");
  }

  // Defaults are scaled as round(t T / 100) and round(i n / 400).
  std::vector<std::size_t> resolved_eval_times() const {
    if (!eval_times.empty()) return eval_times;
    return scaled({60, 70, 80}, process.T, 100);
  }

  std::vector<std::size_t> resolved_probes() const {
    if (!probes.empty()) return probes;
    return scaled({115, 210, 290}, process.n, 400);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["n"] = process.n;
    j["T"] = process.T;
    j["sigma"] = process.sigma;
    j["M"] = M;
    j["B"] = B;
    j["seed"] = seed;
    std::vector<std::string> ms;
    for (auto m : methods) ms.emplace_back(method_name(m));
    j["methods"] = ms;
    j["alpha"] = prior.alpha;
    j["beta"] = prior.beta;
    j["eval_times"] = resolved_eval_times();
    j["probes"] = resolved_probes();
    j["level"] = level;
    j["snapshots"] = snapshots;
    j["oracle_instances"] = oracle_instances;
    j["oracle_grid_instances"] = oracle_grid_instances;
    j["oracle_grid_steps"] = oracle_grid_steps;
    j["oracle_identity_instances"] = oracle_identity_instances;
    return j;
  }

 private:
  static std::vector<std::size_t> scaled(std::initializer_list<std::size_t> base, std::size_t size,
                                         std::size_t ref) {
    std::vector<std::size_t> out;
    for (auto b : base) {
      auto v = static_cast<std::size_t>(std::llround(static_cast<double>(b) * static_cast<double>(size) /
                                                     static_cast<double>(ref)));
      v = std::clamp<std::size_t>(v, 1, size);
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
  }
};

// Truth and observations for one experiment seed, shared by every method.
inline TruthAndObservations generate_data(const ExperimentConfig& cfg, const TrueModelTable& table = {}) {
  Rng truth = make_stream(cfg.seed, 0, 0, StreamPurpose::kTruth);
  Rng obs = make_stream(cfg.seed, 0, 0, StreamPurpose::kObservation);
  return simulate_truth(table, cfg.process, truth, obs);
}

struct RunDiagnostics {
  std::size_t max_pieces = 0;
  std::size_t total_pieces = 0;
  std::size_t value_functions = 0;
  std::size_t edge_ties = 0;
  std::size_t upper_corner_agree = 0;
  std::size_t upper_corner_disagree = 0;

  double mean_pieces() const {
    return value_functions ? static_cast<double>(total_pieces) / static_cast<double>(value_functions) : 0.0;
  }

  void add(const BuildDiagnostics& d) {
    max_pieces = std::max(max_pieces, d.max_pieces);
    total_pieces += d.total_pieces;
    value_functions += d.value_functions;
    edge_ties += d.edge_ties;
    upper_corner_agree += d.upper_corner_agree;
    upper_corner_disagree += d.upper_corner_disagree;
  }

  void add(const RunDiagnostics& d) {
    max_pieces = std::max(max_pieces, d.max_pieces);
    total_pieces += d.total_pieces;
    value_functions += d.value_functions;
    edge_ties += d.edge_ties;
    upper_corner_agree += d.upper_corner_agree;
    upper_corner_disagree += d.upper_corner_disagree;
  }
};

struct MethodRun {
  MarginalMatrix marginals;                  // [t][i] ensemble mean of x_i^t
  std::map<std::size_t, Ensemble> snapshots;  // posterior ensembles at eval times (1-based t)
};

struct FilterRun {
  std::size_t replication = 0;
  std::map<Method, MethodRun> methods;
  RunDiagnostics diagnostics;
  // Value functions of the proposed update at eval times (replication 0 only).
  std::map<std::size_t, std::vector<CplFunction>> value_functions;
};

// One replication of every requested ensemble method.
inline FilterRun run_filter_replication(const ExperimentConfig& cfg, const TruthAndObservations& data,
                                        std::size_t rep, bool keep_value_functions = false,
                                        const TrueModelTable& table = {}) {
  const std::size_t n = cfg.process.n, T = cfg.process.T, M = cfg.M;
  const auto eval = cfg.resolved_eval_times();
  const GaussianNodeLikelihood lik(cfg.process.sigma);
  FilterRun out;
  out.replication = rep;

  for (Method method : {Method::kProposed, Method::kAssumed}) {
    if (!cfg.has(method)) continue;
    const bool proposed = method == Method::kProposed;
    MethodRun mr;
    mr.marginals.reserve(T);
    Ensemble ens(M, n);
    std::size_t t = 0;
    try {
      for (; t < T; ++t) {
        const std::uint64_t step = t + 1;
        Rng fr = make_stream(cfg.seed, rep, step,
                             proposed ? StreamPurpose::kForecastProposed : StreamPurpose::kForecastAssumed);
        Ensemble forecast(M, n);
        const BinaryVector zeros(n, 0);
        for (std::size_t m = 0; m < M; ++m)
          forecast.set_member(m, simulate_step(table, t == 0 ? zeros : ens.member(m), fr));

        const BinaryMarkovChain assumed_prior = estimate_chain(forecast, cfg.prior);
        const BinaryMarkovChain assumed_post = posterior_chain(assumed_prior, lik, data.obs[t]);
        if (proposed) {
          const OptimalCoupling oc = build_optimal_q(assumed_prior, assumed_post);
          out.diagnostics.add(oc.diagnostics);
          Rng ur = make_stream(cfg.seed, rep, step, StreamPurpose::kUpdateProposed);
          ens = update_ensemble(forecast, oc.rule, ur);
          if (keep_value_functions && std::find(eval.begin(), eval.end(), step) != eval.end())
            out.value_functions.emplace(step, oc.value_functions);
        } else {
          Rng rr = make_stream(cfg.seed, rep, step, StreamPurpose::kResampleAssumed);
          ens = resample_assumed(assumed_post, M, rr);
        }
        mr.marginals.push_back(ens.mean_ones());
        if (std::find(eval.begin(), eval.end(), step) != eval.end()) mr.snapshots.emplace(step, ens);
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(rep) + ", method " + method_name(method) +
                               ", time step " + std::to_string(t + 1) + ": " + e.what());
    }
    out.methods.emplace(method, std::move(mr));
  }
  return out;
}

// Runs f(i) for i in [0, count) on `jobs` threads. Exceptions are rethrown
// after all workers finish, lowest index first.
template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct ExperimentResult {
  ExperimentConfig cfg;
  TruthAndObservations data;
  std::vector<ExactFilterState> exact;  // empty unless the exact method ran
  std::vector<FilterRun> runs;          // indexed by replication

  MarginalMatrix mean_marginals(Method m) const {
    if (m == Method::kExact) {
      MarginalMatrix out;
      for (const auto& s : exact) out.push_back(s.marginals_one());
      return out;
    }
    const std::size_t T = cfg.process.T, n = cfg.process.n;
    MarginalMatrix out(T, std::vector<double>(n, 0.0));
    for (const auto& r : runs) {
      const auto& mm = r.methods.at(m).marginals;
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t i = 0; i < n; ++i) out[t][i] += mm[t][i];
    }
    for (auto& row : out)
      for (auto& v : row) v /= static_cast<double>(runs.size());
    return out;
  }

  // Pooled posterior samples of all replications at eval time t (1-based).
  SampleSet pooled(Method m, std::size_t t) const {
    if (m == Method::kExact) return sample_set_from_exact(exact.at(t - 1));
    SampleSet s;
    for (const auto& r : runs) {
      const auto& e = r.methods.at(m).snapshots.at(t);
      for (std::size_t k = 0; k < e.size(); ++k) s.samples.push_back(e.member(k));
    }
    return s;
  }

  RunDiagnostics diagnostics() const {
    RunDiagnostics d;
    for (const auto& r : runs) d.add(r.diagnostics);
    return d;
  }

  std::optional<double> frobenius(Method m) const {
    if (exact.empty() || !cfg.has(m)) return std::nullopt;
    return frobenius_diff(mean_marginals(m), mean_marginals(Method::kExact));
  }
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg, std::size_t jobs = 1,
                                       bool keep_value_functions = false, const TrueModelTable& table = {}) {
  cfg.validate();
  ExperimentResult res;
  res.cfg = cfg;
  res.data = generate_data(cfg, table);
  if (cfg.has(Method::kExact))
    res.exact = exact_filter(table, res.data.obs, cfg.process.sigma, cfg.process.n, cfg.process.T);
  res.runs.resize(cfg.B);
  parallel_for(cfg.B, jobs, [&](std::size_t b) {
    res.runs[b] = run_filter_replication(cfg, res.data, b, keep_value_functions && b == 0, table);
  });
  return res;
}

// ---------------------------------------------------------------------------
// Output

struct OutputFile {
  std::string name;
  std::vector<std::string> columns;  // empty for headerless matrices
  std::string description;
};

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& name, std::vector<std::string> columns, std::string description) {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    files_.push_back({name, std::move(columns), std::move(description)});
    return f;
  }

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void record(const std::string& name, std::vector<std::string> columns, std::string description) {
    files_.push_back({name, std::move(columns), std::move(description)});
  }

  // Sidecar describing every file written; contains no timestamps so that
  // reruns are byte-identical.
  void write_manifest(const std::string& command, const nlohmann::ordered_json& config,
                      const nlohmann::ordered_json& extra = nlohmann::ordered_json::object()) const {
    nlohmann::ordered_json j;
    j["format_version"] = kFormatVersion;
    j["command"] = command;
    j["config"] = config;
    for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
    nlohmann::ordered_json files = nlohmann::ordered_json::array();
    for (const auto& f : files_) {
      nlohmann::ordered_json e;
      e["name"] = f.name;
      e["columns"] = f.columns;
      e["description"] = f.description;
      files.push_back(e);
    }
    j["files"] = files;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << j.dump(2) << '\n';
  }

 private:
  std::filesystem::path dir_;
  std::vector<OutputFile> files_;
};

inline void write_value_function_long(std::ostream& os, const std::vector<CplFunction>& vf) {
  os << "k,t,value\n";
  for (std::size_t k = 1; k < vf.size(); ++k) {
    const auto& f = vf[k];
    for (std::size_t b = 0; b < f.breakpoints().size(); ++b)
      os << (k + 1) << ',' << format_real(f.breakpoints()[b]) << ',' << format_real(f.values()[b]) << '\n';
  }
}

inline void write_truth_files(OutputDir& out, const TruthAndObservations& data, const TrueModelTable& table) {
  {
    auto f = out.open("truth.csv", {}, "T x n matrix of true states x_i^t (rows t = 1..T)");
    write_bit_matrix_csv(f, data.truth);
  }
  {
    auto f = out.open("observations.csv", {}, "T x n matrix of observations y_i^t");
    write_real_matrix_csv(f, data.obs);
  }
  {
    auto f = out.open("true_model.csv", {"left_prev", "self_prev", "right_prev", "left_curr", "p1"},
                      "P(x_i^t = 1 | neighbours) of the true process");
    write_table_csv(f, table);
  }
}

inline void write_experiment_outputs(const ExperimentResult& res, OutputDir& out,
                                     const TrueModelTable& table = {}) {
  const auto& cfg = res.cfg;
  write_truth_files(out, res.data, table);

  std::vector<Method> present;
  for (Method m : {Method::kExact, Method::kProposed, Method::kAssumed})
    if (cfg.has(m)) present.push_back(m);

  for (Method m : present) {
    auto f = out.open(std::string("marginals_") + method_code(m) + ".csv", {},
                      std::string("T x n matrix of estimated P(x_i^t = 1 | y^{1:t}), method ") + method_name(m));
    write_real_matrix_csv(f, res.mean_marginals(m));
  }

  {
    auto f = out.open("frobenius.csv", {"method", "value"},
                      "Frobenius norm of (method marginals - exact marginals); NA without the exact method");
    f << "method,value\n";
    for (Method m : {Method::kProposed, Method::kAssumed})
      if (cfg.has(m)) f << method_code(m) << ',' << format_optional(res.frobenius(m)) << '\n';
  }

  const auto eval = cfg.resolved_eval_times();
  const auto probes = cfg.resolved_probes();
  const std::vector<Method> codes{Method::kExact, Method::kProposed, Method::kAssumed};
  for (std::size_t t : eval) {
    std::map<Method, SampleSet> pooled;
    for (Method m : present) pooled.emplace(m, res.pooled(m, t));

    for (std::size_t i : probes) {
      std::map<Method, std::vector<std::optional<double>>> prof;
      for (auto& [m, s] : pooled) prof.emplace(m, contact_profile(s, i - 1));
      auto f = out.open("contact_t" + std::to_string(t) + "_i" + std::to_string(i) + ".csv",
                        {"j", "p_c", "p_q", "p_a"}, "contact probability P(kappa_ij = 1 | x_i = 1) by method");
      f << "j,p_c,p_q,p_a\n";
      for (std::size_t j = 0; j < cfg.process.n; ++j) {
        f << (j + 1);
        for (Method m : codes) f << ',' << (prof.count(m) ? format_optional(prof[m][j]) : "NA");
        f << '\n';
      }
    }

    {
      std::map<Method, std::optional<std::vector<double>>> cdf;
      for (auto& [m, s] : pooled) cdf.emplace(m, contact_length_cdf(s));
      auto f = out.open("contact_cdf_t" + std::to_string(t) + ".csv", {"l", "F_c", "F_q", "F_a"},
                        "CDF of the contact length L_i given x_i = 1, by method");
      f << "l,F_c,F_q,F_a\n";
      for (std::size_t l = 1; l <= cfg.process.n; ++l) {
        f << l;
        for (Method m : codes) {
          const bool ok = cdf.count(m) && cdf[m].has_value();
          f << ',' << (ok ? format_real((*cdf[m])[l - 1]) : "NA");
        }
        f << '\n';
      }
    }

    for (Method m : {Method::kProposed, Method::kAssumed}) {
      if (!cfg.has(m)) continue;
      auto f = out.open("quantiles_t" + std::to_string(t) + "_" + method_code(m) + ".csv",
                        {"i", "est", "lo", "hi"},
                        std::string("mean and type-7 quantile interval over replications, method ") + method_name(m));
      f << "i,est,lo,hi\n";
      std::vector<double> vals(res.runs.size());
      for (std::size_t i = 0; i < cfg.process.n; ++i) {
        double sum = 0.0;
        for (std::size_t b = 0; b < res.runs.size(); ++b) {
          vals[b] = res.runs[b].methods.at(m).marginals[t - 1][i];
          sum += vals[b];
        }
        const double est = sum / static_cast<double>(vals.size());
        f << (i + 1) << ',' << format_real(est);
        if (vals.size() >= 2) {
          const auto [lo, hi] = quantile_interval(vals, cfg.level);
          f << ',' << format_real(lo) << ',' << format_real(hi) << '\n';
        } else {
          f << ",NA,NA\n";
        }
      }
    }

    if (cfg.snapshots) {
      for (Method m : {Method::kProposed, Method::kAssumed}) {
        if (!cfg.has(m)) continue;
        const std::string name = std::string("ensemble_t") + std::to_string(t) + "_" + method_code(m) + ".csv.gz";
        Ensemble all(res.runs.size() * cfg.M, cfg.process.n);
        std::size_t row = 0;
        for (const auto& r : res.runs) {
          const auto& e = r.methods.at(m).snapshots.at(t);
          for (std::size_t k = 0; k < e.size(); ++k) all.set_member(row++, e.member(k));
        }
        write_ensemble_csv_gz(out.path(name).string(), all);
        out.record(name, {}, "gzip CSV, posterior ensembles of all replications (B*M rows)");
      }
    }
  }

  {
    auto f = out.open("diagnostics.csv",
                      {"replication", "max_pieces", "mean_pieces", "edge_ties", "upper_corner_agree",
                       "upper_corner_disagree"},
                      "value-function piece counts and forward-pass diagnostics of the proposed update");
    f << "replication,max_pieces,mean_pieces,edge_ties,upper_corner_agree,upper_corner_disagree\n";
    for (const auto& r : res.runs) {
      const auto& d = r.diagnostics;
      f << r.replication << ',' << d.max_pieces << ',' << format_real(d.mean_pieces()) << ',' << d.edge_ties
        << ',' << d.upper_corner_agree << ',' << d.upper_corner_disagree << '\n';
    }
  }

  if (!res.runs.empty()) {
    for (const auto& [t, vf] : res.runs.front().value_functions) {
      auto f = out.open("value_functions_t" + std::to_string(t) + ".csv", {"k", "t", "value"},
                        "breakpoints of E*_{k:n} for the proposed update of replication 0");
      write_value_function_long(f, vf);
    }
  }

  nlohmann::ordered_json extra;
  const auto d = res.diagnostics();
  extra["diagnostics"] = {{"max_pieces", d.max_pieces},
                          {"mean_pieces", d.mean_pieces()},
                          {"edge_ties", d.edge_ties},
                          {"upper_corner_agree", d.upper_corner_agree},
                          {"upper_corner_disagree", d.upper_corner_disagree}};
  out.write_manifest("run", cfg.to_json(), extra);
}

}  // namespace binfilter
