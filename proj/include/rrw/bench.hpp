#pragma once

// Experiment runner behind the rrw_bench command-line tool.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "exact.hpp"
#include "graph.hpp"
#include "graphlet.hpp"
#include "grf.hpp"
#include "pagerank.hpp"
#include "stats.hpp"
#include "walk.hpp"

namespace rrw {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { kernel_frobenius, kernel_regression, pagerank, graphlet };

inline std::string_view task_name(Task t) {
  switch (t) {
    case Task::kernel_frobenius: return "kernel-frobenius";
    case Task::kernel_regression: return "kernel-regression";
    case Task::pagerank: return "pagerank";
    case Task::graphlet: return "graphlet";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  for (Task t : {Task::kernel_frobenius, Task::kernel_regression, Task::pagerank, Task::graphlet})
    if (task_name(t) == s) return t;
  throw ConfigError("unknown task '" + std::string(s) + "'");
}

inline bool is_kernel_task(Task t) {
  return t == Task::kernel_frobenius || t == Task::kernel_regression;
}

struct Scheme {
  std::string name;
  Coupling coupling;
  Termination termination;
};

/// Canonical scheme order; CSV rows and summaries follow it.
inline const std::vector<Scheme>& known_schemes() {
  static const std::vector<Scheme> all{
      {"iid", Coupling::iid, Termination::independent},
      {"a", Coupling::iid, Termination::antithetic_pairs},
      {"r", Coupling::repelling, Termination::independent},
      {"ar", Coupling::repelling, Termination::antithetic_pairs},
      {"tr", Coupling::transient_repelling, Termination::independent},
  };
  return all;
}

inline std::size_t scheme_rank(std::string_view name) {
  const auto& all = known_schemes();
  for (std::size_t k = 0; k < all.size(); ++k)
    if (all[k].name == name) return k;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

inline Scheme parse_scheme(std::string_view name) { return known_schemes()[scheme_rank(name)]; }

// ---------------------------------------------------------------------------
// Graph specifications

namespace detail {

inline std::map<std::string, std::string> parse_key_values(std::string_view body,
                                                           std::string_view kind) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos <= body.size() && !body.empty()) {
    const std::size_t comma = std::min(body.find(',', pos), body.size());
    const std::string_view item = body.substr(pos, comma - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw ConfigError(std::string(kind) + ": expected key=value, got '" + std::string(item) + "'");
    if (!kv.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1))).second)
      throw ConfigError(std::string(kind) + ": repeated key '" + std::string(item.substr(0, eq)) +
                        "'");
    pos = comma + 1;
    if (comma == body.size()) break;
  }
  return kv;
}

inline std::uint64_t to_uint(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a non-negative integer, got '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(what + ": expected a non-negative integer, got '" + s + "'");
  return v;
}

inline double to_real(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": expected a number, got '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v))
    throw ConfigError(what + ": expected a number, got '" + s + "'");
  return v;
}

class KeyReader {
 public:
  KeyReader(std::map<std::string, std::string> kv, std::string kind)
      : kv_(std::move(kv)), kind_(std::move(kind)) {}

  std::uint64_t uint(const std::string& key, std::optional<std::uint64_t> fallback = {}) {
    auto it = kv_.find(key);
    if (it == kv_.end()) {
      if (fallback) return *fallback;
      throw ConfigError(kind_ + ": missing '" + key + "'");
    }
    auto v = to_uint(it->second, kind_ + " " + key);
    kv_.erase(it);
    return v;
  }

  double real(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError(kind_ + ": missing '" + key + "'");
    auto v = to_real(it->second, kind_ + " " + key);
    kv_.erase(it);
    return v;
  }

  void finish() const {
    if (!kv_.empty()) throw ConfigError(kind_ + ": unknown key '" + kv_.begin()->first + "'");
  }

 private:
  std::map<std::string, std::string> kv_;
  std::string kind_;
};

}  // namespace detail

/// Builds a graph from a generator string or, failing that, an edge-list
/// path. Generators: er:n=,p=,seed=  tree:depth=  grid:RxC
/// dreg:n=,d=,seed=  path:n=  cycle:n=  complete:n=  star:leaves=
inline Graph load_graph_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = colon == std::string::npos ? "" : spec.substr(0, colon);
  const std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto reader = [&] { return detail::KeyReader(detail::parse_key_values(body, kind), kind); };
  try {
    if (kind == "er") {
      auto r = reader();
      auto n = r.uint("n");
      auto p = r.real("p");
      auto seed = r.uint("seed", 0);
      r.finish();
      return gen_erdos_renyi(n, p, seed);
    }
    if (kind == "tree") {
      auto r = reader();
      auto depth = r.uint("depth");
      r.finish();
      return gen_binary_tree(depth);
    }
    if (kind == "dreg") {
      auto r = reader();
      auto n = r.uint("n");
      auto d = r.uint("d");
      auto seed = r.uint("seed", 0);
      r.finish();
      return gen_d_regular(n, d, seed);
    }
    if (kind == "grid") {
      const std::size_t x = body.find('x');
      if (x == std::string::npos) throw ConfigError("grid: expected RxC, got '" + body + "'");
      return gen_grid_2d(detail::to_uint(body.substr(0, x), "grid rows"),
                         detail::to_uint(body.substr(x + 1), "grid cols"));
    }
    if (kind == "path" || kind == "cycle" || kind == "complete") {
      auto r = reader();
      auto n = r.uint("n");
      r.finish();
      if (kind == "path") return path_graph(n);
      if (kind == "cycle") return cycle_graph(n);
      return complete_graph(n);
    }
    if (kind == "star") {
      auto r = reader();
      auto leaves = r.uint("leaves");
      r.finish();
      return star_graph(leaves);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return load_edge_list_file(spec);
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  Task task = Task::pagerank;
  std::string graph_spec;
  std::vector<std::string> schemes{"iid", "r"};
  std::vector<std::size_t> m_values{2};
  std::optional<double> p_term;  // task default when unset
  double sigma = 0.1;
  std::size_t walk_len = 16;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string output;
  std::size_t workers = 0;  // 0: hardware concurrency
  LaunchMode launch = LaunchMode::per_start_node;
  bool squared_error = false;
  double test_fraction = 0.2;
  std::string attributes;  // kernel-regression; empty: synthetic
  std::size_t attribute_dim = 3;

  double effective_p_term() const {
    if (p_term) return *p_term;
    return task == Task::pagerank ? 0.3 : 0.5;
  }

  void validate() const {
    if (graph_spec.empty()) throw ConfigError("no graph given");
    if (trials == 0) throw ConfigError("trials must be positive");
    if (schemes.empty()) throw ConfigError("no schemes given");
    if (m_values.empty()) throw ConfigError("no walker counts given");
    for (std::size_t m : m_values)
      if (m == 0) throw ConfigError("walker counts must be positive");
    for (const auto& s : schemes) {
      const Scheme sc = parse_scheme(s);
      if (sc.termination == Termination::antithetic_pairs && !is_kernel_task(task))
        throw ConfigError("scheme '" + s + "' is only valid for kernel tasks");
    }
    if (task != Task::graphlet) {
      const double p = effective_p_term();
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("pterm must lie in (0,1)");
    }
    if (is_kernel_task(task) && !(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (task == Task::graphlet && walk_len < 3) throw ConfigError("walk-len must be at least 3");
    if (task == Task::kernel_regression && !(test_fraction > 0.0 && test_fraction < 1.0))
      throw ConfigError("test-fraction must lie in (0,1)");
  }

  /// Schemes deduplicated and in canonical order.
  std::vector<std::string> canonical_schemes() const {
    std::vector<std::string> out = schemes;
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return scheme_rank(a) < scheme_rank(b); });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::vector<std::size_t> canonical_m() const {
    std::vector<std::size_t> out = m_values;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

// ---------------------------------------------------------------------------
// Results

struct ResultRow {
  std::string task;
  std::string graph;
  std::string scheme;
  std::size_t m = 0;
  std::size_t trial = 0;
  std::string metric;
  double value = 0.0;  // NaN marks an invalid trial
  std::uint64_t seed = 0;

  bool valid() const { return std::isfinite(value); }
};

inline constexpr std::string_view kCsvHeader = "task,graph,scheme,m,trial,metric,value,seed";

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows)
    out << csv_field(r.task) << ',' << csv_field(r.graph) << ',' << r.scheme << ',' << r.m << ','
        << r.trial << ',' << r.metric << ',' << format_real(r.value) << ',' << r.seed << '\n';
}

struct AggregateRow {
  std::string scheme;
  std::size_t m = 0;
  std::size_t n_valid = 0;
  std::size_t n_invalid = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double stderr_ = 0.0;
};

/// Per-(scheme, m) statistics over valid rows, in canonical order.
inline std::vector<AggregateRow> aggregate(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("no rows to aggregate");
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) groups[{scheme_rank(r.scheme), r.m}].push_back(&r);
  std::vector<AggregateRow> out;
  std::size_t valid_total = 0;
  for (const auto& [key, members] : groups) {
    AggregateRow a;
    a.scheme = members.front()->scheme;
    a.m = key.second;
    std::vector<double> xs;
    for (const auto* r : members) {
      if (r->valid())
        xs.push_back(r->value);
      else
        ++a.n_invalid;
    }
    a.n_valid = xs.size();
    if (!xs.empty()) {
      const Summary s = summarize(xs);
      a.mean = s.mean;
      a.stddev = s.stddev;
      a.stderr_ = s.stderr_;
    } else {
      a.mean = std::numeric_limits<double>::quiet_NaN();
    }
    valid_total += a.n_valid;
    out.push_back(a);
  }
  if (valid_total == 0) throw std::invalid_argument("all rows are invalid");
  return out;
}

/// "mean (stderr)" table, one line per (scheme, m).
inline void print_summary(std::ostream& out, const std::vector<AggregateRow>& agg,
                          std::string_view metric) {
  out << std::left << std::setw(8) << "scheme" << std::setw(6) << "m" << std::setw(8) << "n"
      << std::setw(16) << "mean" << std::setw(16) << "stderr" << std::setw(16) << "std"
      << "invalid" << '\n';
  for (const auto& a : agg) {
    std::ostringstream mean, se, sd;
    mean << std::scientific << std::setprecision(6) << a.mean;
    se << std::scientific << std::setprecision(3) << a.stderr_;
    sd << std::scientific << std::setprecision(3) << a.stddev;
    out << std::left << std::setw(8) << a.scheme << std::setw(6) << a.m << std::setw(8)
        << a.n_valid << std::setw(16) << mean.str() << std::setw(16) << se.str() << std::setw(16)
        << sd.str() << a.n_invalid << '\n';
  }
  out << "metric: " << metric << "; stderr is one standard deviation of the mean\n";
}

// ---------------------------------------------------------------------------
// Execution

/// Runs f(0..count-1) on up to `workers` threads; f must write only to its
/// own output slot.
template <typename F>
void parallel_for(std::size_t count, std::size_t workers, F&& f) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(count, 1));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto body = [&] {
    for (std::size_t k; !failed && (k = next.fetch_add(1)) < count;) {
      try {
        f(k);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

struct RunResult {
  std::vector<ResultRow> rows;
  std::string metric;
  std::vector<std::string> notes;
};

inline std::string metric_name(const ExperimentConfig& cfg) {
  switch (cfg.task) {
    case Task::kernel_frobenius: return "frobenius_error";
    case Task::kernel_regression: return "angular_error";
    case Task::pagerank: return cfg.squared_error ? "squared_l2_error" : "l2_error";
    case Task::graphlet: return "c_tri_hat";
  }
  return "?";
}

inline RunResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Graph g = load_graph_spec(cfg.graph_spec);
  RunResult res;
  res.metric = metric_name(cfg);
  const double p = cfg.effective_p_term();

  // Shared exact references.
  DenseMatrix kernel;
  DenseVector pagerank;
  NodeAttributes attributes;
  if (cfg.task == Task::kernel_frobenius) kernel = exact_kernel_lap(g, cfg.sigma, 2);
  if (cfg.task == Task::pagerank) pagerank = exact_pagerank(g, p);
  if (cfg.task == Task::kernel_regression) {
    attributes = cfg.attributes.empty()
                     ? synthetic_smooth_attributes(g, cfg.attribute_dim, cfg.sigma, cfg.seed)
                     : load_node_attributes_file(cfg.attributes, g);
  }
  if (cfg.task == Task::graphlet) {
    GraphletConcentration exact{};
    bool triads = true;
    try {
      exact = exact_graphlet_concentration(g);
    } catch (const std::domain_error&) {
      triads = false;
    }
    if (!triads || exact.triangles == 0)
      res.notes.push_back("warning: graph has no triangles, so c_tri_hat is identically 0");
    else
      res.notes.push_back("exact c_tri = " + format_real(exact.c_tri));
  }
  for (const auto& s : cfg.canonical_schemes()) {
    const Scheme sc = parse_scheme(s);
    for (std::size_t m : cfg.canonical_m())
      if (sc.termination == Termination::antithetic_pairs && m % 2 == 1)
        res.notes.push_back("note: scheme " + s + " with odd m = " + std::to_string(m) +
                            " leaves one walker unpaired");
  }

  struct Item {
    std::string scheme;
    std::size_t m;
    std::size_t trial;
  };
  std::vector<Item> items;
  for (const auto& s : cfg.canonical_schemes())
    for (std::size_t m : cfg.canonical_m())
      for (std::size_t t = 0; t < cfg.trials; ++t) items.push_back({s, m, t});
  res.rows.resize(items.size());

  parallel_for(items.size(), cfg.workers, [&](std::size_t k) {
    const Item& it = items[k];
    const Scheme sc = parse_scheme(it.scheme);
    EnsembleConfig ec;
    ec.walkers = it.m;
    ec.coupling = sc.coupling;
    ec.termination = sc.termination;
    ec.seed = cfg.seed;
    double value = 0.0;
    switch (cfg.task) {
      case Task::kernel_frobenius:
        ec.p_term = p;
        value = frobenius_error(kernel, estimate_gram(g, cfg.sigma, ec, it.trial));
        break;
      case Task::kernel_regression:
        ec.p_term = p;
        value = kernel_regression_experiment(g, attributes, cfg.test_fraction, cfg.sigma, ec,
                                             it.trial);
        break;
      case Task::pagerank: {
        ec.p_term = p;
        const auto est = estimate_pagerank(g, ec, it.trial, cfg.launch);
        value = cfg.squared_error ? pagerank_squared_error(pagerank, est.values)
                                  : pagerank_error(pagerank, est.values);
        break;
      }
      case Task::graphlet: {
        const auto s = graphlet_trial(g, cfg.walk_len, sc.coupling, it.m, cfg.seed, it.trial);
        value = s.valid ? s.c_tri_hat : std::numeric_limits<double>::quiet_NaN();
        break;
      }
    }
    res.rows[k] = {std::string(task_name(cfg.task)), cfg.graph_spec, it.scheme, it.m, it.trial,
                   res.metric, value, cfg.seed};
  });
  return res;
}

}  // namespace rrw
