// rrw_bench: seeded Monte Carlo experiments with coupled walker ensembles.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "rrw/bench.hpp"

namespace {

using nlohmann::json;

// Fills fields present in a JSON config file; flags given on the command
// line take precedence.
void apply_json(const std::string& path, rrw::ExperimentConfig& cfg, std::string& task,
                std::string& launch, const CLI::App& app) {
  std::ifstream in(path);
  if (!in) throw rrw::ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw rrw::ConfigError("config file: " + std::string(e.what()));
  }
  if (!j.is_object()) throw rrw::ConfigError("config file must hold a JSON object");
  static const std::vector<std::string> known{
      "task",   "graph",  "schemes", "m",      "pterm",         "sigma",      "walk-len",
      "trials", "seed",   "out",     "workers", "launch",       "squared-error",
      "test-fraction", "attributes", "attribute-dim"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw rrw::ConfigError("config file: unknown field '" + key + "'");
  auto given = [&](const char* flag) { return app.count(std::string("--") + flag) > 0; };
  try {
    if (j.contains("task") && !given("task")) task = j["task"].get<std::string>();
    if (j.contains("graph") && !given("graph")) cfg.graph_spec = j["graph"].get<std::string>();
    if (j.contains("schemes") && !given("schemes"))
      cfg.schemes = j["schemes"].get<std::vector<std::string>>();
    if (j.contains("m") && !given("m")) cfg.m_values = j["m"].get<std::vector<std::size_t>>();
    if (j.contains("pterm") && !given("pterm")) cfg.p_term = j["pterm"].get<double>();
    if (j.contains("sigma") && !given("sigma")) cfg.sigma = j["sigma"].get<double>();
    if (j.contains("walk-len") && !given("walk-len")) cfg.walk_len = j["walk-len"].get<std::size_t>();
    if (j.contains("trials") && !given("trials")) cfg.trials = j["trials"].get<std::size_t>();
    if (j.contains("seed") && !given("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out") && !given("out")) cfg.output = j["out"].get<std::string>();
    if (j.contains("workers") && !given("workers")) cfg.workers = j["workers"].get<std::size_t>();
    if (j.contains("launch") && !given("launch")) launch = j["launch"].get<std::string>();
    if (j.contains("squared-error") && !given("squared-error"))
      cfg.squared_error = j["squared-error"].get<bool>();
    if (j.contains("test-fraction") && !given("test-fraction"))
      cfg.test_fraction = j["test-fraction"].get<double>();
    if (j.contains("attributes") && !given("attributes"))
      cfg.attributes = j["attributes"].get<std::string>();
    if (j.contains("attribute-dim") && !given("attribute-dim"))
      cfg.attribute_dim = j["attribute-dim"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw rrw::ConfigError("config file: " + std::string(e.what()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled random-walk ensembles: kernel, PageRank and graphlet experiments"};
  rrw::ExperimentConfig cfg;
  std::string task = "pagerank";
  std::string launch = "per-node";
  std::string config_file;
  double p_term = 0.0;

  app.add_option("--config", config_file, "JSON file with the same fields as the flags");
  app.add_option("--task", task, "kernel-frobenius | kernel-regression | pagerank | graphlet");
  app.add_option("--graph", cfg.graph_spec,
                 "edge-list path or generator: er:n=,p=,seed= tree:depth= grid:RxC "
                 "dreg:n=,d=,seed= path:n= cycle:n= complete:n= star:leaves=");
  app.add_option("--schemes", cfg.schemes, "subset of iid,a,r,ar,tr")->delimiter(',');
  app.add_option("--m", cfg.m_values, "walker counts")->delimiter(',');
  auto* pterm_opt = app.add_option("--pterm", p_term, "termination probability");
  app.add_option("--sigma", cfg.sigma, "kernel regulariser sigma");
  app.add_option("--walk-len", cfg.walk_len, "graphlet walk length L");
  app.add_option("--trials", cfg.trials, "trials per (scheme, m)");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--out", cfg.output, "CSV output path (default: standard output)");
  app.add_option("--workers", cfg.workers, "worker threads (0: all cores)");
  app.add_option("--launch", launch, "pagerank ensembles: per-node | global");
  app.add_flag("--squared-error", cfg.squared_error, "pagerank: report squared L2 error");
  app.add_option("--test-fraction", cfg.test_fraction, "kernel-regression held-out fraction");
  app.add_option("--attributes", cfg.attributes, "kernel-regression node attribute file");
  app.add_option("--attribute-dim", cfg.attribute_dim, "synthetic attribute dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!config_file.empty()) apply_json(config_file, cfg, task, launch, app);
    if (*pterm_opt) cfg.p_term = p_term;
    cfg.task = rrw::parse_task(task);
    if (launch == "per-node")
      cfg.launch = rrw::LaunchMode::per_start_node;
    else if (launch == "global")
      cfg.launch = rrw::LaunchMode::global;
    else
      throw rrw::ConfigError("unknown launch mode '" + launch + "'");

    const rrw::RunResult res = rrw::run_experiment(cfg);
    if (cfg.output.empty()) {
      rrw::write_csv(std::cout, res.rows);
    } else {
      std::ofstream out(cfg.output);
      if (!out) throw rrw::ConfigError("cannot write '" + cfg.output + "'");
      rrw::write_csv(out, res.rows);
    }
    std::ostream& report = cfg.output.empty() ? std::cerr : std::cout;
    report << "task=" << rrw::task_name(cfg.task) << " graph=" << cfg.graph_spec
           << " trials=" << cfg.trials << " seed=" << cfg.seed << '\n';
    for (const auto& note : res.notes) report << note << '\n';
    rrw::print_summary(report, rrw::aggregate(res.rows), res.metric);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
