// cpscausal: command-line front end for the cpscausal library.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "cpscausal/causal_graph.hpp"
#include "cpscausal/data_ingest.hpp"
#include "cpscausal/error.hpp"
#include "cpscausal/estimation.hpp"
#include "cpscausal/impact.hpp"
#include "cpscausal/inference.hpp"
#include "cpscausal/serialization.hpp"
#include "cpscausal/simgen.hpp"
#include "cpscausal/structure_learning.hpp"

#ifndef CPSCAUSAL_VERSION
#define CPSCAUSAL_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace cpscausal;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const auto tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
    out << bytes;
    if (!out.flush()) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  }
  fs::rename(tmp, target);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) {
    ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return ss.str();
}

// "A=x,B=y" -> {A: x, B: y}
std::map<std::string, std::string> parse_assignments(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw Error(ErrorCode::InvalidArgument, "expected NAME=STATE, got '" + item + "'");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

CausalGraph load_graph(const std::string& path) {
  const auto text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return graph_from_json(parse_json(text));
  return load_domain_graph(text);
}

// Everything a run needs to be reproduced: recorded next to each artifact.
class Run {
 public:
  Run(std::vector<std::string> argv, CLI::App* sub) : argv_(std::move(argv)), sub_(sub) {}

  void input(const std::string& path) {
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(read_file(path))}});
  }
  void seed(std::uint64_t s) { seed_ = s; }

  void output(const std::string& path, const std::string& bytes) {
    write_atomic(path, bytes);
    outputs_.push_back({{"path", path}, {"sha256", sha256_hex(bytes)}});
  }

  // Writes <primary>.manifest.json once every output is in place.
  void finish(const std::string& primary) const {
    Json config = Json::object();
    for (const auto* opt : sub_->get_options()) {
      if (opt->get_lnames().empty() || opt->get_lnames().front() == "help") continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& res = opt->results();
        config[name] = opt->get_type_size() == 0 ? Json(true)
                       : res.size() == 1         ? Json(res.front())
                                                 : Json(res);
      } else if (!opt->get_default_str().empty()) {
        config[name] = opt->get_default_str();
      }
    }
    Json m = {{"command", sub_->get_name()},
              {"argv", argv_},
              {"config", config},
              {"inputs", inputs_},
              {"seed", seed_ ? Json(*seed_) : Json()},
              {"tool_version", CPSCAUSAL_VERSION},
              {"outputs", outputs_}};
    write_atomic(primary + ".manifest.json", dump_json(m));
  }

 private:
  std::vector<std::string> argv_;
  CLI::App* sub_;
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  std::optional<std::uint64_t> seed_;
};

std::string fmt_prob(double p) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(4) << p;
  return ss.str();
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

int run_cli(const std::vector<std::string>& args, int depth) {
  CLI::App app{"Causal-graph attack impact analysis for cyber-physical systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CPSCAUSAL_VERSION);

  // discretize
  std::string in_csv, in_spec, out_path;
  auto* discretize_cmd = app.add_subcommand("discretize", "Map a historian CSV to discrete states");
  discretize_cmd->add_option("--input", in_csv, "Historian CSV")->required();
  discretize_cmd->add_option("--spec", in_spec, "Variable spec file")->required();
  discretize_cmd->add_option("--out", out_path, "Dataset JSON")->required();

  // learn
  std::string dataset_path, algo = "hc", score_name, root;
  double alpha = 0.01, ess = 1.0;
  std::optional<int> max_cond, max_parents;
  bool candidate_filter = false, to_dag = false;
  auto* learn_cmd = app.add_subcommand("learn", "Learn a causal graph from a dataset");
  learn_cmd->add_option("--dataset", dataset_path, "Dataset JSON")->required();
  learn_cmd->add_option("--algo", algo, "pc | hc | cl")
      ->check(CLI::IsMember({"pc", "hc", "cl"}))
      ->capture_default_str();
  learn_cmd->add_option("--score", score_name, "chi2 (pc) | bic | k2 | bdeu (hc)")
      ->check(CLI::IsMember({"chi2", "bic", "k2", "bdeu"}));
  learn_cmd->add_option("--alpha", alpha, "PC significance level")->capture_default_str();
  learn_cmd->add_option("--ess", ess, "Equivalent sample size for bdeu")->capture_default_str();
  learn_cmd->add_option("--max-cond", max_cond, "PC: largest conditioning set");
  learn_cmd->add_option("--max-parents", max_parents, "HC: parent limit per node");
  learn_cmd->add_flag("--candidate-filter", candidate_filter,
                      "HC: skip pairs that look marginally independent");
  learn_cmd->add_option("--root", root, "CL: root variable (default: first by name)");
  learn_cmd->add_flag("--dag", to_dag, "PC: orient remaining undirected edges");
  learn_cmd->add_option("--out", out_path, "Graph JSON")->required();

  // fit
  std::string graph_path, estimator = "mle";
  auto* fit_cmd = app.add_subcommand("fit", "Estimate CPTs for a DAG");
  fit_cmd->add_option("--dataset", dataset_path, "Dataset JSON")->required();
  fit_cmd->add_option("--graph", graph_path, "Graph JSON or domain graph text")->required();
  fit_cmd->add_option("--estimator", estimator, "mle | bayes")
      ->check(CLI::IsMember({"mle", "bayes"}))
      ->capture_default_str();
  fit_cmd->add_option("--ess", ess, "Equivalent sample size for bayes")->capture_default_str();
  fit_cmd->add_option("--out", out_path, "Net JSON")->required();

  // compare
  std::string left_path, right_path;
  auto* compare_cmd = app.add_subcommand("compare", "Edge-level comparison of two graphs");
  compare_cmd->add_option("--left", left_path, "Graph JSON or domain graph text")->required();
  compare_cmd->add_option("--right", right_path, "Graph JSON or domain graph text")->required();
  compare_cmd->add_option("--out", out_path, "EdgeDiff JSON");

  // infer
  std::string net_path, target, evidence_text;
  auto* infer_cmd = app.add_subcommand("infer", "Posterior of one variable given evidence");
  infer_cmd->add_option("--net", net_path, "Net JSON")->required();
  infer_cmd->add_option("--target", target, "Query variable")->required();
  infer_cmd->add_option("--evidence", evidence_text, "NAME=STATE,...");
  infer_cmd->add_option("--out", out_path, "Posterior JSON");

  // impact
  std::string attacks_path, rule_name = "children";
  double theta = 0.9;
  bool condition_preconditions = false;
  auto* impact_cmd = app.add_subcommand("impact", "Discover impacted DPs for each attack");
  auto* impact_net = impact_cmd->add_option("--net", net_path, "Net JSON");
  auto* impact_graph =
      impact_cmd->add_option("--graph", graph_path, "Domain graph: report out-neighbours only");
  impact_net->excludes(impact_graph);
  impact_cmd->add_option("--attacks", attacks_path, "Attack JSON array")->required();
  impact_cmd->add_option("--theta", theta, "Inclusion threshold in (0, 1]")->capture_default_str();
  impact_cmd->add_option("--candidate-rule", rule_name, "children | undirected_neighbors")
      ->capture_default_str();
  impact_cmd->add_flag("--condition-preconditions", condition_preconditions,
                       "Experimental: add attack preconditions as evidence");
  impact_cmd->add_option("--out", out_path, "Report JSON");

  // sample
  std::string fixture_name, clamp_text, spec_out;
  std::size_t n_records = 1000;
  std::uint64_t seed = 1;
  auto* sample_cmd = app.add_subcommand("sample", "Synthesize a historian CSV");
  auto* sample_fixture = sample_cmd->add_option("--fixture", fixture_name, "Built-in fixture net");
  auto* sample_net = sample_cmd->add_option("--net", net_path, "Net JSON");
  sample_fixture->excludes(sample_net);
  sample_cmd->add_option("--n", n_records, "Record count")->capture_default_str();
  sample_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
  sample_cmd->add_option("--clamp", clamp_text, "NAME=STATE,... forced in every record");
  sample_cmd->add_option("--out", out_path, "CSV output")->required();
  sample_cmd->add_option("--spec-out", spec_out, "Also write the variable spec file");

  // export
  std::string format = "dot";
  auto* export_cmd = app.add_subcommand("export", "Render a graph as DOT or JSON");
  export_cmd->add_option("--graph", graph_path, "Graph JSON or domain graph text")->required();
  export_cmd->add_option("--format", format, "dot | json")
      ->check(CLI::IsMember({"dot", "json"}))
      ->capture_default_str();
  export_cmd->add_option("--out", out_path, "Output file (stdout when absent)");

  // replay
  std::string manifest_path;
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a manifest and verify its outputs");
  replay_cmd->add_option("manifest", manifest_path, "Manifest JSON")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << CPSCAUSAL_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorCode::InvalidArgument, e.what());
  }

  CLI::App* sub = app.get_subcommands().front();
  Run run(args, sub);

  if (sub == discretize_cmd) {
    run.input(in_csv);
    run.input(in_spec);
    const auto log = parse_log(read_file(in_csv));
    const auto ds = discretize(log, parse_variable_specs(read_file(in_spec)));
    run.output(out_path, dump_json(dataset_to_json(ds)));
    run.finish(out_path);
    std::cout << "discretized " << ds.num_records() << " records x " << ds.num_variables()
              << " variables -> " << out_path << "\n";
    return 0;
  }

  if (sub == learn_cmd) {
    run.input(dataset_path);
    const auto ds = dataset_from_json(parse_json(read_file(dataset_path)));
    CausalGraph g;
    if (algo == "pc") {
      if (!score_name.empty() && score_name != "chi2") {
        throw Error(ErrorCode::InvalidArgument, "pc uses the chi2 test; got --score " + score_name);
      }
      if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "--alpha must lie in (0, 1)");
      }
      g = learn_pc(ds, PcConfig{alpha, max_cond}).graph;
      if (to_dag) g = extend_to_dag(g);
    } else if (algo == "hc") {
      if (score_name == "chi2") {
        throw Error(ErrorCode::InvalidArgument, "hc needs a score: bic, k2 or bdeu");
      }
      HcConfig cfg;
      cfg.score = ScoreSpec{score_name.empty() ? ScoreMethod::Bic : score_method_from_string(score_name),
                            ess};
      cfg.max_parents = max_parents;
      cfg.candidate_filter = candidate_filter;
      g = learn_hc(ds, cfg).graph;
    } else {
      if (!score_name.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cl weighs edges by mutual information; drop --score");
      }
      const auto names = ds.names();
      g = learn_cl(ds, ClConfig{root.empty() ? *std::min_element(names.begin(), names.end()) : root});
    }
    run.output(out_path, dump_json(graph_to_json(g)));
    run.finish(out_path);
    std::cout << algo << ": " << g.num_edges() << " edges over " << g.num_nodes() << " nodes -> "
              << out_path << "\n";
    for (const auto& e : g.edges()) {
      std::cout << "  " << e.src << (e.directed ? " -> " : " -- ") << e.dst << "\n";
    }
    return 0;
  }

  if (sub == fit_cmd) {
    run.input(dataset_path);
    run.input(graph_path);
    const auto ds = dataset_from_json(parse_json(read_file(dataset_path)));
    const auto g = load_graph(graph_path);
    const auto net = estimator == "mle" ? fit_mle(ds, g) : fit_bayes(ds, g, ess);
    run.output(out_path, dump_json(net_to_json(net)));
    run.finish(out_path);
    std::cout << estimator << ": fitted " << net.num_nodes() << " CPTs on " << ds.num_records()
              << " records -> " << out_path << "\n";
    return 0;
  }

  if (sub == compare_cmd) {
    run.input(left_path);
    run.input(right_path);
    const auto diff = compare(load_graph(left_path), load_graph(right_path));
    auto section = [](const char* label, const std::vector<NamePair>& pairs) {
      std::cout << std::left << std::setw(11) << label << std::right << std::setw(4) << pairs.size();
      for (const auto& [a, b] : pairs) std::cout << "  " << a << "->" << b;
      std::cout << "\n";
    };
    section("common", diff.common);
    section("reversed", diff.reversed);
    section("only_left", diff.only_left);
    section("only_right", diff.only_right);
    if (!out_path.empty()) {
      run.output(out_path, dump_json(edge_diff_to_json(diff)));
      run.finish(out_path);
    }
    return 0;
  }

  if (sub == infer_cmd) {
    run.input(net_path);
    const auto net = net_from_json(parse_json(read_file(net_path)));
    const auto labelled = parse_assignments(evidence_text);
    const auto dist = posterior(net, Query{target, resolve_evidence(net, labelled)});
    const auto& states = net.variables[net.index_of(target)].states;
    Json d = Json::object();
    std::cout << "P(" << target << (labelled.empty() ? "" : " | " + evidence_text) << ")\n";
    for (std::size_t s = 0; s < dist.size(); ++s) {
      d[states[s]] = dist[s];
      std::cout << "  " << std::left << std::setw(10) << states[s] << fmt_prob(dist[s]) << "\n";
    }
    if (!out_path.empty()) {
      run.output(out_path,
                 dump_json({{"target", target}, {"evidence", labelled}, {"distribution", d}}));
      run.finish(out_path);
    }
    return 0;
  }

  if (sub == impact_cmd) {
    ImpactConfig cfg;
    cfg.theta = theta;
    cfg.candidate_rule = candidate_rule_from_string(rule_name);
    cfg.condition_preconditions = condition_preconditions;
    cfg.validate();
    if (net_path.empty() && graph_path.empty()) {
      throw Error(ErrorCode::InvalidArgument, "impact needs --net or --graph");
    }
    run.input(attacks_path);
    const auto attacks = attacks_from_json(parse_json(read_file(attacks_path)));

    Json reports = Json::array();
    Json skipped = Json::array();
    auto missing_from = [](const CausalGraph& g, const AttackSpec& a) {
      std::vector<std::string> missing;
      for (const auto& t : a.targeted) {
        if (!g.find(t)) missing.push_back(t);
      }
      return missing;
    };

    if (!net_path.empty()) {
      run.input(net_path);
      const auto net = net_from_json(parse_json(read_file(net_path)));
      std::cout << std::left << std::setw(8) << "attack" << std::setw(26) << "targeted"
                << std::setw(6) << "cat" << "impacted (probability)\n";
      for (const auto& a : attacks) {
        if (const auto missing = missing_from(net.graph, a); !missing.empty()) {
          skipped.push_back({{"attack_id", a.id}, {"missing", missing}});
          continue;
        }
        const auto report = discover_impact(net, a, cfg);
        reports.push_back(report_to_json(report));
        std::vector<std::string> shown;
        for (const auto& c : report.candidates) {
          if (c.included) shown.push_back(c.candidate + " (" + fmt_prob(c.probability) + ")");
        }
        std::cout << std::left << std::setw(8) << a.id << std::setw(26) << join(report.targeted)
                  << std::setw(6) << to_string(report.category)
                  << (shown.empty() ? "-" : join(shown)) << "\n";
      }
    } else {
      run.input(graph_path);
      const auto g = load_graph(graph_path);
      for (const auto& a : attacks) {
        if (const auto missing = missing_from(g, a); !missing.empty()) {
          skipped.push_back({{"attack_id", a.id}, {"missing", missing}});
          continue;
        }
        const auto impacted = domain_impact(g, a);
        reports.push_back({{"attack_id", a.id}, {"targeted", a.targeted}, {"impacted", impacted}});
        std::cout << std::left << std::setw(8) << a.id << std::setw(26) << join(a.targeted)
                  << (impacted.empty() ? "-" : join(impacted)) << "\n";
      }
    }
    for (const auto& s : skipped) {
      std::cout << "skipped attack " << s["attack_id"].get<std::string>() << ": not in model: "
                << join(s["missing"].get<std::vector<std::string>>()) << "\n";
    }
    if (!out_path.empty()) {
      Json doc = {{"mode", net_path.empty() ? "domain_graph" : "bayes_net"},
                  {"theta", theta},
                  {"candidate_rule", std::string(to_string(cfg.candidate_rule))},
                  {"condition_preconditions", condition_preconditions},
                  {"reports", reports},
                  {"skipped", skipped}};
      run.output(out_path, dump_json(doc));
      run.finish(out_path);
    }
    return 0;
  }

  if (sub == sample_cmd) {
    if (fixture_name.empty() == net_path.empty()) {
      throw Error(ErrorCode::InvalidArgument, "sample needs exactly one of --fixture or --net");
    }
    if (n_records == 0) throw Error(ErrorCode::InvalidArgument, "--n must be at least 1");
    BayesNet net;
    if (!fixture_name.empty()) {
      net = fixture(fixture_name).net;
    } else {
      run.input(net_path);
      net = net_from_json(parse_json(read_file(net_path)));
    }
    run.seed(seed);
    std::map<std::string, int> clamp;
    for (const auto& [name, label] : parse_assignments(clamp_text)) {
      clamp.merge(resolve_evidence(net, {{name, label}}));
    }
    const auto ds = sample_with_clamp(net, n_records, seed, clamp);
    run.output(out_path, format_log(render_log(ds, seed)));
    if (!spec_out.empty()) run.output(spec_out, format_variable_specs(net.variables));
    run.finish(out_path);
    std::cout << "sampled " << n_records << " records (seed " << seed << ") -> " << out_path << "\n";
    return 0;
  }

  if (sub == export_cmd) {
    run.input(graph_path);
    const auto g = load_graph(graph_path);
    const auto text = format == "dot" ? to_dot(g) : dump_json(graph_to_json(g));
    if (out_path.empty()) {
      std::cout << text;
    } else {
      run.output(out_path, text);
      run.finish(out_path);
    }
    return 0;
  }

  // replay
  if (depth > 0) throw Error(ErrorCode::InvalidArgument, "a manifest cannot replay a replay");
  const auto m = parse_json(read_file(manifest_path));
  if (!m.contains("argv") || !m.contains("inputs") || !m.contains("outputs")) {
    throw Error(ErrorCode::ParseError, "manifest lacks argv, inputs or outputs");
  }
  for (const auto& in : m["inputs"]) {
    const auto path = in["path"].get<std::string>();
    if (sha256_hex(read_file(path)) != in["sha256"].get<std::string>()) {
      throw Error(ErrorCode::ReplayMismatch, "input '" + path + "' changed since the run");
    }
  }
  std::cout << "replaying: " << join(m["argv"].get<std::vector<std::string>>(), " ") << "\n";
  const int rc = run_cli(m["argv"].get<std::vector<std::string>>(), depth + 1);
  if (rc != 0) return rc;
  for (const auto& out : m["outputs"]) {
    const auto path = out["path"].get<std::string>();
    if (sha256_hex(read_file(path)) != out["sha256"].get<std::string>()) {
      throw Error(ErrorCode::ReplayMismatch, "output '" + path + "' differs from the manifest");
    }
  }
  std::cout << "replay ok: " << m["outputs"].size() << " outputs identical\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto fail = [](std::string_view code, const std::string& message, int status) {
    std::cerr << Json({{"error", code}, {"message", message}}).dump() << "\n";
    return status;
  };
  try {
    return run_cli(args, 0);
  } catch (const Error& e) {
    switch (category_of(e.code())) {
      case ErrorCategory::Usage: return fail(to_string(e.code()), e.what(), 2);
      case ErrorCategory::Data: return fail(to_string(e.code()), e.what(), 3);
      case ErrorCategory::Model: return fail(to_string(e.code()), e.what(), 4);
    }
  } catch (const fs::filesystem_error& e) {
    return fail("IoError", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), 4);
  }
  return 4;
}
