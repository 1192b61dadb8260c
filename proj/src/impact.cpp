#include "cpscausal/impact.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <tuple>

#include "cpscausal/error.hpp"
#include "cpscausal/inference.hpp"

namespace cpscausal {

std::string_view to_string(CandidateRule rule) {
  return rule == CandidateRule::Children ? "children" : "undirected_neighbors";
}

CandidateRule candidate_rule_from_string(std::string_view text) {
  if (text == "children") return CandidateRule::Children;
  if (text == "undirected_neighbors" || text == "undirected-neighbors") {
    return CandidateRule::UndirectedNeighbors;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown candidate rule '" + std::string(text) + "'");
}

void ImpactConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta must lie in (0, 1]");
  }
}

std::string_view to_string(AttackCategory category) {
  switch (category) {
    case AttackCategory::TSIS: return "TSIS";
    case AttackCategory::TSIM: return "TSIM";
    case AttackCategory::TMIS: return "TMIS";
    case AttackCategory::TMIM: return "TMIM";
  }
  return "TSIS";
}

CausalGraph load_domain_graph(std::string_view text) {
  std::vector<std::string> nodes;
  struct PendingEdge {
    std::string src, dst;
    EdgeKind kind;
    std::size_t line;
  };
  std::vector<PendingEdge> edges;

  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream words(line);
    std::vector<std::string> tok;
    for (std::string w; words >> w;) tok.push_back(w);
    if (tok.empty()) continue;
    const auto where = "domain graph line " + std::to_string(line_no) + ": ";
    if (tok[0] == "node" && tok.size() == 2) {
      if (std::find(nodes.begin(), nodes.end(), tok[1]) != nodes.end()) {
        throw Error(ErrorCode::ParseError, where + "duplicate node '" + tok[1] + "'");
      }
      nodes.push_back(tok[1]);
    } else if (tok[0] == "edge" && tok.size() == 6 && tok[2] == "->" && tok[4] == ":") {
      if (tok[5] != "control" && tok[5] != "physical") {
        throw Error(ErrorCode::ParseError, where + "edge kind must be control or physical");
      }
      edges.push_back({tok[1], tok[3], edge_kind_from_string(tok[5]), line_no});
    } else {
      throw Error(ErrorCode::ParseError,
                  where + "expected 'node NAME' or 'edge SRC -> DST : control|physical'");
    }
  }

  CausalGraph g(nodes);
  for (const auto& e : edges) {
    if (!g.find(e.src) || !g.find(e.dst)) {
      throw Error(ErrorCode::UnknownNode, "domain graph line " + std::to_string(e.line) +
                                              ": edge refers to an undeclared node");
    }
    g.insert_edge(e.src, e.dst, e.kind);
  }
  return g;
}

std::optional<int> stage_from_name(std::string_view name) {
  std::size_t end = name.size();
  while (end > 0 && !std::isdigit(static_cast<unsigned char>(name[end - 1]))) --end;
  std::size_t start = end;
  while (start > 0 && std::isdigit(static_cast<unsigned char>(name[start - 1]))) --start;
  if (start == end) return std::nullopt;
  return name[start] - '0';
}

std::map<std::string, int> stages_from_names(const std::vector<std::string>& names) {
  std::map<std::string, int> out;
  for (const auto& n : names) {
    if (const auto s = stage_from_name(n)) out[n] = *s;
  }
  return out;
}

AttackCategory classify_attack(const AttackSpec& attack, const std::vector<std::string>& impacted,
                               const std::map<std::string, int>& stage_of) {
  auto stages = [&](const std::vector<std::string>& dps) {
    std::set<int> out;
    for (const auto& dp : dps) {
      const auto it = stage_of.find(dp);
      if (it == stage_of.end()) {
        throw Error(ErrorCode::UnknownStage, "no stage known for '" + dp + "'");
      }
      out.insert(it->second);
    }
    return out;
  };
  const bool multi_target = stages(attack.targeted).size() > 1;
  const bool multi_impact = stages(impacted.empty() ? attack.targeted : impacted).size() > 1;
  if (!multi_target) return multi_impact ? AttackCategory::TSIM : AttackCategory::TSIS;
  return multi_impact ? AttackCategory::TMIM : AttackCategory::TMIS;
}

namespace {

std::vector<std::size_t> candidate_nodes(const CausalGraph& g, std::size_t target,
                                         CandidateRule rule) {
  if (rule == CandidateRule::Children) return g.children(target);
  return g.adjacent_nodes(target);
}

}  // namespace

ImpactReport discover_impact(const BayesNet& net, const AttackSpec& attack,
                             const ImpactConfig& cfg,
                             const std::map<std::string, int>& stage_of) {
  ImpactConfig effective = cfg;
  if (attack.theta) effective.theta = *attack.theta;
  effective.validate();
  if (attack.targeted.empty()) {
    throw Error(ErrorCode::InvalidArgument, "attack '" + attack.id + "' has no targeted DPs");
  }

  std::vector<std::string> targeted = attack.targeted;
  std::sort(targeted.begin(), targeted.end());
  targeted.erase(std::unique(targeted.begin(), targeted.end()), targeted.end());
  std::vector<std::string> missing;
  for (const auto& t : targeted) {
    if (!net.graph.find(t)) missing.push_back(t);
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::TargetNotInNet, "attack '" + attack.id + "': not in net: " + list);
  }

  std::map<std::string, int> extra_evidence;
  if (effective.condition_preconditions) {
    std::map<std::string, std::string> present;
    for (const auto& [dp, label] : attack.preconditions) {
      if (net.graph.find(dp)) present[dp] = label;
    }
    extra_evidence = resolve_evidence(net, present);
  }

  std::map<std::string, CandidateVerdict> verdicts;
  for (const auto& target_name : targeted) {
    const auto target = net.graph.index_of(target_name);
    for (auto c : candidate_nodes(net.graph, target, effective.candidate_rule)) {
      const auto& cand_name = net.graph.name(c);
      if (std::binary_search(targeted.begin(), targeted.end(), cand_name)) continue;

      CandidateVerdict v;
      v.candidate = cand_name;
      v.target = target_name;
      for (int s_l = 0; s_l < static_cast<int>(net.cardinality(c)); ++s_l) {
        Query q{target_name, extra_evidence};
        q.evidence.erase(target_name);
        q.evidence[cand_name] = s_l;
        std::vector<double> dist;
        try {
          dist = posterior(net, q);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::ZeroProbabilityEvidence) continue;
          throw;
        }
        for (int s_k = 0; s_k < static_cast<int>(dist.size()); ++s_k) {
          const double p = dist[static_cast<std::size_t>(s_k)];
          const bool better =
              !v.best_target_state || p > v.probability ||
              (p == v.probability &&
               std::tie(s_k, s_l) < std::tie(*v.best_target_state, *v.best_candidate_state));
          if (better) {
            v.probability = p;
            v.best_target_state = s_k;
            v.best_candidate_state = s_l;
          }
        }
      }
      if (v.best_target_state) {
        v.best_target_label = net.variables[target].states[*v.best_target_state];
        v.best_candidate_label = net.variables[c].states[*v.best_candidate_state];
      }
      v.included = v.best_target_state.has_value() && v.probability >= effective.theta;

      // A candidate next to several targets keeps its strongest link; ties keep the
      // alphabetically first target.
      const auto it = verdicts.find(cand_name);
      if (it == verdicts.end() || v.probability > it->second.probability) {
        verdicts[cand_name] = std::move(v);
      }
    }
  }

  ImpactReport report;
  report.attack_id = attack.id;
  report.targeted = targeted;
  report.preconditions = attack.preconditions;
  report.theta = effective.theta;
  report.candidate_rule = effective.candidate_rule;
  for (auto& [name, v] : verdicts) {
    if (v.included) report.impacted.push_back(name);
    report.candidates.push_back(std::move(v));
  }
  AttackSpec normalized = attack;
  normalized.targeted = targeted;
  report.category = classify_attack(normalized, report.impacted, stage_of);
  return report;
}

ImpactReport discover_impact(const BayesNet& net, const AttackSpec& attack,
                             const ImpactConfig& cfg) {
  return discover_impact(net, attack, cfg, stages_from_names(net.graph.nodes()));
}

std::vector<std::string> domain_impact(const CausalGraph& graph, const AttackSpec& attack) {
  std::set<std::string> targeted(attack.targeted.begin(), attack.targeted.end());
  std::set<std::string> out;
  for (const auto& t : targeted) {
    const auto v = graph.find(t);
    if (!v) throw Error(ErrorCode::TargetNotInNet, "'" + t + "' is not in the graph");
    for (auto c : graph.children(*v)) {
      if (!targeted.count(graph.name(c))) out.insert(graph.name(c));
    }
  }
  return {out.begin(), out.end()};
}

}  // namespace cpscausal
