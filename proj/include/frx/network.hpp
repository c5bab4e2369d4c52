#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "frx/eval.hpp"
#include "frx/numformat.hpp"
#include "frx/registry.hpp"

namespace frx {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One weighted connection feeding one named parameter of its target node.
struct Edge {
  int id = 0;            // dense, 1-based; the edge's probability symbol index
  std::string source;    // an input variable or a node id
  bool from_node = false;
  std::string target;    // node id
  int slot = 0;          // 0-based parameter index of the target's function
  double weight = 1.0;
};

struct NetNode {
  std::string id;
  ComprehensiveFunction fc;  // copied out of the registry when built
  PmBranch pm = PmBranch::plus;
  int layer = 0;             // 1 + max layer over node-fed inputs; 1 at the bottom
  std::vector<int> incoming; // edge id per parameter slot
};

// Values recorded by a forward pass.
struct ForwardTrace {
  std::map<std::string, double> pre;  // f_n per node id
  std::map<std::string, double> act;  // sigmoid(f_n) per node id
  double output = 0.0;                // output_weight * act(output node)
};

class NetworkBuilder;

class Network {
 public:
  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<NetNode>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return directed_; }
  const std::string& output_node() const { return output_node_; }
  double output_weight() const { return output_weight_; }

  // The output connection carries the next id after the last real edge.
  int output_edge_id() const { return static_cast<int>(edges_.size()) + 1; }

  int depth() const {
    int d = 0;
    for (const auto& n : nodes_) d = std::max(d, n.layer);
    return d;
  }

  const NetNode& node(const std::string& id) const {
    for (const auto& n : nodes_)
      if (n.id == id) return n;
    throw ValidationError("unknown node '" + id + "'");
  }

  const Edge& edge(int id) const {
    if (id < 1 || id > static_cast<int>(edges_.size()))
      throw ValidationError("unknown edge " + std::to_string(id));
    return edges_[static_cast<std::size_t>(id) - 1];
  }

  bool is_input(const std::string& name) const {
    return std::find(inputs_.begin(), inputs_.end(), name) != inputs_.end();
  }

  double weight(int edge_id) const {
    if (edge_id == output_edge_id()) return output_weight_;
    return edge(edge_id).weight;
  }

  void set_weight(int edge_id, double w) {
    if (!std::isfinite(w))
      throw ValidationError("weight must be finite");
    if (edge_id == output_edge_id()) {
      output_weight_ = w;
      return;
    }
    const Edge& e = edge(edge_id);  // bounds check
    edges_[static_cast<std::size_t>(e.id) - 1].weight = w;
  }

 private:
  friend class NetworkBuilder;
  std::vector<std::string> inputs_;
  std::vector<NetNode> nodes_;  // topological (layer-major) order
  std::vector<Edge> edges_;     // ascending id
  std::string output_node_;
  double output_weight_ = 1.0;
  bool directed_ = true;
};

class NetworkBuilder {
 public:
  NetworkBuilder& add_input(std::string name) {
    inputs_.push_back(std::move(name));
    return *this;
  }
  NetworkBuilder& add_node(std::string id, std::string fn,
                           PmBranch pm = PmBranch::plus) {
    nodes_.push_back({std::move(id), std::move(fn), pm});
    return *this;
  }
  // Edges get dense 1-based ids in the order connect() is called.
  NetworkBuilder& connect(std::string source, std::string target, int slot,
                          double weight = 1.0) {
    Edge e;
    e.id = static_cast<int>(edges_.size()) + 1;
    e.source = std::move(source);
    e.target = std::move(target);
    e.slot = slot;
    e.weight = weight;
    edges_.push_back(std::move(e));
    return *this;
  }
  NetworkBuilder& set_output(std::string node, double weight = 1.0) {
    if (has_output_)
      throw ValidationError("output already set to '" + output_node_ + "'");
    has_output_ = true;
    output_node_ = std::move(node);
    output_weight_ = weight;
    return *this;
  }
  NetworkBuilder& set_directed(bool directed) {
    directed_ = directed;
    return *this;
  }

  Network build(const Registry& reg) const {
    Network net;
    net.directed_ = directed_;

    if (inputs_.empty()) throw ValidationError("network needs at least one input");
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      const std::string& name = inputs_[i];
      Expr cls = detail::classify_ident_checked(name);
      if (!cls.is(ExprKind::Variable) || detail::is_weight_name(name))
        throw ValidationError("input name '" + name +
                              "' is reserved or does not read back as a "
                              "variable");
      for (std::size_t j = 0; j < i; ++j)
        if (inputs_[j] == name)
          throw ValidationError("duplicate input '" + name + "'");
    }
    net.inputs_ = inputs_;

    if (nodes_.empty()) throw ValidationError("network needs at least one node");
    std::map<std::string, std::size_t> index;
    std::vector<NetNode> nodes;
    for (const auto& spec : nodes_) {
      detail::classify_ident_checked(spec.id);
      if (index.count(spec.id))
        throw ValidationError("duplicate node id '" + spec.id + "'");
      if (std::find(inputs_.begin(), inputs_.end(), spec.id) != inputs_.end())
        throw ValidationError("node id '" + spec.id +
                              "' collides with an input name");
      NetNode n;
      n.id = spec.id;
      n.fc = reg.at(spec.fn);  // throws on unknown function
      n.pm = spec.pm;
      n.incoming.assign(static_cast<std::size_t>(n.fc.arity()), 0);
      index[n.id] = nodes.size();
      nodes.push_back(std::move(n));
    }

    std::vector<Edge> edges = edges_;
    for (Edge& e : edges) {
      auto target = index.find(e.target);
      if (target == index.end())
        throw ValidationError("edge " + std::to_string(e.id) +
                              " targets unknown node '" + e.target + "'");
      NetNode& tn = nodes[target->second];
      if (e.slot < 0 || e.slot >= tn.fc.arity())
        throw ValidationError("edge " + std::to_string(e.id) + " feeds slot " +
                              std::to_string(e.slot) + " of node '" + e.target +
                              "', but function '" + tn.fc.name + "' has " +
                              std::to_string(tn.fc.arity()) + " parameters");
      e.from_node = index.count(e.source) > 0;
      if (!e.from_node &&
          std::find(inputs_.begin(), inputs_.end(), e.source) == inputs_.end())
        throw ValidationError("edge " + std::to_string(e.id) +
                              " has unknown source '" + e.source + "'");
      if (!std::isfinite(e.weight))
        throw ValidationError("edge " + std::to_string(e.id) +
                              " has a non-finite weight");
      if (tn.incoming[static_cast<std::size_t>(e.slot)] != 0)
        throw ValidationError("node '" + e.target + "' parameter '" +
                              tn.fc.params[static_cast<std::size_t>(e.slot)] +
                              "' is fed by two edges");
      tn.incoming[static_cast<std::size_t>(e.slot)] = e.id;
    }
    for (const NetNode& n : nodes)
      for (std::size_t s = 0; s < n.incoming.size(); ++s)
        if (n.incoming[s] == 0)
          throw ValidationError("node '" + n.id + "' parameter '" +
                                n.fc.params[s] + "' has no incoming edge");

    // Layers via depth-first search; a node still on the stack means a cycle.
    std::vector<int> layer(nodes.size(), 0), state(nodes.size(), 0);
    auto assign = [&](auto&& self, std::size_t i) -> int {
      if (state[i] == 1)
        throw ValidationError("cycle through node '" + nodes[i].id + "'");
      if (state[i] == 2) return layer[i];
      state[i] = 1;
      int deepest = 0;
      for (int eid : nodes[i].incoming) {
        const Edge& e = edges[static_cast<std::size_t>(eid) - 1];
        if (e.from_node) deepest = std::max(deepest, self(self, index[e.source]));
      }
      state[i] = 2;
      layer[i] = deepest + 1;
      return layer[i];
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) assign(assign, i);
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].layer = layer[i];

    if (!has_output_) throw ValidationError("missing output");
    if (!index.count(output_node_))
      throw ValidationError("output references unknown node '" + output_node_ +
                            "'");
    if (!std::isfinite(output_weight_))
      throw ValidationError("output weight must be finite");

    std::stable_sort(nodes.begin(), nodes.end(),
                     [](const NetNode& a, const NetNode& b) {
                       return a.layer < b.layer;
                     });
    net.nodes_ = std::move(nodes);
    net.edges_ = std::move(edges);
    net.output_node_ = output_node_;
    net.output_weight_ = output_weight_;
    return net;
  }

 private:
  struct NodeSpec {
    std::string id, fn;
    PmBranch pm;
  };
  std::vector<std::string> inputs_;
  std::vector<NodeSpec> nodes_;
  std::vector<Edge> edges_;
  std::string output_node_;
  double output_weight_ = 1.0;
  bool has_output_ = false;
  bool directed_ = true;
};

// Evaluates every node in layer order: each parameter receives its source
// value times the edge weight, the node applies its function to get f_n,
// and passes it through the logistic squash to get a_n. The network output
// is the output weight times the output node's activation.
inline ForwardTrace forward(const Network& net, const Binding& input,
                            double div_tol = kDivTol) {
  if (!net.directed())
    throw ValidationError(
        "undirected networks have no execution semantics; set directed true");
  for (const std::string& name : net.inputs())
    if (!input.vars.count(name))
      throw UnboundSymbolError("input '" + name + "' is not bound");

  ForwardTrace trace;
  EvalOptions opt;
  opt.div_tol = div_tol;
  for (const NetNode& n : net.nodes()) {
    Binding params;
    params.pm_branch = n.pm;
    for (std::size_t s = 0; s < n.incoming.size(); ++s) {
      const Edge& e = net.edge(n.incoming[s]);
      double src = e.from_node ? trace.act.at(e.source)
                               : input.vars.at(e.source);
      params.vars[n.fc.params[s]] = src * e.weight;
    }
    double f;
    try {
      f = evaluate(n.fc.body, params, opt);
    } catch (const DivisionByZeroError& e) {
      throw DivisionByZeroError("node '" + n.id + "': " + e.what());
    } catch (const DomainError& e) {
      throw DomainError("node '" + n.id + "': " + e.what());
    } catch (const EvalError& e) {
      throw EvalError("node '" + n.id + "': " + e.what());
    }
    trace.pre[n.id] = f;
    trace.act[n.id] = sigmoid(f);
  }
  trace.output = net.output_weight() * trace.act.at(net.output_node());
  return trace;
}

// ---------------------------------------------------------------------------
// Text format.
//
//   version 1
//   [meta]
//   directed true
//   [inputs]
//   i
//   [nodes]
//   V V plus
//   [edges]
//   1 i -> V.0 1
//   [output]
//   V 1
//
// Full-line '#' comments and blank lines are ignored. Edge ids must be dense
// starting at 1; the implicit output connection takes the next id.

inline std::string serialize(const Network& net) {
  std::ostringstream out;
  out << "version 1\n";
  out << "[meta]\n";
  out << "directed " << (net.directed() ? "true" : "false") << "\n";
  out << "[inputs]\n";
  for (const auto& i : net.inputs()) out << i << "\n";
  out << "[nodes]\n";
  for (const auto& n : net.nodes())
    out << n.id << " " << n.fc.name << " "
        << (n.pm == PmBranch::plus ? "plus" : "minus") << "\n";
  out << "[edges]\n";
  for (const auto& e : net.edges())
    out << e.id << " " << e.source << " -> " << e.target << "." << e.slot
        << " " << format_double(e.weight) << "\n";
  out << "[output]\n";
  out << net.output_node() << " " << format_double(net.output_weight())
      << "\n";
  return out.str();
}

inline Network deserialize(const std::string& text, const Registry& reg) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string section;
  bool seen_version = false, any_content = false;

  NetworkBuilder builder;
  struct EdgeLine {
    int id;
    std::string source, target;
    int slot;
    double weight;
  };
  std::vector<EdgeLine> edge_lines;
  bool have_output = false;
  std::string output_node;
  double output_weight = 1.0;

  auto fail = [&](const std::string& msg) -> void {
    throw ValidationError("model file line " + std::to_string(lineno) + ": " +
                          msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;

    if (!any_content && tok[0] == "version") {
      if (tok.size() != 2 || tok[1] != "1")
        fail("unsupported model file version '" +
             (tok.size() > 1 ? tok[1] : "") + "'");
      seen_version = true;
      any_content = true;
      continue;
    }
    any_content = true;

    if (tok[0][0] == '[') {
      if (tok.size() != 1) fail("unexpected text after section header");
      section = tok[0];
      if (section != "[meta]" && section != "[inputs]" &&
          section != "[nodes]" && section != "[edges]" &&
          section != "[output]")
        fail("unknown section " + section);
      continue;
    }
    if (section.empty()) fail("expected a section header");

    if (section == "[meta]") {
      if (tok.size() == 2 && tok[0] == "directed") {
        if (tok[1] != "true" && tok[1] != "false")
          fail("directed must be true or false");
        builder.set_directed(tok[1] == "true");
      } else {
        fail("unknown meta entry '" + tok[0] + "'");
      }
    } else if (section == "[inputs]") {
      if (tok.size() != 1) fail("inputs hold one name per line");
      builder.add_input(tok[0]);
    } else if (section == "[nodes]") {
      if (tok.size() != 3) fail("node lines read: id function plus|minus");
      if (tok[2] != "plus" && tok[2] != "minus")
        fail("branch must be plus or minus");
      builder.add_node(tok[0], tok[1],
                       tok[2] == "plus" ? PmBranch::plus : PmBranch::minus);
    } else if (section == "[edges]") {
      if (tok.size() != 5 || tok[2] != "->")
        fail("edge lines read: id source -> node.slot weight");
      std::size_t dot = tok[3].rfind('.');
      if (dot == std::string::npos) fail("edge target needs a .slot suffix");
      EdgeLine e;
      try {
        e.id = parse_int(tok[0], "edge id");
        e.target = tok[3].substr(0, dot);
        e.slot = parse_int(tok[3].substr(dot + 1), "slot");
        e.source = tok[1];
        e.weight = parse_double(tok[4], "weight");
      } catch (const ValidationError& err) {
        fail(err.what());
      }
      edge_lines.push_back(std::move(e));
    } else if (section == "[output]") {
      if (have_output) fail("multiple output lines");
      if (tok.size() != 2) fail("output line reads: node weight");
      try {
        output_weight = parse_double(tok[1], "output weight");
      } catch (const ValidationError& err) {
        fail(err.what());
      }
      output_node = tok[0];
      have_output = true;
    }
  }
  (void)seen_version;  // absence means version 1

  std::sort(edge_lines.begin(), edge_lines.end(),
            [](const EdgeLine& a, const EdgeLine& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < edge_lines.size(); ++i) {
    if (edge_lines[i].id != static_cast<int>(i) + 1)
      throw ValidationError(
          "model file: edge ids must be dense starting at 1 (missing or "
          "duplicate id " +
          std::to_string(i + 1) + ")");
    builder.connect(edge_lines[i].source, edge_lines[i].target,
                    edge_lines[i].slot, edge_lines[i].weight);
  }
  if (!have_output) throw ValidationError("model file: missing output weight");
  builder.set_output(output_node, output_weight);
  return builder.build(reg);
}

// The four-node worked example: V and T read the input, F(m,a) combines
// them, and Q(a,b,c) combines all three; unit weights everywhere.
inline Network reference_figure1(const Registry& reg) {
  NetworkBuilder b;
  b.add_input("i");
  b.add_node("V", "V").add_node("T", "T").add_node("F", "F").add_node("Q", "Q");
  b.connect("i", "V", 0);  // 1
  b.connect("i", "T", 0);  // 2
  b.connect("V", "F", 0);  // 3: m
  b.connect("T", "F", 1);  // 4: a
  b.connect("V", "Q", 0);  // 5: a
  b.connect("T", "Q", 2);  // 6: c
  b.connect("F", "Q", 1);  // 7: b
  b.set_output("Q");       // 8
  return b.build(reg);
}

}  // namespace frx
