#pragma once

#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frx/derivative.hpp"
#include "frx/network.hpp"

namespace frx {

struct DatasetRow {
  Binding input;
  double target = 0.0;
};

struct Dataset {
  std::vector<DatasetRow> rows;
};

// Whitespace-separated columns; the header names them and must include
// "target". Blank lines and '#' comments are ignored.
inline Dataset load_dataset(std::istream& in) {
  std::string line;
  int lineno = 0;
  std::vector<std::string> columns;
  int target_col = -1;
  Dataset ds;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::vector<std::string> tok;
    std::string t;
    while (ls >> t) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (columns.empty()) {
      columns = tok;
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == "target") {
          if (target_col >= 0)
            throw ValidationError("dataset line " + std::to_string(lineno) +
                                  ": two target columns");
          target_col = static_cast<int>(c);
        }
      }
      if (target_col < 0)
        throw ValidationError("dataset line " + std::to_string(lineno) +
                              ": header has no target column");
      continue;
    }
    if (tok.size() != columns.size())
      throw ValidationError("dataset line " + std::to_string(lineno) +
                            ": expected " + std::to_string(columns.size()) +
                            " fields, got " + std::to_string(tok.size()));
    DatasetRow row;
    for (std::size_t c = 0; c < tok.size(); ++c) {
      double v;
      try {
        v = parse_double(tok[c]);
      } catch (const ValidationError& e) {
        throw ValidationError("dataset line " + std::to_string(lineno) + ": " +
                              e.what());
      }
      if (static_cast<int>(c) == target_col)
        row.target = v;
      else
        row.input.vars[columns[c]] = v;
    }
    ds.rows.push_back(std::move(row));
  }
  if (columns.empty()) throw ValidationError("dataset: missing header line");
  return ds;
}

inline Dataset load_dataset(const std::string& text) {
  std::istringstream in(text);
  return load_dataset(in);
}

namespace detail {

// Per-node pieces reused across samples: the branch-resolved body and its
// partial derivative with respect to each parameter.
struct NodeGradCache {
  Expr body;
  std::vector<Expr> partials;
};

inline std::vector<NodeGradCache> gradient_caches(const Network& net) {
  std::vector<NodeGradCache> caches;
  caches.reserve(net.nodes().size());
  for (const NetNode& n : net.nodes()) {
    NodeGradCache c;
    c.body = resolve_plus_minus(n.fc.body, n.pm);
    for (const std::string& p : n.fc.params)
      c.partials.push_back(differentiate(c.body, p));
    caches.push_back(std::move(c));
  }
  return caches;
}

inline void check_row_binds_inputs(const Network& net, const DatasetRow& row,
                                   std::size_t index) {
  for (const std::string& name : net.inputs())
    if (!row.input.vars.count(name))
      throw ValidationError("dataset row " + std::to_string(index + 1) +
                            " does not bind input '" + name + "'");
}

}  // namespace detail

// Mean squared error over the rows that evaluate; rows whose forward pass
// hits a numeric error are skipped and counted. No evaluable row at all is
// an error.
inline double mse_loss(const Network& net, const Dataset& ds,
                       long* skipped_out = nullptr) {
  if (ds.rows.empty()) throw ValidationError("dataset has no rows");
  double sum = 0.0;
  long used = 0, skipped = 0;
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    detail::check_row_binds_inputs(net, ds.rows[r], r);
    double y;
    try {
      y = forward(net, ds.rows[r].input).output;
    } catch (const UnboundSymbolError&) {
      throw;
    } catch (const EvalError&) {
      ++skipped;
      continue;
    }
    double d = y - ds.rows[r].target;
    sum += d * d;
    ++used;
  }
  if (skipped_out) *skipped_out = skipped;
  if (used == 0)
    throw SingularityError("every dataset row failed to evaluate");
  return sum / static_cast<double>(used);
}

// d(MSE)/dw for every weight, keyed by edge id (output connection included).
// Exact chain rule: the loss reaches a weight through the one parameter its
// edge feeds; activations upstream collect adjoints from all their outgoing
// edges before being pushed further down.
inline std::map<int, double> gradients(const Network& net, const Dataset& ds,
                                       long* skipped_out = nullptr) {
  if (ds.rows.empty()) throw ValidationError("dataset has no rows");
  std::vector<detail::NodeGradCache> caches = detail::gradient_caches(net);

  std::map<int, double> grad;
  for (const Edge& e : net.edges()) grad[e.id] = 0.0;
  grad[net.output_edge_id()] = 0.0;

  struct RowData {
    std::size_t row = 0;
    ForwardTrace trace;
    // per node: value of d(body)/d(param) at this sample's parameter values
    std::vector<std::vector<double>> partial_values;
  };
  std::vector<RowData> usable;
  long skipped = 0;

  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    detail::check_row_binds_inputs(net, ds.rows[r], r);
    RowData data;
    data.row = r;
    try {
      data.trace = forward(net, ds.rows[r].input);
      for (std::size_t ni = 0; ni < net.nodes().size(); ++ni) {
        const NetNode& n = net.nodes()[ni];
        Binding params;
        params.pm_branch = n.pm;
        for (std::size_t s = 0; s < n.incoming.size(); ++s) {
          const Edge& e = net.edge(n.incoming[s]);
          double src = e.from_node ? data.trace.act.at(e.source)
                                   : ds.rows[r].input.vars.at(e.source);
          params.vars[n.fc.params[s]] = src * e.weight;
        }
        std::vector<double> parts;
        for (const Expr& dp : caches[ni].partials)
          parts.push_back(evaluate(dp, params));
        data.partial_values.push_back(std::move(parts));
      }
    } catch (const UnboundSymbolError&) {
      throw;
    } catch (const EvalError&) {
      ++skipped;
      continue;
    }
    usable.push_back(std::move(data));
  }
  if (skipped_out) *skipped_out = skipped;
  if (usable.empty())
    throw SingularityError("every dataset row failed to evaluate");

  for (const RowData& data : usable) {
    const ForwardTrace& trace = data.trace;
    const Binding& input = ds.rows[data.row].input;
    double dL_dy = 2.0 * (trace.output - ds.rows[data.row].target);

    // Adjoint per node activation, filled from consumers first (the node
    // list is topological, so walking it backwards visits consumers before
    // producers).
    std::map<std::string, double> dL_da;
    dL_da[net.output_node()] = dL_dy * net.output_weight();
    grad[net.output_edge_id()] += dL_dy * trace.act.at(net.output_node());

    for (std::size_t ni = net.nodes().size(); ni-- > 0;) {
      const NetNode& n = net.nodes()[ni];
      auto it = dL_da.find(n.id);
      if (it == dL_da.end()) continue;  // no path to the output
      double a = trace.act.at(n.id);
      double g_f = it->second * a * (1.0 - a);  // through the squash
      for (std::size_t s = 0; s < n.incoming.size(); ++s) {
        const Edge& e = net.edge(n.incoming[s]);
        double part = data.partial_values[ni][s];
        double src = e.from_node ? trace.act.at(e.source)
                                 : input.vars.at(e.source);
        grad[e.id] += g_f * part * src;
        if (e.from_node) dL_da[e.source] += g_f * part * e.weight;
      }
    }
  }

  for (auto& [id, g] : grad) g /= static_cast<double>(usable.size());
  return grad;
}

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 100;
  unsigned long long seed = 0;
  // When set, all weights are re-drawn uniformly from this range before the
  // first epoch; otherwise training starts from the network's weights.
  std::optional<std::pair<double, double>> init_range;
};

struct TrainReport {
  double initial_loss = 0.0;
  std::vector<double> losses;  // after each epoch's update
  long skipped_samples = 0;    // from the last epoch's pass
};

inline TrainReport train(Network& net, const Dataset& ds,
                         const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw ValidationError("learning rate must be positive and finite");
  if (cfg.epochs < 0) throw ValidationError("epochs must be non-negative");
  if (cfg.init_range && cfg.init_range->first > cfg.init_range->second)
    throw ValidationError("weight init range is inverted");

  if (cfg.init_range) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> dist(cfg.init_range->first,
                                                cfg.init_range->second);
    for (const Edge& e : net.edges()) net.set_weight(e.id, dist(rng));
    net.set_weight(net.output_edge_id(), dist(rng));
  }

  TrainReport report;
  report.initial_loss = mse_loss(net, ds, &report.skipped_samples);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::map<int, double> g = gradients(net, ds);
    for (const auto& [id, dg] : g) {
      double w = net.weight(id) - cfg.learning_rate * dg;
      if (!std::isfinite(w))
        throw DivergenceError("training diverged at epoch " +
                              std::to_string(epoch + 1));
      net.set_weight(id, w);
    }
    double loss = mse_loss(net, ds, &report.skipped_samples);
    if (!std::isfinite(loss))
      throw DivergenceError("training diverged at epoch " +
                            std::to_string(epoch + 1));
    report.losses.push_back(loss);
  }
  return report;
}

}  // namespace frx
