// End-to-end acceptance checks for the rule-extraction toolkit. Each
// criterion prints exactly one line, "PASS <n>: ..." or "FAIL <n>: ... —
// <reason>", and the process exits nonzero if any criterion failed.
//
// Criterion 7 is expected to fail: the construction it prescribes (zeroing
// the weight feeding the quadratic node's leading parameter) makes the
// network unevaluable everywhere, so the check it wants cannot be run. The
// code below still attempts it faithfully and reports the diagnostics; the
// invariant it aims at (omitting an exactly-zero probability never changes
// the equation's value) is covered by the unit suite on evaluable variants.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frx/frx.hpp"
#include "support.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

frx::Expr canon(const std::string& text) {
  return frx::canonicalize(frx::simplify(frx::parse_expression(text)));
}

frx::Network fig1() {
  return frx::reference_figure1(frx::builtin_registry());
}

frx::Binding at_i(double v) {
  frx::Binding b;
  b.vars["i"] = v;
  return b;
}

frx::Network cube_net(double w1, double wout) {
  frx::NetworkBuilder b;
  b.add_input("x").add_node("C", "V").connect("x", "C", 0, w1);
  b.set_output("C", wout);
  return b.build(frx::builtin_registry());
}

bool close_rel(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::string();
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Collects the first failure reason of a criterion.
struct Check {
  bool ok = true;
  std::string why;
  void expect(bool cond, const std::string& reason) {
    if (!cond && ok) {
      ok = false;
      why = reason;
    }
  }
};

int failures = 0;

void report(int n, const std::string& what, const Check& c,
            double elapsed = -1.0) {
  std::cout << (c.ok ? "PASS" : "FAIL") << " " << n << ": " << what;
  if (elapsed >= 0.0) {
    std::ostringstream t;
    t.precision(2);
    t << std::fixed << elapsed;
    std::cout << " (" << t.str() << "s)";
  }
  if (!c.ok) std::cout << " — " << c.why;
  std::cout << "\n";
  if (!c.ok) ++failures;
}

void run(int n, const std::string& what, void (*body)(Check&),
         double time_budget = -1.0) {
  Check c;
  Clock::time_point start = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("unexpected exception: ") + e.what());
  }
  double elapsed = seconds_since(start);
  if (time_budget > 0.0)
    c.expect(elapsed < time_budget,
             "took " + std::to_string(elapsed) + "s, budget " +
                 std::to_string(time_budget) + "s");
  report(n, what, c, elapsed);
}

// ---------------------------------------------------------------- criterion 1

// Hand-substitution oracles for the reference topology, written out
// independently of the extraction code.
const std::string kOracleL3 =
    "((-(F*p_7) +- sqrt((F*p_7)^2 - 4*(V*p_5)*(T*p_6)))/(2*(V*p_5)))*p_8";
const std::string kFExpansion = "((V*p_3)*(T*p_4))";

std::string oracle_level(const std::string& v, const std::string& t,
                         const std::string& f) {
  return "((-(" + f + "*p_7) +- sqrt((" + f + "*p_7)^2 - 4*(" + v +
         "*p_5)*(" + t + "*p_6)))/(2*(" + v + "*p_5)))*p_8";
}

void criterion1(Check& c) {
  frx::Network net = fig1();
  frx::ProbabilityAssignment pa = frx::probabilities(net, at_i(-2.0));

  frx::Rule r4 = frx::extract(net, 4, pa);
  c.expect(frx::render(r4.expr) == "Q*p_8",
           "level 4 rendered '" + frx::render(r4.expr) + "'");

  frx::Rule r3 = frx::extract(net, 3, pa);
  c.expect(frx::structurally_equal(r3.expr, canon(kOracleL3)),
           "level 3 differs from the hand substitution");

  frx::Rule r2 = frx::extract(net, 2, pa);
  c.expect(frx::structurally_equal(r2.expr,
                                   canon(oracle_level("V", "T", kFExpansion))),
           "level 2 differs from the hand substitution");

  // Three shortcut transcriptions the library must not take: dropping the
  // squared probability into a squared symbol, dropping the denominator's
  // factor two, and expanding with identity stand-ins for the real bodies.
  c.expect(frx::contains_subtree(r3.expr, canon("(F*p_7)^2")) &&
               !frx::contains_subtree(r3.expr, canon("F^2*p_7")),
           "the squared term lost its probability");
  frx::Expr div = r3.expr.right();
  c.expect(div.is(frx::ExprKind::Div) &&
               frx::structurally_equal(div.right(), canon("2*(V*p_5)")),
           "the denominator lost its factor two");
  frx::Rule r1 = frx::extract(net, 1, pa);
  c.expect(frx::contains_kind(r1.expr, frx::ExprKind::Sin) &&
               frx::contains_subtree(r1.expr, canon("(w_1*i)^3")),
           "full expansion does not use the real bodies");
}

// -------------------------------------------------------- criteria 2 and 3

struct DrawResults {
  int accepted = 0;
  std::string reconstruction_failure;  // empty while criterion 2 holds
  std::string identity_failure;        // empty while criterion 3 holds
  double elapsed = 0.0;
};

DrawResults& draw_results() {
  static DrawResults r = [] {
    DrawResults out;
    Clock::time_point start = Clock::now();
    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> mag(0.5, 2.0);
    std::uniform_real_distribution<double> input(-3.0, 3.0);
    std::bernoulli_distribution coin(0.5);

    for (int it = 0; it < 200000 && out.accepted < 1000; ++it) {
      frx::Network net = fig1();
      for (int id = 1; id <= 8; ++id)
        net.set_weight(id, (coin(rng) ? 1.0 : -1.0) * mag(rng));
      frx::Binding b = at_i(input(rng));
      frx::ForwardTrace tr;
      try {
        tr = frx::forward(net, b);
      } catch (const frx::EvalError&) {
        continue;
      }
      bool usable = true;
      for (const auto& [id, f] : tr.pre)
        if (std::fabs(f) < 1e-6) usable = false;
      double disc = std::pow(tr.act.at("F") * net.weight(7), 2) -
                    4.0 * tr.act.at("V") * net.weight(5) * tr.act.at("T") *
                        net.weight(6);
      if (std::fabs(disc) < 1e-6) usable = false;
      if (!usable) continue;
      ++out.accepted;

      frx::ProbabilityAssignment pa = frx::probabilities(net, b);
      for (const frx::Edge& e : net.edges()) {
        if (!e.from_node) continue;
        double f = tr.pre.at(e.source);
        if (!close_rel(pa.p.at(e.id) * f, frx::sigmoid(f) * e.weight, 1e-12) &&
            out.identity_failure.empty())
          out.identity_failure = "edge " + std::to_string(e.id) +
                                 " violates p*f = sigmoid(f)*w at draw " +
                                 std::to_string(out.accepted);
      }
      {
        double f_out = tr.pre.at(net.output_node());
        if (!close_rel(pa.p.at(net.output_edge_id()) * f_out,
                       frx::sigmoid(f_out) * net.output_weight(), 1e-12) &&
            out.identity_failure.empty())
          out.identity_failure = "output edge violates p*f = sigmoid(f)*w";
      }
      for (int k = 1; k <= 4; ++k) {
        frx::Rule r = frx::extract(net, k, pa);
        double v = frx::evaluate_rule(net, r, pa, b);
        if (!close_rel(v, tr.output, 1e-9) &&
            out.reconstruction_failure.empty())
          out.reconstruction_failure =
              "level " + std::to_string(k) + " deviates at draw " +
              std::to_string(out.accepted) + ": rule " +
              frx::format_double(v) + " vs forward " +
              frx::format_double(tr.output);
      }
    }
    out.elapsed = seconds_since(start);
    return out;
  }();
  return r;
}

void criterion2(Check& c) {
  const DrawResults& r = draw_results();
  c.expect(r.accepted == 1000, "only " + std::to_string(r.accepted) +
                                   " of 1000 draws were usable");
  c.expect(r.reconstruction_failure.empty(), r.reconstruction_failure);
  c.expect(r.elapsed < 10.0,
           "draws took " + std::to_string(r.elapsed) + "s, budget 10s");
}

void criterion3(Check& c) {
  const DrawResults& r = draw_results();
  c.expect(r.accepted == 1000, "only " + std::to_string(r.accepted) +
                                   " of 1000 draws were usable");
  c.expect(r.identity_failure.empty(), r.identity_failure);
}

// ---------------------------------------------------------------- criterion 4

void criterion4(Check& c) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  for (int it = 0; it < 100; ++it) {
    int n = 2 + static_cast<int>(rng() % 11);
    frx::ProbabilityAssignment pa;
    for (int id = 1; id <= n; ++id) pa.p[id] = val(rng);
    // Every assignment carries at least one negative and one >1 entry.
    pa.p[1] = -(1.0 + std::fabs(val(rng)));
    pa.p[2] = 1.0 + std::fabs(val(rng));

    frx::ProbabilityAssignment nn = frx::normalize(pa);
    double sum = 0.0;
    for (const auto& [id, rho] : *nn.rho) sum += rho;
    c.expect(std::fabs(sum - 1.0) <= 1e-12,
             "sum deviates: " + frx::format_double(sum));

    for (const auto& [i, pi] : pa.p)
      for (const auto& [j, pj] : pa.p) {
        if (i >= j) continue;
        bool p_less = pi < pj;
        bool rho_less = nn.rho->at(i) < nn.rho->at(j);
        c.expect(p_less == rho_less, "order flipped between entries " +
                                         std::to_string(i) + " and " +
                                         std::to_string(j));
      }
  }
}

// ---------------------------------------------------------------- criterion 5

void criterion5(Check& c) {
  std::mt19937_64 rng(7331);
  std::uniform_real_distribution<double> wdist(0.4, 1.2);
  std::uniform_real_distribution<double> xdist(-3.0, -0.5);
  std::uniform_real_distribution<double> tdist(-1.0, 1.0);

  int checked = 0;
  for (int attempt = 0; attempt < 20000 && checked < 50; ++attempt) {
    frx::Network net = fig1();
    for (int id = 1; id <= 8; ++id) net.set_weight(id, wdist(rng));

    frx::Dataset ds;
    for (int r = 0; r < 4; ++r) {
      frx::DatasetRow row;
      row.input.vars["i"] = xdist(rng);
      row.target = tdist(rng);
      ds.rows.push_back(row);
    }

    std::map<int, double> g;
    try {
      long skipped = 0;
      g = frx::gradients(net, ds, &skipped);
      if (skipped != 0) continue;  // compare only fully-evaluable batches
    } catch (const frx::EvalError&) {
      continue;
    }
    c.expect(g.size() == 8, "gradient map covers " + std::to_string(g.size()) +
                                " weights instead of 8");

    double h = 1e-6;
    bool usable = true;
    for (const auto& [id, dg] : g) {
      frx::Network plus = net, minus = net;
      plus.set_weight(id, net.weight(id) + h);
      minus.set_weight(id, net.weight(id) - h);
      double fd;
      try {
        fd = (frx::mse_loss(plus, ds) - frx::mse_loss(minus, ds)) / (2 * h);
      } catch (const frx::EvalError&) {
        usable = false;
        break;
      }
      c.expect(std::fabs(dg - fd) <=
                   1e-5 * std::max({1.0, std::fabs(dg), std::fabs(fd)}),
               "weight " + std::to_string(id) + ": analytic " +
                   frx::format_double(dg) + " vs finite difference " +
                   frx::format_double(fd));
    }
    if (usable) ++checked;
  }
  c.expect(checked == 50,
           "only " + std::to_string(checked) + " of 50 instances were usable");
}

// ---------------------------------------------------------------- criterion 6

void criterion6(Check& c) {
  frx::Network net = cube_net(0.8, 1.5);
  frx::Dataset ds;
  for (int i = 0; i < 64; ++i) {
    double x = -1.0 + 2.0 * i / 63.0;
    frx::DatasetRow row;
    row.input.vars["x"] = x;
    row.target = 2.0 / (1.0 + std::exp(-(x * x * x)));
    ds.rows.push_back(row);
  }
  frx::TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 5000;
  frx::TrainReport report = frx::train(net, ds, cfg);

  double final_loss = report.losses.back();
  c.expect(final_loss <= 1e-6,
           "final loss " + frx::format_double(final_loss) + " exceeds 1e-6");
  c.expect(final_loss <= 0.01 * report.initial_loss,
           "final loss is above 1% of the initial " +
               frx::format_double(report.initial_loss));
}

// ---------------------------------------------------------------- criterion 7

// Runs the prescribed construction with one edge zeroed; returns "" when the
// omitted equation matches the un-omitted rule evaluation on 100 random
// inputs, else the reason it cannot.
std::string zeroed_variant_outcome(int edge_to_zero) {
  frx::Network net = fig1();
  net.set_weight(edge_to_zero, 0.0);
  try {
    frx::Binding ref = at_i(-2.0);
    frx::Equation eq = frx::generate_equation(net, ref, 0.0);
    if (eq.omitted_edges.empty())
      return "no probability vanished, nothing was omitted";
    frx::ProbabilityAssignment pa = frx::probabilities(net, ref);
    frx::Rule r1 = frx::extract(net, 1, pa);

    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> input(-3.0, 3.0);
    int compared = 0;
    for (int it = 0; it < 2000 && compared < 100; ++it) {
      frx::Binding b = at_i(input(rng));
      double via_rule, via_eq;
      try {
        via_rule = frx::evaluate_rule(net, r1, pa, b);
        via_eq = frx::evaluate(eq.expr, b);
      } catch (const frx::EvalError&) {
        continue;
      }
      if (!close_rel(via_rule, via_eq, 1e-12))
        return "omitted equation deviates at i=" +
               frx::format_double(b.vars.at("i"));
      ++compared;
    }
    if (compared < 100) return "fewer than 100 evaluable inputs";
    return "";
  } catch (const frx::Error& e) {
    return e.what();
  }
}

void criterion7(Check& c) {
  // Edge 5 feeds the quadratic node's leading parameter; edge 1 is the path
  // upstream of it. Either zeroing is attempted in full.
  std::string direct = zeroed_variant_outcome(5);
  std::string upstream = zeroed_variant_outcome(1);
  c.expect(direct.empty() || upstream.empty(),
           "zeroing w_5 makes every forward pass divide by zero (" + direct +
               "); zeroing the upstream w_1 fixes the cubic node's "
               "preactivation at 0 for every input, so evaluation fails "
               "before probabilities are defined (" + upstream +
               "). The omission invariant itself is proven on evaluable "
               "variants in the unit suite");
}

// ---------------------------------------------------------------- criterion 8

void criterion8(Check& c) {
  frx::Network net = fig1();
  frx::ProbabilityAssignment pa =
      frx::normalize(frx::probabilities(net, at_i(-2.0)));
  frx::Rule r3 = frx::extract(net, 3, pa);
  std::string sentence =
      frx::render_informal(r3, frx::builtin_registry(), pa) + "\n";

  std::string golden = read_file(fs::path(FRX_GOLDEN_DIR) /
                                 "informal_fig1_level3_normalized.txt");
  c.expect(!golden.empty(), "golden file is missing");
  c.expect(sentence == golden, "sentence deviates from the golden file");
  for (const char* phrase : {"quadratic relationship", "force", "cubic volume",
                             "trigonometry identity"})
    c.expect(sentence.find(phrase) != std::string::npos,
             std::string("missing phrase '") + phrase + "'");
}

// ---------------------------------------------------------------- criterion 9

void criterion9(Check& c) {
  // Model round trip: serialize -> deserialize -> serialize is the identity
  // on the text, for the reference network and random-weight variants.
  frx::Registry reg = frx::builtin_registry();
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> w(-2.0, 2.0);
  for (int it = 0; it < 20; ++it) {
    frx::Network net = fig1();
    if (it > 0)
      for (int id = 1; id <= 8; ++id) net.set_weight(id, w(rng));
    std::string s1 = frx::serialize(net);
    std::string s2 = frx::serialize(frx::deserialize(s1, reg));
    c.expect(s1 == s2, "model text changed across a round trip");
  }

  // Expression round trip: canonical form re-parses to the same tree in
  // both re-lexable styles, over a 200-case random corpus.
  std::mt19937_64 erng(20260818);
  frxtest::GenOptions opts;
  for (int i = 0; i < 200; ++i) {
    frx::Expr e = frxtest::random_expr(erng, opts);
    frx::Expr cn = frx::canonicalize(e);
    for (frx::RenderStyle style :
         {frx::RenderStyle::plain, frx::RenderStyle::machine}) {
      std::string text = frx::render(cn, style);
      frx::Expr back = frx::parse_expression(text);
      c.expect(frx::structurally_equal(back, cn),
               "'" + text + "' re-parses to a different tree");
    }
  }
}

// --------------------------------------------------------------- criterion 10

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run_cli(const fs::path& dir, const std::string& args) {
  static int run_id = 0;
  fs::path out_path = dir / ("out_" + std::to_string(run_id));
  fs::path err_path = dir / ("err_" + std::to_string(run_id));
  ++run_id;
  std::string cmd = std::string("\"") + FRX_CLI_PATH + "\" " + args + " > \"" +
                    out_path.string() + "\" 2> \"" + err_path.string() + "\"";
  int rc = std::system(cmd.c_str());
  CliRun r;
  if (rc != -1 && WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

void criterion10(Check& c) {
  fs::path dir = fs::temp_directory_path() /
                 ("frx_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "fig1.net", std::ios::binary) << frx::serialize(fig1());
  std::ofstream(dir / "bad.net", std::ios::binary) << "not a model\n";
  std::string model = (dir / "fig1.net").string();

  // Byte-determinism of a payload-bearing invocation.
  std::string extract_args = "extract --model " + model +
                             " --level 4 --input i=-2";
  CliRun a = run_cli(dir, extract_args);
  CliRun b = run_cli(dir, extract_args);
  c.expect(a.code == 0, "extract exited " + std::to_string(a.code));
  c.expect(a.out.substr(0, a.out.find('\n')) == "Q*p_8",
           "extract did not print the top-level rule");
  c.expect(a.out == b.out, "payload bytes changed between identical runs");

  // The documented error matrix.
  struct Expectation {
    std::string args;
    int code;
  };
  std::vector<Expectation> matrix = {
      {"extract --level 9 --model " + model + " --input i=-2", 1},
      {"eval --model " + model, 1},
      {"eval --model " + (dir / "absent.net").string() + " --input i=1", 1},
      {"eval --model " + model + " --unknown-flag 1", 1},
      {"show --model " + (dir / "bad.net").string(), 2},
      {"eval --model " + model + " --input i=0", 3},
      {"--help", 0},
  };
  for (const Expectation& exp : matrix) {
    CliRun r = run_cli(dir, exp.args);
    c.expect(r.code == exp.code, "'" + exp.args + "' exited " +
                                     std::to_string(r.code) + ", expected " +
                                     std::to_string(exp.code));
    if (exp.code != 0)
      c.expect(!r.err.empty(), "'" + exp.args + "' left stderr empty");
  }

  std::error_code ec;
  fs::remove_all(dir, ec);
}

}  // namespace

int main() {
  run(1, "level-4 rule renders Q*p_8 and deeper levels match hand "
         "substitution", criterion1, 1.0);
  run(2, "every collapse level reconstructs the forward output on 1000 "
         "draws", criterion2, 10.0);
  run(3, "probability identity p*f = sigmoid(f)*w holds on the same draws",
      criterion3);
  run(4, "softmax normalization sums to one and preserves strict order",
      criterion4);
  run(5, "symbolic gradients match central finite differences on 50 "
         "instances", criterion5, 30.0);
  run(6, "teacher-student training recovers the cubic", criterion6, 10.0);
  run(7, "equation omission soundness on the zeroed-path variant",
      criterion7);
  run(8, "worded level-3 rule matches the golden file", criterion8);
  run(9, "model and expression round trips are fixed points", criterion9);
  run(10, "command-line determinism and exit-code conformance", criterion10);

  std::cout << (10 - failures) << "/10 criteria passed\n";
  return failures == 0 ? 0 : 1;
}
