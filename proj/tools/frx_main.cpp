// frx — command-line front end for the comprehensive-network rule toolkit.
//
// Subcommands: functions, build, eval, train, extract, informal, equation,
// show.  Payload goes to stdout (or --out FILE); diagnostics go to stderr.
// Exit codes: 0 success, 1 usage error, 2 validation error (bad file
// contents, bad model), 3 numeric error (singularity, domain, divergence).

#include <cctype>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "frx/frx.hpp"

namespace {

// A problem with how the tool was invoked (bad flag value, unreadable file,
// level out of range).  Reported like CLI11's own parse errors: exit 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw UsageError("failed while writing '" + path + "'");
}

// Payload goes to --out when given, stdout otherwise.
void emit(const std::string& payload, const std::string& out_path) {
  if (out_path.empty())
    std::cout << payload;
  else
    write_file(out_path, payload);
}

frx::Registry load_registry(const std::string& functions_path) {
  frx::Registry reg = frx::builtin_registry();
  if (!functions_path.empty())
    frx::load_function_definitions(reg, read_file(functions_path));
  return reg;
}

frx::Network load_model(const std::string& path, const frx::Registry& reg) {
  return frx::deserialize(read_file(path), reg);
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

frx::Binding parse_bindings(const std::vector<std::string>& pairs,
                            const char* flag) {
  frx::Binding b;
  for (const std::string& p : pairs) {
    std::size_t eq = p.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == p.size())
      throw UsageError(std::string(flag) + " expects name=value, got '" + p +
                       "'");
    std::string name = p.substr(0, eq);
    if (!valid_identifier(name))
      throw UsageError(std::string(flag) + ": '" + name +
                       "' is not a valid input name");
    double v = 0.0;
    try {
      v = frx::parse_double(p.substr(eq + 1), "value");
    } catch (const frx::ValidationError& e) {
      throw UsageError(std::string(flag) + ": " + e.what());
    }
    b.vars[name] = v;
  }
  return b;
}

// Every model input must be bound, and every binding must name a model
// input; anything else is a command-line mistake, not a model defect.
void check_bindings(const frx::Network& net, const frx::Binding& b,
                    const char* flag) {
  for (const std::string& name : net.inputs())
    if (!b.vars.count(name))
      throw UsageError(std::string("missing ") + flag +
                       " binding for input '" + name + "'");
  for (const auto& [name, value] : b.vars) {
    (void)value;
    if (!net.is_input(name))
      throw UsageError("'" + name + "' is not an input of this model");
  }
}

void check_level(const frx::Network& net, int level) {
  int max_level = net.depth() + 1;
  if (level < 1 || level > max_level)
    throw UsageError("--level " + std::to_string(level) +
                     " out of range 1.." + std::to_string(max_level));
}

frx::RenderStyle parse_style(const std::string& name) {
  if (name == "plain") return frx::RenderStyle::plain;
  if (name == "unicode") return frx::RenderStyle::unicode;
  if (name == "machine") return frx::RenderStyle::machine;
  throw UsageError("--style must be plain, unicode, or machine");
}

std::string probability_table(const frx::ProbabilityAssignment& pa) {
  std::ostringstream out;
  for (const auto& [id, value] : pa.p)
    out << "p_" << id << " = " << frx::format_double(value) << "\n";
  if (pa.rho)
    for (const auto& [id, value] : *pa.rho)
      out << "rho_" << id << " = " << frx::format_double(value) << "\n";
  return out.str();
}

std::string function_listing(const frx::Registry& reg) {
  std::ostringstream out;
  for (const frx::ComprehensiveFunction& fc : reg.list()) {
    out << fc.name << " \"" << fc.display_name << "\" (";
    for (std::size_t i = 0; i < fc.params.size(); ++i) {
      if (i) out << ", ";
      out << fc.params[i];
    }
    out << ") = " << frx::render(fc.body) << "\n";
  }
  return out.str();
}

std::string topology_listing(const frx::Network& net) {
  std::ostringstream out;
  out << "directed " << (net.directed() ? "true" : "false") << "\n";
  out << "depth " << net.depth() << "\n";
  out << "inputs " << net.inputs().size() << ":";
  for (const std::string& name : net.inputs()) out << " " << name;
  out << "\n";
  out << "nodes " << net.nodes().size() << ":\n";
  for (const frx::NetNode& n : net.nodes())
    out << "  " << n.id << " " << n.fc.name << " layer " << n.layer << " "
        << (n.pm == frx::PmBranch::plus ? "plus" : "minus") << "\n";
  // The output connection counts as an edge of the network.
  out << "edges " << net.edges().size() + 1 << ":\n";
  for (const frx::Edge& e : net.edges())
    out << "  " << e.id << " " << e.source << " -> " << e.target << "."
        << e.slot << " " << frx::format_double(e.weight) << "\n";
  out << "  " << net.output_edge_id() << " " << net.output_node()
      << " -> output " << frx::format_double(net.output_weight()) << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comprehensive-network rule toolkit"};
  app.require_subcommand(1);

  // functions [--file F] [--out FILE]
  auto* cmd_functions =
      app.add_subcommand("functions", "list the available named functions");
  std::string fn_file, fn_out;
  cmd_functions->add_option("--file", fn_file,
                            "extra function definitions to load");
  cmd_functions->add_option("--out", fn_out, "write the listing to a file");

  // build --spec S --out M [--functions F]
  auto* cmd_build = app.add_subcommand(
      "build", "validate a network description and write the model file");
  std::string build_spec, build_out, build_functions;
  cmd_build->add_option("--spec", build_spec, "network description file")
      ->required();
  cmd_build->add_option("--out", build_out, "model file to write")->required();
  cmd_build->add_option("--functions", build_functions,
                        "extra function definitions to load");

  // eval --model M --input k=v... [--functions F] [--out FILE]
  auto* cmd_eval =
      app.add_subcommand("eval", "run the network forward at an input");
  std::string eval_model, eval_functions, eval_out;
  std::vector<std::string> eval_inputs;
  cmd_eval->add_option("--model", eval_model, "model file")->required();
  cmd_eval->add_option("--input", eval_inputs, "input binding name=value");
  cmd_eval->add_option("--functions", eval_functions,
                       "extra function definitions to load");
  cmd_eval->add_option("--out", eval_out, "write the output value to a file");

  // train --model M --data D --lr R --epochs N --seed S --out M2 --log L
  auto* cmd_train =
      app.add_subcommand("train", "fit the network weights to a dataset");
  std::string train_model, train_data, train_out, train_log, train_functions;
  double train_lr = 0.1;
  int train_epochs = 100;
  unsigned long long train_seed = 0;
  std::vector<double> train_init_range;
  cmd_train->add_option("--model", train_model, "model file")->required();
  cmd_train->add_option("--data", train_data, "dataset file")->required();
  cmd_train->add_option("--lr", train_lr, "learning rate");
  cmd_train->add_option("--epochs", train_epochs, "gradient-descent epochs");
  cmd_train->add_option("--seed", train_seed, "random seed");
  cmd_train->add_option("--out", train_out, "trained model file to write")
      ->required();
  cmd_train->add_option("--log", train_log, "loss log file to write");
  cmd_train
      ->add_option("--init-range", train_init_range,
                   "re-draw all weights uniformly from LO HI before training")
      ->expected(2);
  cmd_train->add_option("--functions", train_functions,
                        "extra function definitions to load");

  // extract --model M --input k=v... --level K [--normalized] [--style S]
  auto* cmd_extract = app.add_subcommand(
      "extract", "extract the collapse-level rule at an input");
  std::string extract_model, extract_style = "plain", extract_functions,
              extract_out;
  std::vector<std::string> extract_inputs;
  int extract_level = 1;
  bool extract_normalized = false;
  cmd_extract->add_option("--model", extract_model, "model file")->required();
  cmd_extract->add_option("--input", extract_inputs,
                          "input binding name=value");
  cmd_extract->add_option("--level", extract_level, "collapse level")
      ->required();
  cmd_extract->add_flag("--normalized", extract_normalized,
                        "use softmax-normalized probabilities");
  cmd_extract->add_option("--style", extract_style,
                          "rendering style: plain, unicode, or machine");
  cmd_extract->add_option("--functions", extract_functions,
                          "extra function definitions to load");
  cmd_extract->add_option("--out", extract_out, "write the rule to a file");

  // informal --model M --input k=v... --level K [--normalized]
  auto* cmd_informal =
      app.add_subcommand("informal", "word the collapse-level rule");
  std::string informal_model, informal_functions, informal_out;
  std::vector<std::string> informal_inputs;
  int informal_level = 1;
  bool informal_normalized = false;
  cmd_informal->add_option("--model", informal_model, "model file")
      ->required();
  cmd_informal->add_option("--input", informal_inputs,
                           "input binding name=value");
  cmd_informal->add_option("--level", informal_level, "collapse level")
      ->required();
  cmd_informal->add_flag("--normalized", informal_normalized,
                         "use softmax-normalized probabilities");
  cmd_informal->add_option("--functions", informal_functions,
                           "extra function definitions to load");
  cmd_informal->add_option("--out", informal_out,
                           "write the sentence to a file");

  // equation --model M --at k=v... --epsilon E
  auto* cmd_equation = app.add_subcommand(
      "equation", "freeze the level-1 rule into a closed-form equation");
  std::string equation_model, equation_functions, equation_out;
  std::vector<std::string> equation_at;
  double equation_epsilon = 0.0;
  cmd_equation->add_option("--model", equation_model, "model file")
      ->required();
  cmd_equation->add_option("--at", equation_at,
                           "reference input binding name=value");
  cmd_equation
      ->add_option("--epsilon", equation_epsilon,
                   "omit probability factors with magnitude <= epsilon")
      ->required();
  cmd_equation->add_option("--functions", equation_functions,
                           "extra function definitions to load");
  cmd_equation->add_option("--out", equation_out,
                           "write the equation to a file");

  // show --model M
  auto* cmd_show =
      app.add_subcommand("show", "print the network topology");
  std::string show_model, show_functions, show_out;
  cmd_show->add_option("--model", show_model, "model file")->required();
  cmd_show->add_option("--functions", show_functions,
                       "extra function definitions to load");
  cmd_show->add_option("--out", show_out, "write the listing to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the error message
    return code == 0 ? 0 : 1;
  }

  try {
    if (cmd_functions->parsed()) {
      frx::Registry reg = load_registry(fn_file);
      emit(function_listing(reg), fn_out);
    } else if (cmd_build->parsed()) {
      frx::Registry reg = load_registry(build_functions);
      frx::Network net = frx::deserialize(read_file(build_spec), reg);
      write_file(build_out, frx::serialize(net));
    } else if (cmd_eval->parsed()) {
      frx::Registry reg = load_registry(eval_functions);
      frx::Network net = load_model(eval_model, reg);
      frx::Binding input = parse_bindings(eval_inputs, "--input");
      check_bindings(net, input, "--input");
      frx::ForwardTrace trace = frx::forward(net, input);
      emit(frx::format_double(trace.output) + "\n", eval_out);
    } else if (cmd_train->parsed()) {
      frx::Registry reg = load_registry(train_functions);
      frx::Network net = load_model(train_model, reg);
      frx::Dataset ds = frx::load_dataset(read_file(train_data));
      frx::TrainConfig cfg;
      cfg.learning_rate = train_lr;
      cfg.epochs = train_epochs;
      cfg.seed = train_seed;
      if (!train_init_range.empty())
        cfg.init_range = {train_init_range[0], train_init_range[1]};
      frx::TrainReport report = frx::train(net, ds, cfg);
      write_file(train_out, frx::serialize(net));
      if (!train_log.empty()) {
        std::ostringstream log;
        log << "0 " << frx::format_double(report.initial_loss) << "\n";
        for (std::size_t i = 0; i < report.losses.size(); ++i)
          log << i + 1 << " " << frx::format_double(report.losses[i]) << "\n";
        write_file(train_log, log.str());
      }
    } else if (cmd_extract->parsed()) {
      frx::RenderStyle style = parse_style(extract_style);
      frx::Registry reg = load_registry(extract_functions);
      frx::Network net = load_model(extract_model, reg);
      frx::Binding input = parse_bindings(extract_inputs, "--input");
      check_bindings(net, input, "--input");
      check_level(net, extract_level);
      frx::ProbabilityAssignment pa = frx::probabilities(net, input);
      if (extract_normalized) pa = frx::normalize(pa);
      frx::Rule rule = frx::extract(net, extract_level, pa);
      emit(frx::render(rule.expr, style) + "\n" + probability_table(pa),
           extract_out);
    } else if (cmd_informal->parsed()) {
      frx::Registry reg = load_registry(informal_functions);
      frx::Network net = load_model(informal_model, reg);
      frx::Binding input = parse_bindings(informal_inputs, "--input");
      check_bindings(net, input, "--input");
      check_level(net, informal_level);
      frx::ProbabilityAssignment pa = frx::probabilities(net, input);
      if (informal_normalized) pa = frx::normalize(pa);
      frx::Rule rule = frx::extract(net, informal_level, pa);
      emit(frx::render_informal(rule, reg, pa) + "\n", informal_out);
    } else if (cmd_equation->parsed()) {
      if (!(equation_epsilon >= 0.0))
        throw UsageError("--epsilon must be a finite value >= 0");
      frx::Registry reg = load_registry(equation_functions);
      frx::Network net = load_model(equation_model, reg);
      frx::Binding at = parse_bindings(equation_at, "--at");
      check_bindings(net, at, "--at");
      frx::Equation eq = frx::generate_equation(net, at, equation_epsilon);
      emit(frx::render_equation(eq), equation_out);
    } else if (cmd_show->parsed()) {
      frx::Registry reg = load_registry(show_functions);
      frx::Network net = load_model(show_model, reg);
      emit(topology_listing(net), show_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const frx::EvalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const frx::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
