#include "mh4/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mh4/coverage.hpp"
#include "mh4/parallel.hpp"
#include "mh4/training.hpp"

namespace mh4 {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Sentence> read_input(const std::string& path, bool require_heads) {
  ReadOptions opt;
  opt.require_heads = require_heads;
  if (path == "-") return read_conllu(std::cin, opt);
  if (!std::filesystem::exists(path)) throw UsageError("no such file: " + path);
  return read_conllu_file(path, opt);
}

// Writes to --output when given, else to out.
template <typename F>
void emit(const std::string& output, std::ostream& out, F&& write) {
  if (output.empty() || output == "-") {
    write(out);
    return;
  }
  std::ofstream f(output, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + output);
  write(f);
  if (!f) throw std::runtime_error("write failed: " + output);
}

std::string pct(double v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

Decoder decoder_or_throw(const std::string& name) {
  auto d = parse_decoder(name);
  if (!d) throw UsageError("unknown decoder: " + name);
  return *d;
}

System system_or_throw(const std::string& name) {
  if (name == "mh3") return System::kMH3;
  if (name == "mh4") return System::kMH4;
  throw UsageError("unknown system: " + name);
}

std::string decoder_list() {
  std::string s;
  for (Decoder d : {Decoder::kMH3Greedy, Decoder::kMH4Greedy, Decoder::kMH3Global, Decoder::kMH4Two,
                    Decoder::kMH4Hybrid, Decoder::kMST}) {
    s += (s.empty() ? "" : ", ") + std::string(decoder_name(d));
  }
  return s;
}

std::string heads_text(const std::vector<int>& heads) {
  std::string s;
  for (std::size_t m = 1; m < heads.size(); ++m) {
    s += (m > 1 ? " " : "") + std::to_string(m) + ":" + std::to_string(heads[m]);
  }
  return s;
}

struct Options {
  std::string config;
  unsigned jobs = default_jobs();

  // train
  std::string train_path, dev_path, model_path, log_path;
  std::string decoder;
  int epochs = 30;
  std::uint64_t seed = 1;
  double learning_rate = 0.002;
  int length_cap = kDefaultLengthCap;
  int patience = 5;
  double keep = 0.7;
  bool skip_partial = false;
  bool multi_root = false;
  int min_count = Vocabulary::kDefaultMinCount;
  int labeler_epochs = 10;
  double stop_train_uas = 0;
  ModelDims dims;

  // parse / eval / coverage / oracle / simulate
  std::string input = "-", output, gold, pred;
  std::size_t beam = 1;
  bool no_labels = false;
  std::vector<std::string> inputs;
  std::string classes = "both";
  bool tsv = false;
  std::string system = "mh4";
  std::string sequence;
  int n = -1;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "key = value file; flags override it");
  sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

int cmd_train(const Options& o, std::ostream& err) {
  TrainConfig c;
  c.decoder = decoder_or_throw(o.decoder.empty() ? "mh4-hybrid" : o.decoder);
  c.epochs = o.epochs;
  c.seed = o.seed;
  c.learning_rate = o.learning_rate;
  c.length_cap = o.length_cap;
  c.patience = o.patience;
  c.keep = o.keep;
  c.skip_partial = o.skip_partial;
  c.single_root = !o.multi_root;
  c.min_count = o.min_count;
  c.labeler_epochs = o.labeler_epochs;
  c.stop_train_uas = o.stop_train_uas;
  c.dims = o.dims;
  c.jobs = o.jobs;
  const auto train_set = read_input(o.train_path, true);
  std::vector<Sentence> dev;
  if (!o.dev_path.empty()) dev = read_input(o.dev_path, true);
  std::ofstream log_file;
  if (!o.log_path.empty()) {
    log_file.open(o.log_path);
    if (!log_file) throw std::runtime_error("cannot write " + o.log_path);
    c.log = &log_file;
  } else {
    c.log = &err;
  }
  TrainResult r = train(train_set, dev.empty() ? nullptr : &dev, c);
  save_model(r.model, o.model_path);
  err << "trained " << r.history.size() << " epochs"
      << (r.stopped_early ? " (stopped early)" : "") << ", model written to " << o.model_path
      << "\n";
  return kExitOk;
}

int cmd_parse(const Options& o, std::ostream& out, std::ostream& err) {
  const ParserModel model = load_model(o.model_path);
  ParseOptions opt;
  std::string name = o.decoder;
  if (name.empty()) {
    auto it = model.meta.find("decoder");
    name = it == model.meta.end() ? "mh4-hybrid" : it->second;
  }
  opt.decoder = decoder_or_throw(name);
  opt.beam = o.beam;
  opt.length_cap = o.length_cap;
  opt.single_root = !o.multi_root;
  opt.labels = !o.no_labels;
  const auto input = read_input(o.input, false);
  const auto parsed = parse_all(model, input, opt, o.jobs);
  std::vector<ParseOverlay> overlays;
  overlays.reserve(parsed.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].fell_back) {
      err << "warning: sentence " << i + 1 << " has " << input[i].n()
          << " words; over the length cap, decoded greedily\n";
    }
    overlays.push_back(parsed[i].overlay);
  }
  emit(o.output, out, [&](std::ostream& s) { s << write_conllu(input, overlays); });
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto gold = read_input(o.gold, true);
  const auto pred = read_input(o.pred, true);
  if (gold.size() != pred.size()) throw std::runtime_error("gold and predicted sentence counts differ");
  std::vector<ParseOverlay> overlays(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    overlays[i].heads = pred[i].heads();
    overlays[i].labels.assign(1, "");
    for (const auto& t : pred[i].tokens) overlays[i].labels.push_back(t.deprel);
  }
  const AttachmentScores s = evaluate(gold, overlays);
  out << "UAS " << pct(s.uas) << " LAS " << pct(s.las) << "\n";
  return kExitOk;
}

int cmd_coverage(const Options& o, std::ostream& out) {
  unsigned classes = kBothClasses;
  if (o.classes == "proj") {
    classes = kProjClass;
  } else if (o.classes == "mh4") {
    classes = kMH4Class;
  } else if (o.classes != "both") {
    throw UsageError("--classes must be proj, mh4 or both");
  }
  std::vector<CoverageReport> reports;
  for (const auto& path : o.inputs) {
    const std::string name = path == "-" ? "-" : std::filesystem::path(path).stem().string();
    reports.push_back(analyze(read_input(path, true), classes, o.jobs, name));
  }
  emit(o.output, out, [&](std::ostream& s) {
    s << (o.tsv ? report_tsv(reports) : report_table(reports));
  });
  return kExitOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  const System system = system_or_throw(o.system);
  const auto input = read_input(o.input, true);
  auto lines = parallel_map<std::string>(input.size(), o.jobs, [&](std::size_t i) {
    const DepTree tree = DepTree::validate(input[i].heads());
    const OracleResult r = static_oracle(tree, system);
    const std::string id = input[i].sent_id().value_or(std::to_string(i + 1));
    return id + "\t" + (r.partial ? "partial" : "coverable") + "\t" + format_sequence(r.sequence);
  });
  emit(o.output, out, [&](std::ostream& s) {
    for (const auto& l : lines) s << l << "\n";
  });
  return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const System system = system_or_throw(o.system);
  std::string text = o.sequence;
  if (text.empty()) {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  }
  std::vector<Transition> seq;
  try {
    seq = parse_sequence(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  int n = o.n;
  if (n < 0) {
    // A complete computation shifts every word and the end marker.
    n = static_cast<int>(std::count(seq.begin(), seq.end(), Transition::kShift)) - 1;
  }
  if (n < 1) throw UsageError("sentence length must be at least 1");

  Configuration c = Configuration::initial(n);
  out << "step\ttransition\tconfiguration\tlegal\tarc\n";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::string legal;
    for (Transition t : kAllTransitions) {
      if (c.legal(t, system)) legal += (legal.empty() ? "" : " ") + std::string(tag_name(t));
    }
    const Transition t = seq[i];
    if (!c.legal(t, system)) {
      const auto why = admits(system, t) ? c.violation(t).value_or("illegal")
                                         : std::string(system_name(system)) + " has no such transition";
      out << i + 1 << "\t" << tag_name(t) << "\t" << c.to_string() << "\t" << legal << "\t-\n";
      err << "step " << i + 1 << ": " << tag_name(t) << " is illegal: " << why << "\n";
      return kExitData;
    }
    const auto arc = c.arc_of(t);
    out << i + 1 << "\t" << tag_name(t) << "\t" << c.to_string() << "\t" << legal << "\t"
        << (arc ? std::to_string(arc->head) + " -> " + std::to_string(arc->dep) : "-") << "\n";
    c = c.apply(t);
  }
  if (!c.terminal()) {
    err << "sequence ends in a non-terminal configuration " << c.to_string() << "\n";
    return kExitData;
  }
  std::vector<int> heads(static_cast<std::size_t>(n) + 1, -1);
  for (const Arc& a : c.arcs()) heads[static_cast<std::size_t>(a.dep)] = a.head;
  out << "heads " << heads_text(heads) << "\n";
  return kExitOk;
}

int cmd_vocab(const Options& o, std::ostream& out) {
  const ParserModel model = load_model(o.model_path);
  emit(o.output, out, [&](std::ostream& s) { model.vocab.write_tsv(s); });
  return kExitOk;
}

// --config FILE contents become "--key=value" arguments placed right after
// the subcommand, so later command-line flags take precedence.
std::vector<std::string> expand_config(const std::vector<std::string>& args,
                                       const std::vector<std::string>& subcommands) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  const auto it = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
  });
  if (it == args.end()) return args;
  std::map<std::string, std::string> kv;
  try {
    kv = read_config_file(path);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  std::vector<std::string> out(args.begin(), it + 1);
  for (const auto& [k, v] : kv) {
    if (k == "config") continue;
    out.push_back("--" + k + "=" + v);
  }
  out.insert(out.end(), it + 1, args.end());
  return out;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(number) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Non-projective dependency parsing with MH4 chart decoding"};
  app.name("mh4parse");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  const std::string decoders = "one of " + decoder_list();

  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_common(train_cmd, o);
  train_cmd->add_option("--train", o.train_path, "training CoNLL-U")->required();
  train_cmd->add_option("--dev", o.dev_path, "development CoNLL-U; enables patience stopping");
  train_cmd->add_option("--model", o.model_path, "output model file")->required();
  train_cmd->add_option("--decoder", o.decoder, decoders);
  train_cmd->add_option("--epochs", o.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", o.seed);
  train_cmd->add_option("--lr", o.learning_rate);
  train_cmd->add_option("--length-cap", o.length_cap, "longer sentences skip global mh4 updates")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", o.patience, "dev evaluations without improvement; 0 disables");
  train_cmd->add_option("--keep", o.keep, "dropout keep rate")->check(CLI::Range(0.01, 1.0));
  train_cmd->add_flag("--skip-partial", o.skip_partial, "skip trees the chart cannot derive");
  train_cmd->add_flag("--multi-root", o.multi_root, "mst: allow several root dependents");
  train_cmd->add_option("--min-count", o.min_count, "word frequency cutoff")->check(CLI::PositiveNumber);
  train_cmd->add_option("--labeler-epochs", o.labeler_epochs, "0 disables the labeler");
  train_cmd->add_option("--stop-train-uas", o.stop_train_uas, "stop once training UAS reaches this");
  train_cmd->add_option("--window", o.dims.window)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--word-dim", o.dims.word_dim)->check(CLI::PositiveNumber);
  train_cmd->add_option("--suffix-dim", o.dims.suffix_dim)->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden", o.dims.hidden)->check(CLI::PositiveNumber);
  train_cmd->add_option("--context", o.dims.context)->check(CLI::PositiveNumber);
  train_cmd->add_option("--biaffine", o.dims.biaffine)->check(CLI::PositiveNumber);
  train_cmd->add_option("--log", o.log_path, "per-epoch log file (default: standard error)");

  auto* parse_cmd = app.add_subcommand("parse", "parse CoNLL-U; input heads are ignored");
  add_common(parse_cmd, o);
  parse_cmd->add_option("--model", o.model_path)->required();
  parse_cmd->add_option("--input", o.input, "CoNLL-U, - for standard input");
  parse_cmd->add_option("--output", o.output);
  parse_cmd->add_option("--decoder", o.decoder, decoders + " (default: the training decoder)");
  parse_cmd->add_option("--beam", o.beam, "greedy decoders only")->check(CLI::PositiveNumber);
  parse_cmd->add_option("--length-cap", o.length_cap, "longer sentences fall back to greedy")
      ->check(CLI::PositiveNumber);
  parse_cmd->add_flag("--multi-root", o.multi_root);
  parse_cmd->add_flag("--no-labels", o.no_labels);

  auto* eval_cmd = app.add_subcommand("eval", "attachment scores of a parse");
  add_common(eval_cmd, o);
  eval_cmd->add_option("--gold", o.gold)->required();
  eval_cmd->add_option("--pred", o.pred)->required();

  auto* cov_cmd = app.add_subcommand("coverage", "projective and mh4 coverage of treebanks");
  add_common(cov_cmd, o);
  cov_cmd->add_option("treebanks", o.inputs, "CoNLL-U files; rows are named by file stem")->required();
  cov_cmd->add_option("--classes", o.classes, "proj, mh4 or both");
  cov_cmd->add_flag("--tsv", o.tsv);
  cov_cmd->add_option("--output", o.output);

  auto* oracle_cmd = app.add_subcommand("oracle", "gold transition sequences");
  add_common(oracle_cmd, o);
  oracle_cmd->add_option("--input", o.input);
  oracle_cmd->add_option("--system", o.system, "mh3 or mh4");
  oracle_cmd->add_option("--output", o.output);

  auto* sim_cmd = app.add_subcommand("simulate", "replay a transition sequence step by step");
  add_common(sim_cmd, o);
  sim_cmd->add_option("--sequence", o.sequence, "whitespace-separated tags (default: standard input)");
  sim_cmd->add_option("--n", o.n, "sentence length (default: shifts - 1)");
  sim_cmd->add_option("--system", o.system, "mh3 or mh4");

  auto* vocab_cmd = app.add_subcommand("vocab", "dump a model's symbol tables");
  add_common(vocab_cmd, o);
  vocab_cmd->add_option("--model", o.model_path)->required();
  vocab_cmd->add_option("--output", o.output);

  std::vector<std::string> args;
  try {
    args = expand_config(raw_args, {"train", "parse", "eval", "coverage", "oracle", "simulate", "vocab"});
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    if (*parse_cmd || *train_cmd) {
      if (!o.decoder.empty()) decoder_or_throw(o.decoder);
    }
    if (*train_cmd) return cmd_train(o, err);
    if (*parse_cmd) return cmd_parse(o, out, err);
    if (*eval_cmd) return cmd_eval(o, out);
    if (*cov_cmd) return cmd_coverage(o, out);
    if (*oracle_cmd) return cmd_oracle(o, out);
    if (*sim_cmd) return cmd_simulate(o, out, err);
    if (*vocab_cmd) return cmd_vocab(o, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace mh4
