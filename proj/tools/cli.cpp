#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sap/attention.hpp"
#include "sap/cfilter.hpp"
#include "sap/conllu.hpp"
#include "sap/depstats.hpp"
#include "sap/mask.hpp"
#include "sap/pruner.hpp"
#include "sap/ranker.hpp"
#include "sap/subprocess_oracle.hpp"
#include "sap/toy_corpus.hpp"
#include "sap/toymodel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sap::cli {

namespace {

constexpr int kDefaultK = 5;
constexpr double kDefaultRatio = 0.5;

struct RunConfig {
  std::string corpus;
  std::string attention;
  std::string table;
  int k = kDefaultK;
  std::optional<double> ratio;
  std::optional<double> sparsity;
  std::string direction = "max";
  double collapse = 1.0;
  double tolerance = 0.9;
  std::string oracle_cmd;
  std::string out;
  std::uint64_t seed = 42;
  unsigned threads = 1;
  bool dump_arcs = false;
  int k_min = 1;
  int k_max = 10;
  // toy commands
  int sentences = 100;
  int layers = 2;
  int heads = 4;
  int task_size = 200;
  std::string toy_config;
  std::string mask;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot create " + path.string());
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

fs::path prepare_out(const std::string& out) {
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorCode::kIo, "cannot create output directory " + out);
  return dir;
}

json head_list(const std::vector<HeadId>& heads) {
  json arr = json::array();
  for (const HeadId& h : heads) arr.push_back({h.layer, h.head});
  return arr;
}

std::vector<ParsedSentence> load_corpus(const RunConfig& cfg) {
  try {
    return read_conllu_file(cfg.corpus);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), cfg.corpus + ": " + e.what());
  }
}

PairedCorpus load_paired(const RunConfig& cfg, std::ostream& out) {
  auto sentences = load_corpus(cfg);
  auto records = read_attention_path(cfg.attention);
  PairedCorpus paired = pair_corpus(std::move(sentences), std::move(records));
  if (!paired.unpaired_sentences.empty()) {
    out << "note: " << paired.unpaired_sentences.size()
        << " sentence(s) without attention records were excluded from scoring\n";
  }
  if (paired.entries.empty()) throw Error(ErrorCode::kDegenerateCorpus, "no sentence has an attention record");
  return paired;
}

PruneConfig prune_config(const RunConfig& cfg) {
  PruneConfig pc;
  pc.ratio = cfg.ratio;
  pc.target_sparsity = cfg.sparsity;
  if (!pc.ratio && !pc.target_sparsity) pc.ratio = kDefaultRatio;
  pc.layer_collapse_fraction = cfg.collapse;
  pc.validate();
  return pc;
}

/// Score table from --table, or from corpus + attention with the ranking
/// computed on the full parsed corpus.
HeadScoreTable obtain_table(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.table.empty()) return HeadScoreTable::from_json(read_text(cfg.table));
  if (cfg.corpus.empty() || cfg.attention.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "either --table or both --corpus and --attention are required");
  }
  const auto full = load_corpus(cfg);
  const DepRanking ranking = compute_ranking(full, cfg.k);
  const PairedCorpus paired = load_paired(cfg, out);
  const double theta = compute_threshold(paired.entries);
  return score_heads(paired.entries, ranking, theta, parse_direction(cfg.direction), cfg.threads);
}

json prune_summary(const PruneResult& r, const PruneConfig& pc) {
  json j;
  j["mode"] = pc.ratio ? "ratio" : "sparsity";
  if (pc.target_sparsity) j["target_sparsity"] = *pc.target_sparsity;
  j["ratio"] = r.ratio;
  j["cutoff"] = r.cutoff;
  j["layer_collapse_fraction"] = pc.layer_collapse_fraction;
  j["selected_heads"] = head_list(r.order);
  j["pruned_head_count"] = r.mask.size();
  j["pruned_layers"] = r.mask.pruned_layers();
  j["sparsity"] = r.mask.sparsity();
  return j;
}

// Shortest round-trip decimal.
std::string num(double v) { return json(v).dump(); }

std::size_t distinct_counts(const HeadScoreTable& t) {
  return std::set<std::uint64_t>(t.counts.begin(), t.counts.end()).size();
}

int cmd_stats(const RunConfig& cfg, std::ostream& out) {
  const auto corpus = load_corpus(cfg);
  const DepRanking ranking = compute_ranking(corpus, cfg.k);
  const fs::path dir = prepare_out(cfg.out);
  write_text(dir / "ranking.json", ranking.to_json());
  out << "sentences: " << corpus.size() << "\n"
      << "dependency types: " << ranking.type_count() << "\n"
      << "S: " << total_weighted_occurrences(corpus, ranking) << "\n";
  for (std::size_t i = 0; i < ranking.ordered().size() && i < static_cast<std::size_t>(cfg.k); ++i) {
    out << "  " << (i + 1) << ". " << ranking.ordered()[i].label << " " << ranking.ordered()[i].count << "\n";
  }
  return kOk;
}

int cmd_rank(const RunConfig& cfg, std::ostream& out) {
  const auto full = load_corpus(cfg);
  const DepRanking ranking = compute_ranking(full, cfg.k);
  const PairedCorpus paired = load_paired(cfg, out);
  const Direction direction = parse_direction(cfg.direction);
  const double theta = compute_threshold(paired.entries);
  const HeadScoreTable table = score_heads(paired.entries, ranking, theta, direction, cfg.threads);
  const fs::path dir = prepare_out(cfg.out);
  write_text(dir / "ranking.json", ranking.to_json());
  write_text(dir / "scores.json", table.to_json());
  if (cfg.dump_arcs) {
    std::ostringstream dump;
    write_arc_attention_dump(paired.entries, ranking, direction, dump);
    write_text(dir / "arc_attention.jsonl", dump.str());
  }
  out << "threshold: " << num(theta) << "\nS: " << table.total_weight << "\n";
  return kOk;
}

int cmd_prune(const RunConfig& cfg, std::ostream& out) {
  const PruneConfig pc = prune_config(cfg);
  const HeadScoreTable table = obtain_table(cfg, out);
  const PruneResult result = select_heads(table, pc);
  const fs::path dir = prepare_out(cfg.out);
  write_mask_file(result.mask, dir / "mask.json");
  write_text(dir / "prune_report.json", prune_summary(result, pc).dump(2) + "\n");
  out << "S*R: " << num(result.cutoff) << "\nR: " << num(result.ratio)
      << "\npruned heads: " << result.mask.size() << "\nsparsity: " << num(result.mask.sparsity()) << "\n";
  return kOk;
}

int cmd_filter(const RunConfig& cfg, std::ostream& out) {
  const PruneConfig pc = prune_config(cfg);
  if (cfg.oracle_cmd.empty()) throw Error(ErrorCode::kInvalidArgument, "--oracle-cmd is required");
  const HeadScoreTable table = obtain_table(cfg, out);
  // Candidates are the SAP selection before layer collapse.
  const PruneResult candidates = pc.ratio ? prune_by_ratio(table, *pc.ratio) : prune_to_sparsity(table, *pc.target_sparsity);
  const fs::path dir = prepare_out(cfg.out);
  if (candidates.order.empty()) {
    PruneMask empty(table.layers, table.heads_per_layer);
    write_mask_file(empty, dir / "mask.json");
    out << "no prune candidates\n";
    return kOk;
  }
  SubprocessOracle oracle(cfg.oracle_cmd);
  try {
    const CFResult result = filter_prune(candidates.order, oracle, cfg.tolerance, table.layers,
                                         table.heads_per_layer, pc.layer_collapse_fraction);
    write_mask_file(result.mask, dir / "mask.json");
    write_text(dir / "cf_report.json", result.report.to_json());
    out << "dense metric: " << num(result.report.dense_metric)
        << "\ncandidates: " << candidates.order.size() << "\npruned heads: " << result.mask.size()
        << "\nstop: " << to_string(*result.report.stop) << "\noracle calls: " << result.report.oracle_calls
        << "\n";
  } catch (const FilterError& e) {
    write_text(dir / "cf_report.json", e.partial_report().to_json());
    throw;
  }
  return kOk;
}

int cmd_sweep_k(const RunConfig& cfg, std::ostream& out) {
  const PruneConfig pc = prune_config(cfg);
  if (cfg.k_min < 1 || cfg.k_max < cfg.k_min) throw Error(ErrorCode::kInvalidArgument, "invalid k range");
  const auto full = load_corpus(cfg);
  const PairedCorpus paired = load_paired(cfg, out);
  const Direction direction = parse_direction(cfg.direction);
  const double theta = compute_threshold(paired.entries);
  const std::size_t types = count_labels(full).size();

  std::optional<SubprocessOracle> oracle;
  if (!cfg.oracle_cmd.empty()) oracle.emplace(cfg.oracle_cmd);

  const fs::path dir = prepare_out(cfg.out);
  json rows = json::array();
  std::optional<int> best_k;
  double best_metric = 0.0;
  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    json row;
    row["k"] = k;
    if (static_cast<std::size_t>(k) > types) {
      row["skipped"] = "k exceeds the number of dependency types";
      rows.push_back(std::move(row));
      continue;
    }
    const DepRanking ranking = compute_ranking(full, k);
    const HeadScoreTable table = score_heads(paired.entries, ranking, theta, direction, cfg.threads);
    const PruneResult result = select_heads(table, pc);
    const std::string mask_name = "mask_k" + std::to_string(k) + ".json";
    write_mask_file(result.mask, dir / mask_name);
    row["mask"] = mask_name;
    row["total_weight"] = table.total_weight;
    row["distinct_counts"] = distinct_counts(table);
    row["ratio"] = result.ratio;
    row["cutoff"] = result.cutoff;
    row["pruned_head_count"] = result.mask.size();
    row["sparsity"] = result.mask.sparsity();
    if (oracle) {
      const double metric = oracle->evaluate(result.mask);
      row["metric"] = metric;
      // Ties keep the smaller k.
      if (!best_k || metric > best_metric) {
        best_k = k;
        best_metric = metric;
      }
    }
    rows.push_back(std::move(row));
  }
  json report;
  report["threshold"] = theta;
  report["direction"] = to_string(direction);
  report["rows"] = std::move(rows);
  report["best_k"] = best_k ? json(*best_k) : json(nullptr);
  write_text(dir / "sweep.json", report.dump(2) + "\n");
  out << "swept k=" << cfg.k_min << ".." << cfg.k_max;
  if (best_k) out << ", best k=" << *best_k << " (metric " << num(best_metric) << ")";
  out << "\n";
  return kOk;
}

json toy_config_json(const RunConfig& cfg) {
  return json{{"layers", cfg.layers},
              {"heads", cfg.heads},
              {"seed", cfg.seed},
              {"task_size", cfg.task_size},
              {"task_seed", cfg.seed + 1}};
}

int cmd_toy_gen(const RunConfig& cfg, std::ostream& out) {
  if (cfg.sentences < 1) throw Error(ErrorCode::kInvalidArgument, "--sentences must be >= 1");
  const ToyModel model(toy_config(cfg.layers, cfg.heads, cfg.seed));
  const auto sentences = make_toy_treebank(static_cast<std::size_t>(cfg.sentences), cfg.seed);
  const auto records = toy_attention(model, sentences);
  const fs::path dir = prepare_out(cfg.out);
  const fs::path att_dir = dir / "attention";
  fs::create_directories(att_dir);
  write_text(dir / "corpus.conllu", write_conllu(sentences));
  for (const AttentionRecord& r : records) {
    write_attention_file(r, att_dir / (r.sentence_id() + kAttentionExtension));
  }
  write_text(dir / "toy_config.json", toy_config_json(cfg).dump(2) + "\n");
  out << "wrote " << sentences.size() << " sentences to " << dir.string() << "\n";
  return kOk;
}

int cmd_toy_eval(const RunConfig& cfg, std::ostream& out) {
  json j;
  try {
    j = json::parse(read_text(cfg.toy_config));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed toy config: ") + e.what());
  }
  const ToyModel model(toy_config(j.at("layers").get<int>(), j.at("heads").get<int>(),
                                  j.at("seed").get<std::uint64_t>()));
  const ToyTask task = make_toy_task(toy_task_spec(j.at("task_size").get<int>(), j.at("task_seed").get<std::uint64_t>()));
  const PruneMask mask = cfg.mask.empty() ? PruneMask(model.config().layers, model.config().heads)
                                          : read_mask_file(cfg.mask);
  out << num(model.evaluate(task, mask)) << "\n";
  return kOk;
}

void add_selection_options(CLI::App* cmd, RunConfig& cfg) {
  auto* ratio = cmd->add_option("--ratio", cfg.ratio, "Pruning ratio R in (0,1] (default 0.5)");
  auto* sparsity = cmd->add_option("--sparsity", cfg.sparsity, "Target head sparsity in [0,1)");
  ratio->excludes(sparsity);
  sparsity->excludes(ratio);
  cmd->add_option("--collapse", cfg.collapse, "Layer-collapse fraction in (0,1]")->capture_default_str();
}

void add_scoring_options(CLI::App* cmd, RunConfig& cfg, bool required) {
  auto* corpus = cmd->add_option("--corpus", cfg.corpus, "CoNLL-U corpus")->check(CLI::ExistingFile);
  auto* attention =
      cmd->add_option("--attention", cfg.attention, "SAPATTN1 file or directory")->check(CLI::ExistingPath);
  if (required) {
    corpus->required();
    attention->required();
  }
  cmd->add_option("--k", cfg.k, "Number of important (top-k) dependency types")->capture_default_str();
  cmd->add_option("--direction", cfg.direction, "Arc direction: dep2head, head2dep or max")
      ->check(CLI::IsMember({"dep2head", "head2dep", "max"}))
      ->capture_default_str();
  cmd->add_option("--threads", cfg.threads, "Worker threads for head scoring")->capture_default_str();
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return kParseFailure;
    case ErrorCode::kAttentionFormat: return kAttentionFormatFailure;
    case ErrorCode::kMaskFormat: return kMaskFormatFailure;
    case ErrorCode::kInvalidArgument: return kInvalidArgumentFailure;
    case ErrorCode::kDegenerateCorpus: return kDegenerateCorpusFailure;
    case ErrorCode::kShapeMismatch: return kShapeMismatchFailure;
    case ErrorCode::kUnknownLabel: return kUnknownLabelFailure;
    case ErrorCode::kOracleFailure: return kOracleFailure;
    case ErrorCode::kIo: return kIoFailure;
  }
  return kFailure;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Syntactic attention-head pruning toolkit"};
  app.require_subcommand(1);
  app.add_option("--seed", cfg.seed, "Seed for every random choice")->capture_default_str();

  auto* stats = app.add_subcommand("stats", "Rank dependency types by corpus frequency");
  stats->add_option("--corpus", cfg.corpus, "CoNLL-U corpus")->required()->check(CLI::ExistingFile);
  stats->add_option("--k", cfg.k, "Number of important (top-k) dependency types")->capture_default_str();
  stats->add_option("--out", cfg.out, "Output directory")->required();

  auto* rank = app.add_subcommand("rank", "Compute the attention threshold and per-head counters");
  add_scoring_options(rank, cfg, true);
  rank->add_flag("--dump-arcs", cfg.dump_arcs, "Also write per-arc attention values (JSON lines)");
  rank->add_option("--out", cfg.out, "Output directory")->required();

  auto* prune = app.add_subcommand("prune", "Select heads to prune by ratio or target sparsity");
  add_scoring_options(prune, cfg, false);
  prune->add_option("--table", cfg.table, "Precomputed scores.json")->check(CLI::ExistingFile);
  add_selection_options(prune, cfg);
  prune->add_option("--out", cfg.out, "Output directory")->required();

  auto* filter = app.add_subcommand("filter", "Refine prune candidates with an evaluation oracle");
  add_scoring_options(filter, cfg, false);
  filter->add_option("--table", cfg.table, "Precomputed scores.json")->check(CLI::ExistingFile);
  add_selection_options(filter, cfg);
  filter->add_option("--tolerance", cfg.tolerance, "Minimum fraction of the dense metric to keep")
      ->capture_default_str();
  filter->add_option("--oracle-cmd", cfg.oracle_cmd, "Evaluator command; {mask} is replaced by a mask path")
      ->required();
  filter->add_option("--out", cfg.out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep-k", "Prune once per k and compare");
  add_scoring_options(sweep, cfg, true);
  add_selection_options(sweep, cfg);
  sweep->add_option("--k-min", cfg.k_min)->capture_default_str();
  sweep->add_option("--k-max", cfg.k_max)->capture_default_str();
  sweep->add_option("--oracle-cmd", cfg.oracle_cmd, "Optional evaluator used to pick the best k");
  sweep->add_option("--out", cfg.out, "Output directory")->required();

  auto* toy = app.add_subcommand("toy", "Toy encoder fixtures");
  toy->require_subcommand(1);
  auto* gen = toy->add_subcommand("gen", "Write a toy CoNLL-U corpus with matching attention files");
  gen->add_option("--out", cfg.out, "Output directory")->required();
  gen->add_option("--sentences", cfg.sentences)->capture_default_str();
  gen->add_option("--layers", cfg.layers)->capture_default_str();
  gen->add_option("--heads", cfg.heads)->capture_default_str();
  gen->add_option("--task-size", cfg.task_size)->capture_default_str();
  gen->add_option("--seed", cfg.seed, "Seed for every random choice");
  auto* eval = toy->add_subcommand("eval", "Print toy-task accuracy under a mask (usable as --oracle-cmd)");
  eval->add_option("--config", cfg.toy_config, "toy_config.json written by toy gen")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--mask", cfg.mask, "Mask JSON (dense when omitted)")->check(CLI::ExistingFile);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (stats->parsed()) return cmd_stats(cfg, out);
    if (rank->parsed()) return cmd_rank(cfg, out);
    if (prune->parsed()) return cmd_prune(cfg, out);
    if (filter->parsed()) return cmd_filter(cfg, out);
    if (sweep->parsed()) return cmd_sweep_k(cfg, out);
    if (gen->parsed()) return cmd_toy_gen(cfg, out);
    if (eval->parsed()) return cmd_toy_eval(cfg, out);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace sap::cli
