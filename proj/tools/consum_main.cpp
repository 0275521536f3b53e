// consum: counseling-summarization pipeline CLI.
//
// Subcommands: train-dfc, train-ccc, summarize, evaluate, ablate, mhic,
// gen-fixture, stats. Exit 0 on success, 2 on usage errors, 1 on data or
// model errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "consum/ablation.hpp"
#include "consum/io_util.hpp"
#include "consum/metrics.hpp"
#include "consum/model_io.hpp"
#include "consum/run_config.hpp"

namespace {

using namespace consum;

struct CommonFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> corpus;
  std::optional<std::string> lexicon;
  std::optional<std::string> report;
  std::optional<double> phi;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> encoder_name;
  std::optional<std::string> encoder_dim;
  std::optional<std::string> decoder_name;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON run-config file; flags override its values");
  cmd->add_option("--corpus", flags.corpus, "corpus JSONL file");
  cmd->add_option("--phq-lexicon", flags.lexicon,
                  "PHQ lexicon JSON (defaults to the built-in PHQ-9)");
  cmd->add_option("--report", flags.report, "write the report to this path");
  cmd->add_option("--phi", flags.phi, "knowledge threshold in [0, 9]");
  cmd->add_option("--seed", flags.seed, "run seed");
  cmd->add_option("--encoder", flags.encoder_name, "encoder backend name");
  cmd->add_option("--encoder-dim", flags.encoder_dim,
                  "encoder dimension option");
  cmd->add_option("--decoder", flags.decoder_name, "decoder backend name");
}

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig config;
  if (flags.config_path) config = load_run_config(*flags.config_path);
  if (flags.corpus) config.corpus_path = *flags.corpus;
  if (flags.lexicon) config.lexicon_path = *flags.lexicon;
  if (flags.report) config.report_path = *flags.report;
  if (flags.phi) config.phi = *flags.phi;
  if (flags.seed) {
    config.seed = *flags.seed;
    config.dfc.seed = *flags.seed;
    config.ccc.seed = *flags.seed;
  }
  if (flags.encoder_name) config.encoder.name = *flags.encoder_name;
  if (flags.encoder_dim) config.encoder.options["dimension"] = *flags.encoder_dim;
  if (flags.decoder_name) config.decoder.name = *flags.decoder_name;
  validate_run_config(config);
  return config;
}

Corpus require_corpus(const RunConfig& config) {
  if (!config.corpus_path) throw ConfigError("--corpus is required");
  return parse_corpus_file(*config.corpus_path);
}

PhqLexicon load_lexicon(const RunConfig& config) {
  return config.lexicon_path ? PhqLexicon::from_file(*config.lexicon_path)
                             : PhqLexicon::default_phq9();
}

void emit_report(const RunConfig& config, const std::string& format,
                 const MetricReport& report, bool mhic_only = false) {
  const std::string rendered =
      format == "json" ? report_to_json(report, true, mhic_only)
                       : render_report_table(report, mhic_only);
  if (config.report_path) {
    io::atomic_write_file(*config.report_path, rendered);
  } else {
    std::cout << rendered;
  }
}

std::map<ComponentLabel, double> parse_label_distribution(
    const std::string& text) {
  std::map<ComponentLabel, double> dist;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      throw ConfigError("--label-dist entries look like SH:0.2");
    }
    dist[label_from_code(part.substr(0, colon))] =
        std::stod(part.substr(colon + 1));
  }
  return dist;
}

// Predicted labels for MHIC: from summary traces unless --gold-labels.
std::map<std::string, std::vector<ComponentLabel>> labels_for_mhic(
    const Corpus& corpus, const std::vector<SummaryRecord>& records,
    bool gold_labels) {
  std::map<std::string, std::vector<ComponentLabel>> labels;
  if (gold_labels) {
    for (const Dialogue& dialogue : corpus.dialogues) {
      std::vector<ComponentLabel> dialogue_labels;
      bool complete = true;
      for (const Utterance& utt : dialogue.utterances) {
        if (!utt.gold_label) {
          complete = false;
          break;
        }
        dialogue_labels.push_back(*utt.gold_label);
      }
      if (complete) labels[dialogue.dialogue_id] = std::move(dialogue_labels);
    }
    return labels;
  }
  for (const SummaryRecord& record : records) {
    if (record.predicted_labels) {
      labels[record.dialogue_id] = *record.predicted_labels;
    }
  }
  return labels;
}

int cmd_gen_fixture(const CommonFlags& flags, const std::string& out_path,
                    int dialogues, int utterances,
                    const std::optional<std::string>& label_dist,
                    std::uint64_t vocab_seed) {
  SyntheticSpec spec;
  spec.num_dialogues = dialogues;
  spec.utterances_per_dialogue = utterances;
  spec.vocabulary_seed = vocab_seed;
  if (label_dist) spec.label_distribution = parse_label_distribution(*label_dist);
  const RunConfig config = resolve_config(flags);
  const Corpus corpus = generate_synthetic_corpus(spec, config.seed);
  write_corpus_file(corpus, out_path);
  std::cout << "wrote " << corpus.size() << " dialogues ("
            << corpus.total_utterances() << " utterances) to " << out_path
            << "\n";
  return 0;
}

int cmd_stats(const CommonFlags& flags, const std::string& format) {
  const RunConfig config = resolve_config(flags);
  const CorpusStats stats = corpus_stats(require_corpus(config));
  const std::string rendered =
      format == "json" ? stats_to_json(stats) : render_stats_table(stats);
  if (config.report_path) {
    io::atomic_write_file(*config.report_path, rendered);
  } else {
    std::cout << rendered;
  }
  return 0;
}

int cmd_train_dfc(const CommonFlags& flags, const std::string& out_path,
                  const std::optional<int>& epochs,
                  const std::optional<double>& lr,
                  const std::optional<int>& batch_size,
                  const std::optional<double>& dropout) {
  RunConfig config = resolve_config(flags);
  if (epochs) config.dfc.epochs = *epochs;
  if (lr) config.dfc.learning_rate = *lr;
  if (batch_size) config.dfc.batch_size = *batch_size;
  if (dropout) config.dfc.dropout = *dropout;
  const Corpus corpus = require_corpus(config);
  const auto backend = make_encoder(config.encoder.name, config.encoder.options);
  const DfcModel model = train_dfc(corpus, *backend, config.dfc);
  save_dfc(model, out_path);
  std::cout << "trained DFC for " << model.training_log().epochs_run
            << " epochs (final loss " << model.training_log().final_loss
            << "); saved to " << out_path << "\n";
  return 0;
}

int cmd_train_ccc(const CommonFlags& flags, const std::string& out_path,
                  const std::optional<int>& epochs,
                  const std::optional<double>& lr,
                  const std::optional<int>& batch_size,
                  const std::optional<int>& num_heads) {
  RunConfig config = resolve_config(flags);
  if (epochs) config.ccc.epochs = *epochs;
  if (lr) config.ccc.learning_rate = *lr;
  if (batch_size) config.ccc.batch_size = *batch_size;
  if (num_heads) config.ccc.arch.num_heads = *num_heads;
  const Corpus corpus = require_corpus(config);
  const auto backend = make_encoder(config.encoder.name, config.encoder.options);
  const CccModel model = train_ccc(corpus, *backend, config.ccc);
  save_ccc(model, out_path);
  std::cout << "trained CCC for " << model.training_log().epochs_run
            << " epochs (final loss " << model.training_log().final_loss
            << "); saved to " << out_path << "\n";
  return 0;
}

struct LoadedPipeline {
  std::unique_ptr<EncoderBackend> encoder_backend;
  std::unique_ptr<DecoderBackend> decoder_backend;
  std::unique_ptr<DialogueEncoder> encoder;
  std::unique_ptr<DfcModel> dfc;
  std::unique_ptr<CccModel> ccc;
  PhqLexicon phq = PhqLexicon::default_phq9();
};

LoadedPipeline load_pipeline(const RunConfig& config) {
  if (!config.dfc_model_path || !config.ccc_model_path) {
    throw ConfigError("--dfc and --ccc model artifacts are required");
  }
  LoadedPipeline p;
  p.encoder_backend = make_encoder(config.encoder.name, config.encoder.options);
  p.decoder_backend = make_decoder(config.decoder.name, config.decoder.options);
  p.encoder = std::make_unique<DialogueEncoder>(*p.encoder_backend, true,
                                                cache_dir_from_env());
  p.dfc = std::make_unique<DfcModel>(load_dfc(*config.dfc_model_path));
  p.ccc = std::make_unique<CccModel>(load_ccc(*config.ccc_model_path));
  p.phq = load_lexicon(config);
  return p;
}

RunContext make_context(const RunConfig& config, LoadedPipeline& p) {
  return RunContext{*p.dfc,     *p.ccc,           p.phq,
                    config.phi, *p.encoder,       *p.decoder_backend,
                    config.generation};
}

int cmd_summarize(const CommonFlags& flags, const std::string& dfc_path,
                  const std::string& ccc_path, const std::string& out_path,
                  bool emit_trace,
                  const std::optional<std::string>& pseudo_label_out) {
  RunConfig config = resolve_config(flags);
  config.dfc_model_path = dfc_path;
  config.ccc_model_path = ccc_path;
  config.emit_trace = config.emit_trace || emit_trace;
  const Corpus corpus = require_corpus(config);
  LoadedPipeline pipeline = load_pipeline(config);
  RunContext ctx = make_context(config, pipeline);

  SummarizeOutput output;
  if (pseudo_label_out) {
    PseudoLabelResult result = run_pseudo_label(corpus, ctx);
    write_corpus_file(result.corpus, *pseudo_label_out);
    output = std::move(result.output);
  } else {
    output = summarize_corpus(corpus, ctx);
  }
  io::atomic_write_file(out_path,
                        serialize_summaries(output, config.emit_trace));
  std::cout << "summarized " << output.summaries.size() << " dialogues to "
            << out_path << "\n";
  return 0;
}

int cmd_evaluate(const CommonFlags& flags, const std::string& summaries_path,
                 const std::string& format, bool gold_labels) {
  RunConfig config = resolve_config(flags);
  config.gold_labels = config.gold_labels || gold_labels;
  const Corpus corpus = require_corpus(config);
  std::ifstream in(summaries_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open summaries file " + summaries_path);
  const auto records = parse_summaries(in);
  std::map<std::string, std::string> summaries;
  for (const SummaryRecord& record : records) {
    summaries[record.dialogue_id] = record.summary;
  }
  const auto labels = labels_for_mhic(corpus, records, config.gold_labels);
  const MetricReport report = evaluate_corpus(corpus, summaries, labels);
  emit_report(config, format, report);
  return 0;
}

int cmd_ablate(const CommonFlags& flags, const std::string& dfc_path,
               const std::string& ccc_path, const std::string& ablate_spec,
               bool on_gold, const std::string& format) {
  RunConfig config = resolve_config(flags);
  config.dfc_model_path = dfc_path;
  config.ccc_model_path = ccc_path;
  AblationSpec spec = parse_ablation_spec(ablate_spec);
  spec.mask_on_gold = on_gold;
  const Corpus corpus = require_corpus(config);
  LoadedPipeline pipeline = load_pipeline(config);
  RunContext ctx = make_context(config, pipeline);
  const MetricReport report = run_ablation(corpus, ctx, spec);
  emit_report(config, format, report);
  return 0;
}

int cmd_mhic(const CommonFlags& flags, const std::string& summaries_path,
             const std::string& format, bool gold_labels) {
  RunConfig config = resolve_config(flags);
  config.gold_labels = config.gold_labels || gold_labels;
  const Corpus corpus = require_corpus(config);
  std::ifstream in(summaries_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open summaries file " + summaries_path);
  const auto records = parse_summaries(in);
  const auto labels = labels_for_mhic(corpus, records, config.gold_labels);

  std::map<std::string, std::string> summaries;
  for (const SummaryRecord& record : records) {
    summaries[record.dialogue_id] = record.summary;
  }

  // MHIC needs no reference summaries, only the component transcripts.
  MetricReport report;
  std::vector<RougeScore> sh, pd, rt;
  for (const Dialogue& dialogue : corpus.dialogues) {
    auto summary_it = summaries.find(dialogue.dialogue_id);
    auto labels_it = labels.find(dialogue.dialogue_id);
    if (summary_it == summaries.end() || labels_it == labels.end()) {
      ++report.skipped_dialogues;
      continue;
    }
    DialogueScores scores;
    scores.dialogue_id = dialogue.dialogue_id;
    scores.mhic_sh = mhic(summary_it->second, dialogue, labels_it->second,
                          ComponentLabel::SH);
    scores.mhic_pd = mhic(summary_it->second, dialogue, labels_it->second,
                          ComponentLabel::PD);
    scores.mhic_rt = mhic(summary_it->second, dialogue, labels_it->second,
                          ComponentLabel::RT);
    if (scores.mhic_sh) sh.push_back(*scores.mhic_sh);
    if (scores.mhic_pd) pd.push_back(*scores.mhic_pd);
    if (scores.mhic_rt) rt.push_back(*scores.mhic_rt);
    report.per_dialogue.push_back(std::move(scores));
    ++report.scored_dialogues;
  }
  auto mean = [](const std::vector<RougeScore>& scores)
      -> std::optional<RougeScore> {
    if (scores.empty()) return std::nullopt;
    RougeScore m;
    for (const RougeScore& s : scores) {
      m.precision += s.precision;
      m.recall += s.recall;
      m.f1 += s.f1;
    }
    m.precision /= static_cast<double>(scores.size());
    m.recall /= static_cast<double>(scores.size());
    m.f1 /= static_cast<double>(scores.size());
    return m;
  };
  report.mean_mhic_sh = mean(sh);
  report.mean_mhic_pd = mean(pd);
  report.mean_mhic_rt = mean(rt);
  emit_report(config, format, report, /*mhic_only=*/true);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ConSum: counseling summarization via PHQ-9 knowledge "
               "filtering, filler classification, and component tagging"};
  app.require_subcommand(1);

  CommonFlags flags;

  auto* gen = app.add_subcommand("gen-fixture",
                                 "generate a deterministic synthetic corpus");
  std::string gen_out;
  int gen_dialogues = 20;
  int gen_utterances = 12;
  std::optional<std::string> gen_dist;
  std::uint64_t gen_vocab_seed = 0;
  add_common_flags(gen, flags);
  gen->add_option("--out", gen_out, "output corpus JSONL")->required();
  gen->add_option("--dialogues", gen_dialogues, "number of dialogues");
  gen->add_option("--utterances", gen_utterances, "utterances per dialogue");
  gen->add_option("--label-dist", gen_dist,
                  "label distribution, e.g. SH:0.2,PD:0.48,RT:0.11,DF:0.21");
  gen->add_option("--vocab-seed", gen_vocab_seed, "vocabulary seed");

  auto* stats = app.add_subcommand("stats", "corpus statistics");
  std::string stats_format = "table";
  add_common_flags(stats, flags);
  stats->add_option("--format", stats_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  auto* train_dfc_cmd =
      app.add_subcommand("train-dfc", "train the discussion-filler classifier");
  std::string dfc_out;
  std::optional<int> dfc_epochs, dfc_batch;
  std::optional<double> dfc_lr, dfc_dropout;
  add_common_flags(train_dfc_cmd, flags);
  train_dfc_cmd->add_option("--out", dfc_out, "model artifact path")->required();
  train_dfc_cmd->add_option("--epochs", dfc_epochs, "training epochs");
  train_dfc_cmd->add_option("--lr", dfc_lr, "learning rate");
  train_dfc_cmd->add_option("--batch-size", dfc_batch, "utterances per batch");
  train_dfc_cmd->add_option("--dropout", dfc_dropout, "hidden dropout rate");

  auto* train_ccc_cmd = app.add_subcommand(
      "train-ccc", "train the counseling-component classifier");
  std::string ccc_out;
  std::optional<int> ccc_epochs, ccc_batch, ccc_heads;
  std::optional<double> ccc_lr;
  add_common_flags(train_ccc_cmd, flags);
  train_ccc_cmd->add_option("--out", ccc_out, "model artifact path")->required();
  train_ccc_cmd->add_option("--epochs", ccc_epochs, "training epochs");
  train_ccc_cmd->add_option("--lr", ccc_lr, "learning rate");
  train_ccc_cmd->add_option("--batch-size", ccc_batch, "dialogues per batch");
  train_ccc_cmd->add_option("--num-heads", ccc_heads, "attention heads");

  auto* summarize_cmd =
      app.add_subcommand("summarize", "run the full pipeline over a corpus");
  std::string sum_dfc, sum_ccc, sum_out;
  bool sum_trace = false;
  std::optional<std::string> sum_pseudo;
  add_common_flags(summarize_cmd, flags);
  summarize_cmd->add_option("--dfc", sum_dfc, "DFC artifact")->required();
  summarize_cmd->add_option("--ccc", sum_ccc, "CCC artifact")->required();
  summarize_cmd->add_option("--out", sum_out, "summaries JSONL")->required();
  summarize_cmd->add_flag("--emit-trace", sum_trace,
                          "include per-utterance masks and labels");
  summarize_cmd->add_option(
      "--write-pseudo-labels", sum_pseudo,
      "also write a corpus copy with predicted labels to this path");

  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "score summaries against references");
  std::string eval_summaries;
  std::string eval_format = "table";
  bool eval_gold = false;
  add_common_flags(evaluate_cmd, flags);
  evaluate_cmd->add_option("--summaries", eval_summaries, "summaries JSONL")
      ->required();
  evaluate_cmd->add_option("--format", eval_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));
  evaluate_cmd->add_flag("--gold-labels", eval_gold,
                         "compose MHIC transcripts from gold labels");

  auto* ablate_cmd =
      app.add_subcommand("ablate", "pipeline run with components removed");
  std::string abl_dfc, abl_ccc, abl_spec;
  std::string abl_format = "table";
  bool abl_gold = false;
  add_common_flags(ablate_cmd, flags);
  ablate_cmd->add_option("--dfc", abl_dfc, "DFC artifact")->required();
  ablate_cmd->add_option("--ccc", abl_ccc, "CCC artifact")->required();
  ablate_cmd->add_option("--ablate", abl_spec,
                         "components/modules to remove, e.g. SH,PD or MH-Know")
      ->required();
  ablate_cmd->add_flag("--ablate-on-gold", abl_gold,
                       "mask by gold labels instead of predictions");
  ablate_cmd->add_option("--format", abl_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));

  auto* mhic_cmd = app.add_subcommand(
      "mhic", "mental-health information capture of existing summaries");
  std::string mhic_summaries;
  std::string mhic_format = "table";
  bool mhic_gold = false;
  add_common_flags(mhic_cmd, flags);
  mhic_cmd->add_option("--summaries", mhic_summaries, "summaries JSONL")
      ->required();
  mhic_cmd->add_option("--format", mhic_format, "json or table")
      ->check(CLI::IsMember({"json", "table"}));
  mhic_cmd->add_flag("--gold-labels", mhic_gold,
                     "compose component transcripts from gold labels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_fixture(flags, gen_out, gen_dialogues, gen_utterances,
                             gen_dist, gen_vocab_seed);
    }
    if (stats->parsed()) return cmd_stats(flags, stats_format);
    if (train_dfc_cmd->parsed()) {
      return cmd_train_dfc(flags, dfc_out, dfc_epochs, dfc_lr, dfc_batch,
                           dfc_dropout);
    }
    if (train_ccc_cmd->parsed()) {
      return cmd_train_ccc(flags, ccc_out, ccc_epochs, ccc_lr, ccc_batch,
                           ccc_heads);
    }
    if (summarize_cmd->parsed()) {
      return cmd_summarize(flags, sum_dfc, sum_ccc, sum_out, sum_trace,
                           sum_pseudo);
    }
    if (evaluate_cmd->parsed()) {
      return cmd_evaluate(flags, eval_summaries, eval_format, eval_gold);
    }
    if (ablate_cmd->parsed()) {
      return cmd_ablate(flags, abl_dfc, abl_ccc, abl_spec, abl_gold,
                        abl_format);
    }
    if (mhic_cmd->parsed()) {
      return cmd_mhic(flags, mhic_summaries, mhic_format, mhic_gold);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const ModelIoError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
