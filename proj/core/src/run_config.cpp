#include "consum/run_config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace consum {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!known.contains(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
  }
}

std::map<std::string, std::string> options_table(const json& object,
                                                 const std::string& where) {
  std::map<std::string, std::string> options;
  if (!object.is_object()) {
    throw ConfigError("config: " + where + " must be an object");
  }
  for (const auto& [key, value] : object.items()) {
    if (value.is_string()) {
      options[key] = value.get<std::string>();
    } else {
      options[key] = value.dump();
    }
  }
  return options;
}

BackendSelection backend_selection(const json& object,
                                   const std::string& where) {
  reject_unknown_keys(object, {"name", "options"}, where);
  BackendSelection selection;
  if (!object.contains("name") || !object.at("name").is_string()) {
    throw ConfigError("config: " + where + " requires a string 'name'");
  }
  selection.name = object.at("name").get<std::string>();
  if (object.contains("options")) {
    selection.options = options_table(object.at("options"), where + ".options");
  }
  return selection;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("config file " + path.string() +
                      " must hold a JSON object");
  }

  reject_unknown_keys(doc,
                      {"corpus", "lexicon", "dfc_model", "ccc_model", "output",
                       "report", "seed", "phi", "encoder", "decoder", "dfc",
                       "ccc", "generation", "ablate", "ablate_on_gold",
                       "emit_trace", "gold_labels"},
                      "top level");

  RunConfig config;
  auto path_field = [&](const char* key,
                        std::optional<std::filesystem::path>& dest) {
    if (!doc.contains(key)) return;
    if (!doc.at(key).is_string()) {
      throw ConfigError(std::string("config: '") + key +
                        "' must be a string path");
    }
    dest = std::filesystem::path(doc.at(key).get<std::string>());
  };
  path_field("corpus", config.corpus_path);
  path_field("lexicon", config.lexicon_path);
  path_field("dfc_model", config.dfc_model_path);
  path_field("ccc_model", config.ccc_model_path);
  path_field("output", config.output_path);
  path_field("report", config.report_path);

  if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("phi")) config.phi = doc.at("phi").get<double>();
  if (doc.contains("encoder")) {
    config.encoder = backend_selection(doc.at("encoder"), "encoder");
  }
  if (doc.contains("decoder")) {
    config.decoder = backend_selection(doc.at("decoder"), "decoder");
  }

  if (doc.contains("dfc")) {
    const json& dfc = doc.at("dfc");
    reject_unknown_keys(
        dfc, {"epochs", "learning_rate", "batch_size", "dropout", "seed"},
        "dfc");
    config.dfc.epochs = dfc.value("epochs", config.dfc.epochs);
    config.dfc.learning_rate =
        dfc.value("learning_rate", config.dfc.learning_rate);
    config.dfc.batch_size = dfc.value("batch_size", config.dfc.batch_size);
    config.dfc.dropout = dfc.value("dropout", config.dfc.dropout);
    config.dfc.seed = dfc.value("seed", config.dfc.seed);
  }
  if (doc.contains("ccc")) {
    const json& ccc = doc.at("ccc");
    reject_unknown_keys(ccc,
                        {"epochs", "learning_rate", "batch_size", "num_heads",
                         "hidden_dim", "attention_dim", "max_sequence_length",
                         "seed"},
                        "ccc");
    config.ccc.epochs = ccc.value("epochs", config.ccc.epochs);
    config.ccc.learning_rate =
        ccc.value("learning_rate", config.ccc.learning_rate);
    config.ccc.batch_size = ccc.value("batch_size", config.ccc.batch_size);
    config.ccc.seed = ccc.value("seed", config.ccc.seed);
    config.ccc.arch.num_heads =
        ccc.value("num_heads", config.ccc.arch.num_heads);
    config.ccc.arch.hidden_dim =
        ccc.value("hidden_dim", config.ccc.arch.hidden_dim);
    config.ccc.arch.attention_dim =
        ccc.value("attention_dim", config.ccc.arch.attention_dim);
    config.ccc.arch.max_sequence_length =
        ccc.value("max_sequence_length", config.ccc.arch.max_sequence_length);
  }
  if (doc.contains("generation")) {
    const json& gen = doc.at("generation");
    reject_unknown_keys(
        gen, {"max_length", "repetition_penalty", "num_beams"}, "generation");
    config.generation.max_length =
        gen.value("max_length", config.generation.max_length);
    config.generation.repetition_penalty =
        gen.value("repetition_penalty", config.generation.repetition_penalty);
    config.generation.num_beams =
        gen.value("num_beams", config.generation.num_beams);
  }
  if (doc.contains("ablate")) {
    config.ablation = parse_ablation_spec(doc.at("ablate").get<std::string>());
  }
  if (doc.contains("ablate_on_gold")) {
    if (!config.ablation) config.ablation = AblationSpec{};
    config.ablation->mask_on_gold = doc.at("ablate_on_gold").get<bool>();
  }
  config.emit_trace = doc.value("emit_trace", false);
  config.gold_labels = doc.value("gold_labels", false);

  validate_run_config(config);
  return config;
}

void validate_run_config(const RunConfig& config) {
  if (config.phi < 0.0 || config.phi > static_cast<double>(kNumPhqItems)) {
    throw ConfigError("config: phi must be in [0, 9]");
  }
  validate_generation_config(config.generation);
  if (config.dfc.dropout < 0.0 || config.dfc.dropout >= 1.0) {
    throw ConfigError("config: dfc.dropout must be in [0, 1)");
  }
  if (config.ccc.arch.num_heads < 1 ||
      config.ccc.arch.attention_dim % config.ccc.arch.num_heads != 0) {
    throw ConfigError("config: ccc.num_heads must divide ccc.attention_dim");
  }
}

}  // namespace consum
