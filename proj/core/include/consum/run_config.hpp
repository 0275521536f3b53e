#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "consum/ablation.hpp"
#include "consum/component_classifier.hpp"
#include "consum/filler_classifier.hpp"
#include "consum/knowledge_filter.hpp"
#include "consum/summarizer.hpp"

namespace consum {

struct BackendSelection {
  std::string name;
  std::map<std::string, std::string> options;
};

// Declarative run configuration. A JSON config file provides defaults and
// CLI flags override individual fields; unknown keys are rejected before
// any stage runs.
struct RunConfig {
  std::optional<std::filesystem::path> corpus_path;
  std::optional<std::filesystem::path> lexicon_path;
  std::optional<std::filesystem::path> dfc_model_path;
  std::optional<std::filesystem::path> ccc_model_path;
  std::optional<std::filesystem::path> output_path;
  std::optional<std::filesystem::path> report_path;

  std::uint64_t seed = 0;
  double phi = kDefaultPhi;
  BackendSelection encoder{"hashed-bow", {}};
  BackendSelection decoder{"extractive", {}};
  DfcConfig dfc;
  CccConfig ccc;
  GenerationConfig generation;
  std::optional<AblationSpec> ablation;
  bool emit_trace = false;
  bool gold_labels = false;
};

RunConfig load_run_config(const std::filesystem::path& path);

void validate_run_config(const RunConfig& config);

}  // namespace consum
