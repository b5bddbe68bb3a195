#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "crisislens/diffcore/params.hpp"
#include "crisislens/embedkb/embedding.hpp"
#include "crisislens/embedkb/lexicon.hpp"
#include "crisislens/embedkb/vocabulary.hpp"
#include "crisislens/hgc/hgc.hpp"
#include "crisislens/mscn/mscn.hpp"
#include "json.hpp"

namespace crisislens::multitask {

inline constexpr const char* kCrisisWeightParam = "crisis.w";
inline constexpr const char* kCrisisBiasParam = "crisis.b";

struct ModelConfig {
  embedkb::EmbeddingConfig embedding;
  mscn::MscnConfig mscn;
  hgc::HgcConfig hgc;
  // Node features average messages from this many days before the reference time.
  double node_window_days = 60.0;
  // Tokens rarer than this in the training split map to UNK.
  std::size_t min_count = 1;
};

void validate(const ModelConfig& cfg);
nlohmann::ordered_json to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig base = {});

// d_s + d_model
std::size_t node_feature_dim(const ModelConfig& cfg);

struct TrainedModel {
  ModelConfig config;
  embedkb::Vocabulary vocab;
  embedkb::KnowledgeLexicon lexicon;
  diff::ParamStore params;
  std::vector<double> gates;
  std::optional<double> bprm_incumbent;

  bool operator==(const TrainedModel& o) const;
};

/// Fresh parameters for every module. The crisis head reads
/// [d_s·s_adaptive ; mean fused embedding]. Gates start at 1.
TrainedModel init_model(const ModelConfig& cfg, embedkb::Vocabulary vocab, embedkb::KnowledgeLexicon lexicon,
                        std::uint64_t seed);

}  // namespace crisislens::multitask
