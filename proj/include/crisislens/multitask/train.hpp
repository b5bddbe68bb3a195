#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/embedkb/lexicon.hpp"
#include "crisislens/hgc/social_graph.hpp"
#include "crisislens/multitask/loss.hpp"
#include "crisislens/multitask/model.hpp"
#include "json.hpp"

namespace crisislens::multitask {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-2;
  std::uint64_t seed = 1;
  double word_dropout = 0.3;
  LossWeights loss;
  RewardWeights reward;
  double bprm_step = 0.1;
  std::size_t bprm_cadence = 2;
  ModelConfig model;
};

void validate(const TrainConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;     // means over the epoch's minibatches
  double soft_reward = 0.0;
  double val_reward = 0.0;  // hard reward on validation users at the epoch's final gates
  bool bprm_ran = false;
  std::optional<double> bprm_incumbent;
  bool accepted = false;
  std::vector<double> gates;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainResult {
  TrainedModel model;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Minibatch Adam on the weighted multi-task loss; every `bprm_cadence`
/// epochs one gate search step on the validation reward.
TrainResult train(const TrainConfig& cfg, std::span<const corpus::Sample> train_set,
                  std::span<const corpus::Sample> val_set, const embedkb::KnowledgeLexicon& lexicon,
                  const hgc::SocialGraph& graph, const EpochCallback& on_epoch = {});

/// Hard reward of the behavior head on the users that appear in `eval_set`,
/// with node features taken from `context` (which should include eval_set).
double behavior_reward(const TrainedModel& m, const hgc::SocialGraph& graph,
                       std::span<const corpus::Sample> context, std::span<const corpus::Sample> eval_set,
                       const RewardWeights& w, std::span<const double> gates);

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);
std::vector<EpochRecord> read_history_csv(const std::filesystem::path& path);

}  // namespace crisislens::multitask
