#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "crisislens/corpus/sample.hpp"
#include "crisislens/diffcore/autodiff.hpp"
#include "crisislens/embedkb/lexicon.hpp"
#include "crisislens/embedkb/vocabulary.hpp"
#include "crisislens/eval/metrics.hpp"
#include "json.hpp"

namespace crisislens::eval {

inline constexpr double kLexiconThreshold = -0.05;
// Score given to lexicon terms missing from the polarity table.
inline constexpr double kUnscoredLexiconTerm = -1.0;

/// Dictionary scorer: mean term polarity over all tokens (unknown terms 0).
/// Crisis iff score < threshold; polarity by the sign of the score outside
/// ±0.05; intensity by terciles of |score| on [0,1]. Outputs are one-hot.
class LexiconBaseline : public Predictor {
 public:
  LexiconBaseline(const embedkb::KnowledgeLexicon& lexicon, std::map<std::string, double> polarity,
                  double threshold = kLexiconThreshold);
  std::string name() const override { return "lexicon"; }
  Prediction predict(std::span<const std::string> tokens) const override;
  double score(std::span<const std::string> tokens) const;

 private:
  std::map<std::string, double> polarity_;
  double threshold_;
};

struct BiLstmConfig {
  std::size_t d_model = 32;
  std::size_t d_h = 32;
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 1e-2;
  std::uint64_t seed = 1;
  std::size_t min_count = 1;
  double word_dropout = 0.3;
};

void validate(const BiLstmConfig& cfg);
nlohmann::ordered_json to_json(const BiLstmConfig& cfg);
BiLstmConfig bilstm_config_from_json(const nlohmann::json& j, BiLstmConfig base = {});

struct BiLstmModel {
  BiLstmConfig config;
  embedkb::Vocabulary vocab;
  diff::ParamStore params;
};

BiLstmModel init_bilstm(const BiLstmConfig& cfg, embedkb::Vocabulary vocab);

struct BiLstmVars {
  diff::Var state;  // [1×2·d_h] = [h_forward ; h_backward]
  diff::Var crisis_logits;
  diff::Var polarity_logits;
  diff::Var intensity_logits;
};

BiLstmVars bilstm_forward(diff::Graph& g, const BiLstmModel& m, std::span<const std::string> tokens);
BiLstmVars bilstm_forward(diff::Graph& g, const BiLstmModel& m, std::span<const std::size_t> ids);

// Mean summed cross-entropy of the three heads per epoch.
using BiLstmEpochCallback = std::function<void(std::size_t epoch, double loss)>;

/// Cross-entropy training of the three heads only.
BiLstmModel train_bilstm(const BiLstmConfig& cfg, std::span<const corpus::Sample> train_set,
                         const BiLstmEpochCallback& on_epoch = {});

class BiLstmPredictor : public Predictor {
 public:
  explicit BiLstmPredictor(const BiLstmModel& m) : m_(m) {}
  std::string name() const override { return "bilstm"; }
  Prediction predict(std::span<const std::string> tokens) const override;

 private:
  const BiLstmModel& m_;
};

}  // namespace crisislens::eval
