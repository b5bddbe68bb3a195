#pragma once

#include <cstddef>
#include <vector>

#include "crisislens/diffcore/autodiff.hpp"
#include "crisislens/diffcore/rng.hpp"

namespace crisislens::mscn {

// Class orders for the two emotion heads.
enum class Polarity : std::size_t { Negative = 0, Neutral = 1, Positive = 2 };
enum class Intensity : std::size_t { Mild = 0, Moderate = 1, Strong = 2 };

struct MscnConfig {
  std::vector<std::size_t> widths{2, 3, 4};
  std::size_t channels = 16;
  std::size_t d_h = 32;  // also d_s
};

void validate(const MscnConfig& cfg);
std::size_t max_width(const MscnConfig& cfg);

void init_mscn_params(diff::ParamStore& store, const MscnConfig& cfg, std::size_t d_model, Rng& rng);

/// S(X): each width's convolution is ReLU-activated, the feature maps are
/// concatenated along time and run through one LSTM; the final hidden state
/// [1×d_h] is returned. Sequences shorter than the widest kernel are extended
/// with zero (PAD) rows first.
diff::Var mscn_forward(diff::Graph& g, const diff::ParamStore& store, const MscnConfig& cfg, diff::Var e_total);

/// A(X) = softmax over d_s of s·W_a.
diff::Var adaptive_weights(diff::Var s, diff::Var w_a);
/// s ⊙ a
diff::Var adaptive_sentiment(diff::Var s, diff::Var a);

struct EmotionLogits {
  diff::Var polarity;   // [1×3]
  diff::Var intensity;  // [1×3]
};

// Heads read d_s·s_adaptive, so a uniform A(X) hands them S(X) unchanged.
double head_input_scale(const MscnConfig& cfg);

EmotionLogits emotion_heads(diff::Graph& g, const diff::ParamStore& store, const MscnConfig& cfg, diff::Var s_adaptive);

struct SentimentVars {
  diff::Var s;
  diff::Var a;
  diff::Var s_adaptive;
  diff::Var polarity_logits;
  diff::Var intensity_logits;
};

SentimentVars sentiment(diff::Graph& g, const diff::ParamStore& store, const MscnConfig& cfg, diff::Var e_total);

// Tensor-level conveniences.
struct SentimentOutput {
  diff::Tensor s;
  diff::Tensor a;
  diff::Tensor s_adaptive;
  diff::Tensor polarity_logits;
  diff::Tensor intensity_logits;
};

SentimentOutput sentiment(const diff::ParamStore& store, const MscnConfig& cfg, const diff::Tensor& e_total);
diff::Tensor mscn_forward(const diff::ParamStore& store, const MscnConfig& cfg, const diff::Tensor& e_total);
diff::Tensor adaptive_weights(const diff::Tensor& s, const diff::Tensor& w_a);
diff::Tensor adaptive_sentiment(const diff::Tensor& s, const diff::Tensor& a);

struct HeadParams {
  diff::Tensor polarity_w;  // [d_s×3]
  diff::Tensor polarity_b;  // [3]
  diff::Tensor intensity_w;
  diff::Tensor intensity_b;
  double input_scale = 1.0;
};

std::pair<diff::Tensor, diff::Tensor> emotion_heads(const diff::Tensor& s_adaptive, const HeadParams& p);

}  // namespace crisislens::mscn
