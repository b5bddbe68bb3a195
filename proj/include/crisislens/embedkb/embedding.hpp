#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "crisislens/diffcore/autodiff.hpp"
#include "crisislens/diffcore/rng.hpp"
#include "crisislens/embedkb/lexicon.hpp"
#include "crisislens/embedkb/vocabulary.hpp"

namespace crisislens::embedkb {

// Parameter names in the shared store.
inline constexpr const char* kTableParam = "embed.table";
inline constexpr const char* kCategoryParam = "embed.category";
inline constexpr const char* kFusionParam = "embed.w_ph";

struct EmbeddingConfig {
  std::size_t d_model = 32;
  std::size_t d_ph = 16;
  // 0 disables the contextual encoder (plain table lookup).
  std::size_t encoder_layers = 0;
  std::size_t encoder_heads = 1;
  double lambda1 = 0.5;
};

void validate(const EmbeddingConfig& cfg);

// Adds table [|V|×d_model] (PAD row zero), category table [C×d_ph],
// W_ph [d_ph×d_model] and any encoder weights.
void init_embedding_params(diff::ParamStore& store, const EmbeddingConfig& cfg, std::size_t vocab_size,
                           std::size_t category_count, Rng& rng);

/// Stand-in token encoder: table lookup, optionally followed by residual
/// self-attention layers. Rows are [L×d_model]; the PAD row of the table is
/// frozen at zero.
diff::Var embed_base(diff::Graph& g, const diff::ParamStore& store, const EmbeddingConfig& cfg,
                     std::span<const std::size_t> ids);

/// Category embedding of every token's lexicon category, [L×d_ph].
diff::Var embed_knowledge(diff::Graph& g, const diff::ParamStore& store, std::span<const std::string> tokens,
                          const KnowledgeLexicon& lexicon);

/// e_base + λ₁·softmax(e_ph·W_ph) with the softmax over the d_model axis,
/// applied per token row. W_ph is stored [d_ph×d_model] for row vectors.
diff::Var fuse(diff::Var e_base, diff::Var e_ph, diff::Var w_ph, double lambda1);

// Tensor-level conveniences over the graph versions.
struct FusionParams {
  diff::Tensor w_ph;
  double lambda1 = 0.5;
};

diff::Tensor fuse(const diff::Tensor& e_base, const diff::Tensor& e_ph, const FusionParams& p);
diff::Tensor embed_knowledge(std::span<const std::string> tokens, const KnowledgeLexicon& lexicon,
                             const diff::Tensor& category_table);
diff::Tensor embed_base(const diff::ParamStore& store, const EmbeddingConfig& cfg, std::span<const std::size_t> ids);

}  // namespace crisislens::embedkb
