#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace speakgen::conditioning {

inline constexpr int kTextEmbeddingDim = 512;
inline constexpr int kMaxTextTokens = 20;

// Pluggable sentence encoder (a pretrained CLIP text tower in production).
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual int dim() const = 0;
  virtual Eigen::VectorXd encode(const std::vector<std::string>& tokens) const = 0;
};

// Offline stand-in: every lower-cased token maps to a pseudo-random Gaussian
// direction seeded by its hash; the sentence vector is the normalized sum.
class HashTextEncoder final : public TextEncoder {
 public:
  explicit HashTextEncoder(int dim = kTextEmbeddingDim) : dim_(dim) {}
  int dim() const override { return dim_; }
  Eigen::VectorXd encode(const std::vector<std::string>& tokens) const override;

 private:
  int dim_;
};

std::vector<std::string> tokenize_text(std::string_view text);

// Empty or all-whitespace text yields the zero vector (the absent condition).
// Inputs longer than `max_tokens` are truncated with a warning.
Eigen::VectorXd embed_text(std::string_view text, const TextEncoder& encoder, int max_tokens = kMaxTextTokens);

}  // namespace speakgen::conditioning
