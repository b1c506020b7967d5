#include "conditioning/text.hpp"

#include <cctype>
#include <cmath>

#include "common/log.hpp"
#include "common/rng.hpp"

namespace speakgen::conditioning {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Eigen::VectorXd HashTextEncoder::encode(const std::vector<std::string>& tokens) const {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
  for (const auto& token : tokens) {
    Rng rng(fnv1a(token));
    for (int i = 0; i < dim_; ++i) sum(i) += rng.normal();
  }
  const double norm = sum.norm();
  if (norm > 0.0) sum /= norm;
  return sum;
}

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Eigen::VectorXd embed_text(std::string_view text, const TextEncoder& encoder, int max_tokens) {
  auto tokens = tokenize_text(text);
  if (tokens.empty()) return Eigen::VectorXd::Zero(encoder.dim());
  if (static_cast<int>(tokens.size()) > max_tokens) {
    warn("text has " + std::to_string(tokens.size()) + " tokens; truncated to " + std::to_string(max_tokens));
    tokens.resize(static_cast<std::size_t>(max_tokens));
  }
  return encoder.encode(tokens);
}

}  // namespace speakgen::conditioning
