#include <cmath>
#include <set>

#include "doctest.h"
#include "common/digest.hpp"
#include "common/error.hpp"
#include "common/rng.hpp"
#include "conditioning/text.hpp"
#include "dataset/dataset.hpp"
#include "motion/kinematics.hpp"
#include "support.hpp"

using namespace speakgen;
using namespace speakgen::dataset;

TEST_CASE("normalization statistics") {
  Rng rng(1);
  std::vector<Eigen::MatrixXd> data;
  for (int i = 0; i < 5; ++i) {
    Eigen::MatrixXd m = rng.normal_matrix(20, 4) * 3.0;
    m.col(1).setConstant(7.0);
    data.push_back(m);
  }
  const NormStats s = NormStats::fit(data);
  CHECK(s.std(1) == kStdFloor);
  Eigen::MatrixXd all(100, 4);
  for (int i = 0; i < 5; ++i) all.middleRows(20 * i, 20) = data[static_cast<std::size_t>(i)];
  const Eigen::MatrixXd z = s.apply(all);
  CHECK(z.col(1).isZero(0.0));
  for (int c : {0, 2, 3}) {
    CHECK(std::abs(z.col(c).mean()) < 1e-6);
    CHECK(std::abs(std::sqrt(z.col(c).array().square().mean()) - 1.0) < 1e-6);
  }
  CHECK((s.invert(z) - all).cwiseAbs().maxCoeff() < 1e-6);
  CHECK_THROWS_AS(NormStats::fit({}), ValidationError);
  CHECK_THROWS_AS(NormStats::fit({Eigen::MatrixXd::Zero(1, 3)}), ValidationError);
}

TEST_CASE("pad or crop") {
  Rng rng(2);
  const Eigen::MatrixXd exact = rng.normal_matrix(180, 3);
  const Window w = pad_or_crop(exact, 180, rng);
  CHECK(w.data == exact);
  CHECK(w.valid_frames == 180);

  const Eigen::MatrixXd shortm = rng.normal_matrix(100, 3);
  const Window p = pad_or_crop(shortm, 180, rng);
  CHECK(p.valid_frames == 100);
  CHECK(p.data.topRows(100) == shortm);
  CHECK(p.data.bottomRows(80).isZero(0.0));

  const Eigen::MatrixXd longm = rng.normal_matrix(400, 3);
  std::set<int> starts;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng r(seed);
    const Window c = pad_or_crop(longm, 180, r);
    REQUIRE(c.start >= 0);
    REQUIRE(c.start <= 220);
    starts.insert(c.start);
    if (seed < 20) {
      Rng again(seed);
      CHECK(pad_or_crop(longm, 180, again).start == c.start);
      CHECK(c.data == longm.middleRows(c.start, 180));
    }
  }
  CHECK(starts.count(0) == 1);
  CHECK(starts.count(220) == 1);

  const Eigen::MatrixXd audio = rng.normal_matrix(400, 2);
  Rng r(5);
  const Window c = pad_or_crop(longm, 180, r);
  CHECK(follow_window(audio, c, 180) == audio.middleRows(c.start, 180));
}

TEST_CASE("weighted sampler") {
  Rng rng(3);
  const WeightedSampler even({100, 300}, {1, 1});
  int first = 0;
  for (int i = 0; i < 100000; ++i) first += even.next(rng).dataset == 0 ? 1 : 0;
  CHECK(std::abs(first / 1e5 - 0.5) < 0.01);

  const WeightedSampler only({10, 10}, {1, 0});
  for (int i = 0; i < 1000; ++i) CHECK(only.next(rng).dataset == 0);
  const WeightedSampler skip({10, 10, 10}, {0, 1, 0});
  for (int i = 0; i < 1000; ++i) CHECK(skip.next(rng).dataset == 1);

  // Chi-squared uniformity over one dataset: 19 degrees of freedom, p = 0.001 bound 43.8.
  const WeightedSampler single({20}, {2.0});
  std::vector<int> counts(20, 0);
  for (int i = 0; i < 100000; ++i) ++counts[static_cast<std::size_t>(single.next(rng).index)];
  double chi = 0;
  for (int c : counts) chi += (c - 5000.0) * (c - 5000.0) / 5000.0;
  CHECK(chi < 43.8);

  const WeightedSampler weighted({5, 5}, {1, 3});
  int second = 0;
  for (int i = 0; i < 100000; ++i) second += weighted.next(rng).dataset;
  CHECK(std::abs(second / 1e5 - 0.75) < 0.01);

  CHECK_THROWS_AS(WeightedSampler({1, 1}, {0, 0}), ValidationError);
  CHECK_THROWS_AS(WeightedSampler({1, 0}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(WeightedSampler({1}, {-1}), ValidationError);
}

TEST_CASE("split assignment") {
  Rng rng(4);
  const auto splits = assign_splits(100, rng);
  int counts[3] = {0, 0, 0};
  for (auto s : splits) ++counts[static_cast<int>(s)];
  CHECK(counts[0] == 80);
  CHECK(counts[1] == 10);
  CHECK(counts[2] == 10);
  Rng again(4);
  CHECK(assign_splits(100, again) == splits);
  CHECK(parse_split(split_name(Split::kValidation)) == Split::kValidation);
}

TEST_CASE("synthetic corpus") {
  SyntheticConfig cfg;
  cfg.per_family = 3;
  cfg.audio_clips = 3;
  const conditioning::HashTextEncoder enc;
  Rng rng(5);
  const auto corpus = make_synthetic_corpus(cfg, rng, enc);
  REQUIRE(corpus.size() == 12);
  const auto layout = motion::FeatureLayout::for_joints(5);
  for (const auto& e : corpus) {
    CHECK(e.features.rows() == cfg.frames);
    CHECK(e.features.cols() == 59);
    CHECK(e.bundle.has_text != e.bundle.has_audio);
    if (e.bundle.has_audio) {
      CHECK(e.bundle.text.isZero(0.0));
      CHECK(e.bundle.audio.rows() == cfg.frames);
      CHECK(e.source == "audio");
    } else {
      CHECK(e.bundle.audio.isZero(0.0));
      CHECK(std::abs(e.bundle.text.norm() - 1.0) < 1e-9);
    }
    if (e.name.rfind("still", 0) == 0) {
      CHECK(e.features.middleCols(layout.joint_velocities.begin, layout.joint_velocities.size).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
  // The wave signature lives at the configured frequency.
  const auto& wave = corpus[0];
  const int hand = 4;
  const Eigen::VectorXd y = wave.features.col(layout.joint_positions.begin + 3 * (hand - 1) + 1);
  CHECK(testing::dominant_frequency(y, cfg.fps) == doctest::Approx(cfg.wave_hz).epsilon(0.2));

  Rng again(5);
  const auto twin = make_synthetic_corpus(cfg, again, enc);
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(twin[i].features == corpus[i].features);
}
