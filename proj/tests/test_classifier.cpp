#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <set>

#include "chartfolio/classifier.hpp"
#include "support.hpp"

using namespace chartfolio;

namespace {

PredictionRecord rec(const std::string& id, ClassLabel t, double a, double b, double c) {
  PredictionRecord r;
  r.sample_id = id;
  r.true_label = t;
  r.softmax = Vector3(a, b, c);
  return r;
}

Matrix3 table_counts() {
  Matrix3 m;
  m << 1200, 728, 386, 185, 324, 57, 131, 56, 112;
  return m;
}

}  // namespace

TEST(Channel, Validation) {
  EXPECT_NO_THROW(ChannelMatrix(Matrix3::Identity()));
  Matrix3 bad = Matrix3::Identity();
  bad(0, 1) = 0.1;
  EXPECT_THROW(ChannelMatrix{bad}, InputError);
  bad = Matrix3::Identity();
  bad(1, 1) = -1;
  bad(1, 0) = 2;
  EXPECT_THROW(ChannelMatrix{bad}, InputError);
  const auto c = ChannelMatrix::from_counts(table_counts());
  EXPECT_NEAR(c.probs()(1, 1), 324.0 / 566.0, 1e-15);
}

TEST(Channel, DegenerateRows) {
  RngStream rng(1, 0);
  const ChannelMatrix id(Matrix3::Identity());
  Matrix3 all0 = Matrix3::Zero();
  all0.col(0).setOnes();
  const ChannelMatrix to0(all0);
  for (int i = 0; i < 1000; ++i) {
    const auto t = label_from_index(i % 3);
    EXPECT_EQ(channel_classify(t, id, rng), t);
    EXPECT_EQ(channel_classify(ClassLabel::C2, to0, rng), ClassLabel::C0);
  }
}

TEST(Channel, RowFrequencyAndGoodnessOfFit) {
  const auto channel = ChannelMatrix::from_counts(table_counts());
  RngStream rng(2024, 0);
  const int n = 1000000;
  std::array<int, 3> counts{};
  for (int i = 0; i < n; ++i) ++counts[index_of(channel_classify(ClassLabel::C1, channel, rng))];
  EXPECT_NEAR(counts[1] / double(n), 0.5724, 0.002);
  const double expect[3] = {185.0 / 566, 324.0 / 566, 57.0 / 566};
  double chi2 = 0;
  for (int j = 0; j < 3; ++j) chi2 += std::pow(counts[j] - n * expect[j], 2) / (n * expect[j]);
  const boost::math::chi_squared dist(2);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 0.001);
}

TEST(Channel, ConfigForms) {
  const auto cfg = KvConfig::parse("kind=counts\nrow0=1200,728,386\nrow1=185,324,57\nrow2=131,56,112\n");
  EXPECT_NEAR(ChannelMatrix::from_config(cfg).probs()(0, 0), 1200.0 / 2314, 1e-15);
  EXPECT_THROW(ChannelMatrix::from_config(KvConfig::parse("row0=1,0\nrow1=0,1,0\nrow2=0,0,1\n")), InputError);
}

TEST(Synthesize, ArgmaxMatchesPrediction) {
  RngStream rng(3, 3);
  const Vector3 row(0.2, 0.5, 0.3);
  for (int i = 0; i < 5000; ++i) {
    const auto p = label_from_index(i % 3);
    const Vector3 s = synthesize_softmax(p, row, {}, rng);
    ASSERT_NEAR(s.sum(), 1.0, 1e-12);
    ASSERT_TRUE((s.array() >= 0).all());
    ASSERT_EQ(argmax_classify(s), p);
  }
}

TEST(Simulate, DeterministicPerSample) {
  std::vector<LabeledInput> in;
  for (int i = 0; i < 200; ++i) in.push_back({"s" + std::to_string(i), label_from_index(i % 3), 1.0});
  const auto channel = ChannelMatrix::from_counts(table_counts());
  const auto a = simulate_channel(in, channel, {}, 5);
  const auto b = simulate_channel(in, channel, {}, 5);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].softmax, b[i].softmax);
    EXPECT_EQ(a[i].predicted, b[i].predicted);
  }
  // A sample's draw does not depend on its neighbours.
  const std::vector<LabeledInput> sub(in.begin() + 100, in.end());
  const auto c = simulate_channel(sub, channel, {}, 5);
  EXPECT_EQ(c[0].softmax, a[100].softmax);
}

TEST(Replay, ParsesValidRows) {
  const auto r = replay_parse("sample_id,true_label,prob0,prob1,prob2\nA,0,0.2,0.5,0.3\nB,2,0.1,0.1,0.8\n");
  ASSERT_TRUE(r.errors.empty());
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[0].sample_id, "A");
  EXPECT_EQ(argmax_classify(r.records[0]), ClassLabel::C1);
  EXPECT_EQ(r.records[1].true_label, ClassLabel::C2);
}

TEST(Replay, RowErrors) {
  const auto r = replay_parse(
      "sample_id,true_label,prob0,prob1,prob2\nA,0,0.2,0.4,0.3\nB,5,0.2,0.5,0.3\nC,1,x,0.5,0.5\n"
      "D,1,-0.1,0.6,0.5\nE,1,0.3,0.3,0.4\n");
  ASSERT_EQ(r.errors.size(), 4u);
  EXPECT_EQ(r.errors[0].line, 2u);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].sample_id, "E");
  EXPECT_THROW(replay_parse("sample_id,prob0,prob1,prob2\n"), InputError);
}

TEST(Replay, OrderPreservedAndRoundTrip) {
  auto recs = fixtures::table_fixture_records();
  recs.resize(500);
  recs[3].yield = 1.0123;
  const auto text = serialize_records_csv(recs);
  const auto back = replay_parse(text);
  ASSERT_TRUE(back.errors.empty());
  ASSERT_EQ(back.records.size(), 500u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    ASSERT_EQ(back.records[i].sample_id, recs[i].sample_id);
    ASSERT_NEAR((back.records[i].softmax - recs[i].softmax).norm(), 0, 1e-15);
  }
  EXPECT_EQ(back.records[3].yield, 1.0123);
}

TEST(Argmax, Examples) {
  EXPECT_EQ(argmax_classify(Vector3(0.3377, 0.3312, 0.3311)), ClassLabel::C0);
  EXPECT_EQ(argmax_classify(Vector3(1.0 / 3, 1.0 / 3, 1.0 / 3)), ClassLabel::C0);
  EXPECT_EQ(argmax_classify(Vector3(0.1, 0.1, 0.8)), ClassLabel::C2);
  EXPECT_EQ(argmax_classify(Vector3(0.2, 0.4, 0.4)), ClassLabel::C1);
}

TEST(Argmax, InvariantUnderMonotoneTransform) {
  RngStream rng(6, 0);
  for (int i = 0; i < 5000; ++i) {
    Vector3 s(rng.uniform(), rng.uniform(), rng.uniform());
    s /= s.sum();
    Vector3 t = s.array().pow(3.0) + 0.5 * s.array().exp();
    t /= t.sum();
    ASSERT_EQ(argmax_classify(s), argmax_classify(t));
  }
}

TEST(AlphaFilter, Examples) {
  const std::vector<PredictionRecord> rs{rec("a", ClassLabel::C0, 0.94, 0.03, 0.03),
                                         rec("b", ClassLabel::C1, 0.02, 0.96, 0.02)};
  const auto f = alpha_filter(rs, ApprovalThreshold(0.95));
  ASSERT_EQ(f.classified.size(), 1u);
  EXPECT_EQ(f.classified[0].sample_id, "b");
  EXPECT_EQ(f.classified[0].predicted, ClassLabel::C1);
  EXPECT_EQ(f.abstained[0].sample_id, "a");
  EXPECT_EQ(alpha_filter(rs, ApprovalThreshold(1.0 / 3)).classified.size(), 2u);
  EXPECT_THROW(ApprovalThreshold(1.0), InputError);
  EXPECT_THROW(ApprovalThreshold(0.0), InputError);
}

TEST(AlphaFilter, TableFixture) {
  const auto recs = fixtures::table_fixture_records();
  const auto f = alpha_filter(recs, ApprovalThreshold(0.95));
  ASSERT_EQ(f.classified.size(), 71u);
  int correct = 0;
  for (const auto& r : f.classified) correct += *r.predicted == r.true_label;
  EXPECT_EQ(correct, 63);
  EXPECT_EQ(alpha_filter(recs, ApprovalThreshold(1.0 / 3)).classified.size(), recs.size());
}

TEST(AlphaFilter, NestedInAlpha) {
  const auto recs = fixtures::table_fixture_records();
  std::set<std::string> prev;
  for (const auto& r : recs) prev.insert(r.sample_id);
  for (double a = 0.34; a < 0.999; a += 0.01) {
    std::set<std::string> now;
    for (const auto& r : alpha_filter(recs, ApprovalThreshold(a)).classified) now.insert(r.sample_id);
    for (const auto& id : now) ASSERT_TRUE(prev.count(id)) << a;
    prev = std::move(now);
  }
}
