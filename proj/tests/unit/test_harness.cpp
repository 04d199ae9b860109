#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "monofit/errors.hpp"
#include "monofit/harness.hpp"

using namespace monofit;

TEST(Corpus, FunctionsAreMonotoneAndConsistent) {
  for (const CorpusEntry& e : default_corpus()) {
    const SmoothFunction f = corpus_function(e.id, e.r);
    EXPECT_EQ(f.r, e.r);
    EXPECT_TRUE(check_smooth_function(f).ok()) << e.id << ": " << check_smooth_function(f).reason;
    EXPECT_FALSE(corpus_formula(e.id).empty());
    EXPECT_GE(corpus_max_r(e.id), e.r);
  }
  EXPECT_EQ(default_corpus().size(), 8u);
  EXPECT_TRUE(check_smooth_function(corpus_function("w2", 2)).ok());
}

TEST(Corpus, ClosedForms) {
  const SmoothFunction x2 = corpus_function("x2", 1);
  EXPECT_DOUBLE_EQ(x2(0.5), 1.25);
  EXPECT_DOUBLE_EQ(x2.derivative(1, 0.5), 3.0);
  const SmoothFunction xa = corpus_function("xabsx3", 2);
  EXPECT_DOUBLE_EQ(xa(-0.5), -0.0625);
  EXPECT_NEAR(xa.derivative(2, -0.5), -3.0, 1e-15);
}

TEST(Corpus, UnknownAndTooSmooth) {
  try {
    corpus_function("nope", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_argument);
  }
  EXPECT_THROW(corpus_function("xabsx", corpus_max_r("xabsx") + 1), Error);
}

TEST(Config, ParsesAndRejects) {
  const auto j = nlohmann::json::parse(
      R"({"corpus": ["x3", {"id": "exp", "r": 2}], "n_set": [24], "profile": "theoretical",
          "format": "json"})");
  const ExperimentConfig c = ExperimentConfig::from_json(j);
  ASSERT_EQ(c.corpus.size(), 2u);
  EXPECT_EQ(c.corpus[0].r, 1);
  EXPECT_EQ(c.corpus[1].r, 2);
  EXPECT_EQ(c.profile, Profile::theoretical);
  EXPECT_EQ(ExperimentConfig::from_json(c.to_json()).to_json(), c.to_json());

  EXPECT_THROW(ExperimentConfig::from_json({{"bogus", 1}}), Error);
  EXPECT_THROW(ExperimentConfig::from_json({{"n_set", nlohmann::json::array()}}), Error);
  EXPECT_THROW(ExperimentConfig::from_json({{"format", "xml"}}), Error);
}

TEST(Run, SmallMatrixIsDeterministic) {
  ExperimentConfig cfg;
  cfg.corpus = {{"x", 1}, {"x3", 1}};
  cfg.n_set = {24};
  const ReportSet a = run(cfg);
  const ReportSet b = run(cfg);
  EXPECT_TRUE(a.all_ok());
  ASSERT_EQ(a.rows.size(), 2u);
  EXPECT_EQ(a.to_csv(), b.to_csv());

  std::istringstream in(a.to_csv());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kReportVersion);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("f_id,r,n_requested,n_realized,ok,monotone_pass", 0), 0u);
  EXPECT_TRUE(a.to_json().contains("rows"));
  for (const RunRow& r : a.rows) {
    EXPECT_TRUE(r.report.monotone_pass);
    EXPECT_LE(r.report.endpoint_err, 1e-9);
  }
}

TEST(Run, ProbeIsLabelled) {
  ExperimentConfig cfg;
  cfg.corpus = {{"x", 1}};
  cfg.n_set = {24};
  cfg.negative_probe = true;
  const ReportSet rs = run(cfg);
  ASSERT_FALSE(rs.probe.empty());
  EXPECT_EQ(rs.probe.front().f_id, kProbeFunction);
  EXPECT_NE(rs.to_csv().find("# probe (illustrative only)"), std::string::npos);
}

TEST(LemmaSuite, EmitsEveryGroup) {
  VerifyConfig cfg;
  cfg.n_set = {8, 16};
  cfg.instances = 4;
  const LemmaSuiteReport rep = verify_all(cfg);
  std::set<std::string> seen;
  for (const SuiteRow& r : rep.rows) {
    seen.insert(r.group);
    EXPECT_FALSE(r.bound.empty());
  }
  for (const std::string& g : suite_groups()) EXPECT_TRUE(seen.count(g)) << g;
  EXPECT_EQ(suite_groups().size(), 13u);
  for (const SuiteRow& r : rep.rows) EXPECT_TRUE(r.pass) << r.group << "/" << r.bound << " " << r.note;
  EXPECT_TRUE(rep.pass());
  EXPECT_EQ(rep.to_csv(), verify_all(cfg).to_csv());
}
