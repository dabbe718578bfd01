#include <gtest/gtest.h>

#include <cstdlib>

#include "support.hpp"

using namespace actmap;
using testing_support::slurp;
using testing_support::TempDir;

namespace {

/// Shared synthetic datasets and feature caches, built once per process.
class Pipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("pipeline");
    synthetic::generate_dataset(*dir_ / "small", 5, 7);
    synthetic::generate_dataset(*dir_ / "bench", 10, 7);
    synthetic::generate_dataset(*dir_ / "other", 10, 99);
    cmd::ExtractOptions ex;
    ex.net = testing_support::toy_net();
    ex.threads = 2;
    ex.manifest = *dir_ / "bench/manifest.csv";
    ex.out = *dir_ / "bench_haarpsi.csv";
    cmd::extract(ex);
    ex.manifest = *dir_ / "other/manifest.csv";
    ex.out = *dir_ / "other_haarpsi.csv";
    cmd::extract(ex);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::filesystem::path path(const std::string& name) { return *dir_ / name; }

  static TempDir* dir_;
};

TempDir* Pipeline::dir_ = nullptr;

int run_cli(const std::string& args) {
  const std::string command = std::string(ACTMAP_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

cmd::CrossvalOptions crossval_options(std::size_t reps) {
  cmd::CrossvalOptions cv;
  cv.regressor.kind = RegressorKind::GaussianSVR;
  cv.protocol = {5, reps};
  cv.seed = 3;
  cv.threads = 2;
  return cv;
}

}  // namespace

TEST_F(Pipeline, ExtractWritesOneRowPerPairAndResumes) {
  cmd::ExtractOptions ex;
  ex.net = testing_support::toy_net();
  ex.manifest = path("small/manifest.csv");
  ex.metric = MetricId::PSNR;
  ex.out = path("small_psnr.csv");
  ex.threads = 1;
  const auto first = cmd::extract(ex);
  EXPECT_EQ(first.rows_total, 100u);
  EXPECT_EQ(first.rows_computed, 100u);
  const std::string full = slurp(ex.out);
  const auto table = read_features(ex.out);
  ASSERT_EQ(table.rows.size(), 100u);
  EXPECT_EQ(table.dimension(), 40u);

  // Drop the last 30 rows and resume.
  std::istringstream lines(full);
  std::string line, partial;
  for (int i = 0; i < 71 && std::getline(lines, line); ++i) partial += line + "\n";
  std::ofstream(ex.out, std::ios::trunc) << partial;
  const auto second = cmd::extract(ex);
  EXPECT_EQ(second.rows_computed, 30u);
  EXPECT_EQ(slurp(ex.out), full);

  const auto third = cmd::extract(ex);
  EXPECT_EQ(third.rows_computed, 0u);

  ex.metric = MetricId::SSIM;
  ex.out = path("small_ssim.csv");
  cmd::extract(ex);
  const auto ssim_table = read_features(ex.out);
  ASSERT_EQ(ssim_table.rows.size(), 100u);
  EXPECT_EQ(ssim_table.dimension(), table.dimension());
  EXPECT_NE(ssim_table.rows[0].values, table.rows[0].values);
}

TEST_F(Pipeline, ExtractErrorsCarryPairContext) {
  TempDir dir("bad_manifest");
  write_png(dir / "r.png", 40, 40, std::vector<std::uint8_t>(4800, 9));
  write_png(dir / "d.png", 40, 36, std::vector<std::uint8_t>(4320, 9));
  std::ofstream(dir / "m.csv") << kManifestHeader << "\npair_x,r,r.png,d.png,1,blur,1\n";
  cmd::ExtractOptions ex;
  ex.net = testing_support::toy_net();
  ex.manifest = dir / "m.csv";
  ex.out = dir / "f.csv";
  try {
    cmd::extract(ex);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ResolutionMismatch);
    EXPECT_NE(std::string(e.what()).find("pair_x"), std::string::npos);
  }
}

TEST_F(Pipeline, PerfectPredictorFixtureScoresOne) {
  // The mos itself as the single feature. Synthetic mos repeats across references,
  // so it is made distinct first; Kendall here has no tie correction.
  FeatureTable t = read_features(path("bench_haarpsi.csv"));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    t.rows[i].mos += 1e-4 * static_cast<double>(i);
    t.rows[i].values = {t.rows[i].mos};
  }
  auto cv = crossval_options(3);
  cv.regressor.kind = RegressorKind::LinearSVR;
  cv.regressor.svr.epsilon = 0.0;
  cv.regressor.svr.c = 100.0;
  for (const auto& row : cmd::crossval(t, cv)) {
    EXPECT_NEAR(row.plcc, 1.0, 1e-6) << row.scope;
    EXPECT_EQ(row.srocc, 1.0) << row.scope;
    EXPECT_EQ(row.krocc, 1.0) << row.scope;
  }
}

TEST_F(Pipeline, CrossvalIsDeterministic) {
  auto cv = crossval_options(4);
  cv.features = path("bench_haarpsi.csv");
  cv.out = path("cv_a.csv");
  cmd::crossval(cv);
  cv.out = path("cv_b.csv");
  cv.threads = 1;
  cmd::crossval(cv);
  EXPECT_EQ(slurp(path("cv_a.csv")), slurp(path("cv_b.csv")));
  const auto report = csv::read(path("cv_a.csv"));
  EXPECT_EQ(report.header, (std::vector<std::string>{"scope", "n", "plcc", "srocc", "krocc", "plcc_std", "srocc_std",
                                                     "krocc_std"}));
  EXPECT_EQ(report.rows.front()[0], "all");
  EXPECT_EQ(report.rows.front()[1], "200");
  EXPECT_EQ(report.rows.size(), 1u + 4 + 5);
}

TEST_F(Pipeline, CrossvalRejectsTooFewReferences) {
  FeatureTable t = read_features(path("bench_haarpsi.csv"));
  std::erase_if(t.rows, [](const FeatureRow& r) { return r.reference_id > "ref04"; });
  try {
    cmd::crossval(t, crossval_options(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewReferences);
  }
}

TEST_F(Pipeline, SweepAgreesWithCrossvalAndIsMonotone) {
  const FeatureTable t = read_features(path("bench_haarpsi.csv"));
  cmd::SweepOptions sw;
  sw.regressor.kind = RegressorKind::GaussianSVR;
  sw.train_ratios = {20, 40, 60, 80};
  sw.repetitions = 60;
  sw.seed = 5;
  sw.threads = 2;
  const auto rows = cmd::sweep(t, sw);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].train_references, 2u);
  EXPECT_EQ(rows[3].train_references, 8u);
  int dips = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double step = rows[i].overall.srocc - rows[i - 1].overall.srocc;
    if (step < 0) {
      ++dips;
      EXPECT_GE(step, -0.01);
    }
  }
  EXPECT_LE(dips, 1);
  const auto cv = cmd::crossval(t, crossval_options(20));
  EXPECT_NEAR(rows[3].overall.srocc, cv.front().srocc, 0.02);
  EXPECT_NEAR(rows[3].overall.plcc, cv.front().plcc, 0.02);

  sw.train_ratios = {50, 96};
  try {
    cmd::sweep(t, sw);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Validation);
  }
}

TEST_F(Pipeline, ParamStudyHasNineRows) {
  cmd::ParamStudyOptions ps;
  ps.manifest = path("small/manifest.csv");
  ps.net = testing_support::toy_net();
  ps.work_dir = path("study");
  ps.protocol = {5, 2};
  ps.threads = 2;
  ps.out = path("study.csv");
  const auto rows = cmd::paramstudy(ps);
  EXPECT_EQ(rows.size(), 9u);
  EXPECT_EQ(csv::read(ps.out).rows.size(), 9u);
}

TEST_F(Pipeline, CrossDbWithinBeatsAcross) {
  cmd::CrossDbOptions cd;
  cd.regressor.kind = RegressorKind::GaussianSVR;
  const FeatureTable a = read_features(path("bench_haarpsi.csv"));
  const FeatureTable b = read_features(path("other_haarpsi.csv"));
  const double within = cmd::crossdb(a, a, cd).front().srocc;
  const double across = cmd::crossdb(a, b, cd).front().srocc;
  EXPECT_GE(within, across);
}

TEST_F(Pipeline, TrainPredictRoundTrip) {
  cmd::RegressorOptions reg;
  reg.kind = RegressorKind::GprRQ;
  const auto model = cmd::train_model(path("bench_haarpsi.csv"), reg, path("gpr.model"));
  const auto predicted = cmd::predict_file(path("gpr.model"), path("other_haarpsi.csv"), path("pred.csv"));
  const FeatureTable b = read_features(path("other_haarpsi.csv"));
  ASSERT_EQ(predicted.size(), b.rows.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) EXPECT_EQ(predicted[i], predict(model, b.rows[i].values));
  EXPECT_EQ(csv::read(path("pred.csv")).header, (std::vector<std::string>{"pair_id", "mos", "prediction"}));
}

TEST_F(Pipeline, CliOutputsAreByteIdenticalAcrossThreadCounts) {
  const std::string net = testing_support::toy_net().string();
  const std::string m = path("small/manifest.csv").string();
  const std::string f1 = path("cli_f1.csv").string(), f3 = path("cli_f3.csv").string();
  ASSERT_EQ(run_cli("extract --threads 1 --net " + net + " --manifest " + m + " --metric ssim --out " + f1), 0);
  ASSERT_EQ(run_cli("--threads 3 extract --net " + net + " --manifest " + m + " --metric ssim --out " + f3), 0);
  EXPECT_EQ(slurp(f1), slurp(f3));

  const std::string cv1 = path("cli_cv1.csv").string(), cv3 = path("cli_cv3.csv").string();
  const std::string cv_args = " crossval --features " + f1 + " --regressor gsvr --folds 5 --reps 3 --seed 9 --out ";
  ASSERT_EQ(run_cli("--threads 1" + cv_args + cv1), 0);
  ASSERT_EQ(run_cli("--threads 3" + cv_args + cv3), 0);
  EXPECT_EQ(slurp(cv1), slurp(cv3));

  const std::string s1 = path("cli_s1.csv").string(), s3 = path("cli_s3.csv").string();
  const std::string sw_args = " sweep --features " + f1 + " --train-ratios 20,80 --reps 3 --seed 2 --out ";
  ASSERT_EQ(run_cli("--threads 1" + sw_args + s1), 0);
  ASSERT_EQ(run_cli("--threads 3" + sw_args + s3), 0);
  EXPECT_EQ(slurp(s1), slurp(s3));
}

TEST_F(Pipeline, CliExitCodes) {
  const std::string f = path("bench_haarpsi.csv").string();
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("crossval --features " + f), 2);
  EXPECT_EQ(run_cli("crossval --features " + f + " --regressor nope --out x.csv"), 2);
  EXPECT_EQ(run_cli("sweep --features " + f + " --train-ratios 99 --out " + path("x.csv").string()), 2);
  EXPECT_EQ(run_cli("crossval --features " + path("missing.csv").string() + " --out " + path("x.csv").string()), 3);
  EXPECT_EQ(run_cli("generate --out " + path("g").string() + " --references 3"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
}

TEST_F(Pipeline, ConfigFileSuppliesFlags) {
  const std::string f = path("bench_haarpsi.csv").string();
  const auto cfg = path("run.toml");
  std::ofstream(cfg) << "threads = 2\n[crossval]\nfeatures = \"" << f << "\"\nregressor = \"linsvr\"\nreps = 2\nseed = 4\nout = \""
                     << path("cfg_a.csv").string() << "\"\n";
  ASSERT_EQ(run_cli("--config " + cfg.string() + " crossval"), 0);
  ASSERT_EQ(run_cli("crossval --features " + f + " --regressor linsvr --reps 2 --seed 4 --out " +
                    path("cfg_b.csv").string()),
            0);
  EXPECT_EQ(slurp(path("cfg_a.csv")), slurp(path("cfg_b.csv")));
  // Flags win over the file.
  ASSERT_EQ(run_cli("--config " + cfg.string() + " crossval --seed 5 --out " + path("cfg_c.csv").string()), 0);
  EXPECT_NE(slurp(path("cfg_a.csv")), slurp(path("cfg_c.csv")));
}

TEST(KadidRecipe, ProtocolCheckOnShapeOnlyDatabase) {
  TempDir dir("kadid");
  std::ofstream csv(dir / "dmos.csv");
  csv << "dist_img,ref_img,dmos,var\n";
  for (int r = 1; r <= 81; ++r)
    for (int t = 1; t <= 25; ++t)
      for (int l = 1; l <= 5; ++l) {
        char name[32], ref[32];
        std::snprintf(name, sizeof name, "I%02d_%02d_%02d.png", r, t, l);
        std::snprintf(ref, sizeof ref, "I%02d.png", r);
        csv << name << ',' << ref << ',' << 4.0 - 0.5 * l << ",0.2\n";
      }
  csv.close();
  cmd::ReproOptions opt;
  opt.kadid_dir = dir.path();
  opt.out_dir = dir / "out";
  opt.check_only = true;
  std::ostringstream log;
  const auto result = cmd::repro_kadid10k(opt, log);
  EXPECT_TRUE(result.check.ok());
  EXPECT_FALSE(result.ran);
  EXPECT_EQ(result.check.pairs, 10125u);
  EXPECT_EQ(result.check.references, 81u);
  EXPECT_EQ(load_manifest(opt.out_dir / "manifest.csv", false).rows.size(), 10125u);
}
