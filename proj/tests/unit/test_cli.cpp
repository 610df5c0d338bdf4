#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scss/cli.hpp"
#include "scss/covariance.hpp"
#include "scss/mixture.hpp"

namespace scss {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("scss_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path path(const std::string& name) const { return dir_ / name; }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  const CliRun unknown = run({"sweep-mse", "--bogus", "1"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("sweep-mse"), std::string::npos);
  EXPECT_NE(unknown.err.find("--sir"), std::string::npos);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"gen", "--count", "2"}).code, 2);
  EXPECT_EQ(run({"sweep-mse", "--trials", "zero"}).code, 2);
  EXPECT_EQ(run({"sweep-mse", "--methods", "cnn"}).code, 2);
  EXPECT_EQ(run({"sync-eval"}).code, 2);
  write("bad.cfg", "trials = 3\nmystery = 1\n");
  EXPECT_EQ(run({"theorem1", "--config", path("bad.cfg").string()}).code, 2);
}

TEST_F(CliTest, Help) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"gen", "cov", "sweep-mse", "sweep-ber", "theorem1", "sync-eval",
                          "bounds-check"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST_F(CliTest, RuntimeErrorExitsOne) {
  const CliRun r = run({"sync-eval", "--dataset", path("missing.scss").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST_F(CliTest, SweepBerConfigAndFlags) {
  const fs::path out = path("ber.csv");
  write("c.cfg",
        "# quick grid\n"
        "n = 1280\n"
        "trials = 2\n"
        "min_bits = 0\n"
        "methods = mf,lmmse\n"
        "sir = 0\n"
        "seed = 3\n"
        "out = " + out.string() + "\n");
  const std::vector<std::string> args{"sweep-ber", "--config", path("c.cfg").string(), "--sir",
                                      "-10:-2:2",  "--seed",   "7"};
  const CliRun r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const std::string text = slurp(out);
  EXPECT_EQ(text.rfind("# command=sweep-ber\n", 0), 0U);
  EXPECT_NE(text.find("# seed=7\n"), std::string::npos);
  EXPECT_NE(text.find("# sir=-10,-8,-6,-4,-2\n"), std::string::npos);
  EXPECT_NE(text.find("# n=1280\n"), std::string::npos);
  EXPECT_EQ(text.find("out="), std::string::npos);
  EXPECT_NE(text.find("\n-10,inf,1280,mf,ber,"), std::string::npos);
  EXPECT_NE(text.find("\n-2,inf,1280,lmmse,ber,"), std::string::npos);
  // Same invocation, same bytes.
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(slurp(out), text);
}

TEST_F(CliTest, CsvToStdout) {
  const CliRun r = run({"theorem1", "--n", "16,32", "--trials", "20", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("sir_db,snr_db,n,method,metric,value,stderr,trials\n"), std::string::npos);
  EXPECT_NE(r.out.find(",32,theorem1,ratio,"), std::string::npos);
}

TEST_F(CliTest, GenCovAndSyncEvalPipeline) {
  const fs::path data = path("d.scss");
  ASSERT_EQ(run({"gen", "--n", "160", "--count", "12", "--seed", "4", "--out", data.string()}).code,
            0);
  const Dataset d = read_dataset(data);
  EXPECT_EQ(d.records.size(), 12U);
  EXPECT_EQ(d.header.n, 160U);
  EXPECT_EQ(d.header.flags, kFlagComponents | kFlagBits);

  // Every interference shift needs training blocks: one label per record at L = n / 2.
  const fs::path train = path("t.scss");
  ASSERT_EQ(run({"gen", "--n", "160", "--count", "1200", "--seed", "5", "--out", train.string()})
                .code,
            0);
  const fs::path bank = path("b.scov");
  EXPECT_EQ(run({"cov", "--n", "80", "--dataset", data.string(), "--out", bank.string()}).code, 1);
  ASSERT_EQ(run({"cov", "--n", "80", "--dataset", train.string(), "--out", bank.string()}).code, 0);
  EXPECT_EQ(read_bank(bank).L, 80);
  ASSERT_EQ(run({"cov", "--n", "40", "--out", bank.string()}).code, 0);
  EXPECT_EQ(read_bank(bank).L, 40);

  PredictionSet p;
  p.header = d.header;
  for (const auto& rec : d.records) p.predictions.push_back({rec.k_b, {}});
  const fs::path preds = path("p.scss");
  write_predictions(p, preds);
  const CliRun r = run({"sync-eval", "--dataset", data.string(), "--predictions", preds.string(),
                     "--n", "80,160"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(",160,external,accuracy,1,0,12\n"), std::string::npos);
  EXPECT_NE(r.out.find(",80,map,accuracy,"), std::string::npos);
  EXPECT_NE(r.out.find(",160,psi,error_rate,"), std::string::npos);
}

TEST_F(CliTest, BoundsCheckColumns) {
  const CliRun r = run({"bounds-check", "--n", "16,32", "--trials", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nn,err_prob,conf_lo,conf_hi,log10_b1_star,log10_b2_star,psi_err_prob,"
                       "psi_conf_lo,psi_conf_hi\n"),
            std::string::npos);
  EXPECT_NE(r.out.find("\n16,"), std::string::npos);
  EXPECT_NE(r.out.find("\n32,"), std::string::npos);
  EXPECT_EQ(run({"bounds-check", "--eps", "0.5"}).code, 2);
}

TEST_F(CliTest, OutputsIndependentOfWorkerCount) {
  const fs::path a = path("a.csv");
  const fs::path b = path("b.csv");
  const std::vector<std::string> base{"sweep-mse", "--sir", "-6,0", "--n", "32", "--trials", "130"};
  auto with = [&](const fs::path& out, const std::string& workers) {
    auto args = base;
    args.insert(args.end(), {"--workers", workers, "--out", out.string()});
    return run(args).code;
  };
  ASSERT_EQ(with(a, "1"), 0);
  ASSERT_EQ(with(b, "3"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(run({"sweep-mse", "--workers", "-1"}).code, 2);
}

}  // namespace
}  // namespace scss
