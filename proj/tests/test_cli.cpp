#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "test_util.hpp"

using testutil::fixture;
using testutil::TempDir;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::string& args, const TempDir& tmp) {
  const auto err_path = tmp / "stderr.txt";
  const std::string cmd = std::string(SPDER_CLI_PATH) + " " + args + " 2> " + err_path.string();
  FILE* p = popen(cmd.c_str(), "r");
  Run r{-1, {}, {}};
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) r.out += buf.data();
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream e(err_path);
  std::stringstream ss;
  ss << e.rdbuf();
  r.err = ss.str();
  return r;
}

const std::regex kMetricLine(R"(step=\d+ mse=\S+ psnr=\S+ rho=\S+\n)");

}  // namespace

TEST(Cli, FitRampSmoke) {
  TempDir tmp;
  const auto r = cli("fit --image " + fixture("ramp64.pgm").string() + " --preset spder:sqrtabs --steps 500 --out " +
                         tmp.path().string(),
                     tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_match(r.out, kMetricLine)) << r.out;
  EXPECT_TRUE(std::filesystem::exists(tmp / "fit/spder-sqrtabs/report.csv"));
  std::smatch m;
  ASSERT_TRUE(std::regex_search(r.out, m, std::regex(R"(mse=(\S+))")));
  EXPECT_LT(std::stod(m[1]), 1e-6);
}

TEST(Cli, UsageErrorsExitTwo) {
  TempDir tmp;
  const std::string ramp = fixture("ramp64.pgm").string();
  const std::vector<std::string> cases{"",
                                       "bogus",
                                       "fit",
                                       "fit --image /nonexistent.pgm",
                                       "fit --image " + ramp + " --frobnicate",
                                       "superres --image " + fixture("natural64.pgm").string() + " --srf 3",
                                       "fit --image " + ramp + " --preset tanh --steps 1",
                                       "grad --rows 4 --cols 4"};
  for (const auto& args : cases) {
    const auto r = cli(args, tmp);
    EXPECT_EQ(r.code, 2) << args << "\n" << r.err;
    EXPECT_TRUE(r.out.empty()) << args;
    EXPECT_FALSE(r.err.empty()) << args;
  }
}

TEST(Cli, NumericFailureExitsOne) {
  TempDir tmp;
  // every sample identical: the amplitude spectrum is all zero, so the similarity is undefined
  {
    std::ofstream f(tmp / "flat.pgm", std::ios::binary);
    f << "P5\n4 4\n255\n" << std::string(16, '\x10');
  }
  const auto r = cli("spectrum --input " + (tmp / "flat.pgm").string() + " --reference " +
                         (tmp / "flat.pgm").string() + " --out " + tmp.path().string(),
                     tmp);
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, AblateOneColumnPerDamping) {
  TempDir tmp;
  const auto r = cli("ablate --image " + fixture("natural64.pgm").string() +
                         " --deltas sqrtabs,logabs,arctan --steps 3 --out " + tmp.path().string(),
                     tmp);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::regex_match(r.out, kMetricLine)) << r.out;
  std::ifstream f(tmp / "ablate/ablation.csv");
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "step,log10_loss_sqrtabs,log10_loss_logabs,log10_loss_arctan");
  int rows = 0;
  for (std::string line; std::getline(f, line);) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 3);
  }
  EXPECT_EQ(rows, 3);
}

TEST(Cli, SpectrumAndGradFromCheckpoint) {
  TempDir tmp;
  const auto s = cli("spectrum --input " + fixture("tone440.wav").string() + " --reference " +
                         fixture("chirp.wav").string() + " --out " + tmp.path().string(),
                     tmp);
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(std::regex_match(s.out, kMetricLine)) << s.out;
  EXPECT_TRUE(std::filesystem::exists(tmp / "spectrum/spectrum.csv"));

  const auto g = cli("grad --image " + fixture("edge64.pgm").string() + " --steps 2 --out " + tmp.path().string(), tmp);
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_TRUE(std::filesystem::exists(tmp / "grad/spder-sqrtabs/gradient.pgm"));
  const auto again = cli("grad --checkpoint " + (tmp / "fit/spder-sqrtabs/checkpoint.spdr").string() +
                             " --rows 8 --cols 8 --out " + (tmp / "second").string(),
                         tmp);
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_TRUE(again.out.empty());
  EXPECT_TRUE(std::filesystem::exists(tmp / "second/grad/spder/gradient.csv"));
}
