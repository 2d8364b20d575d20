#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

#ifndef QCOLLAPSE_TEST_TMP
#define QCOLLAPSE_TEST_TMP "cli_tmp"
#endif

namespace fs = std::filesystem;
using qcollapse::CsvTable;

namespace {

struct Invocation {
  int code;
  std::string out, err;
};

Invocation run(std::vector<std::string> args) {
  args.insert(args.begin(), "qcollapse");
  std::ostringstream out, err;
  const int code = qcollapse::cli::parse_and_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp(const std::string& name) {
  fs::create_directories(QCOLLAPSE_TEST_TMP);
  return (fs::path(QCOLLAPSE_TEST_TMP) / name).string();
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

CsvTable parse(const std::string& s) {
  std::istringstream is(s);
  return qcollapse::read_csv(is);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, HelpAndUnknownFlags) {
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({"profile", "--help"}).code, 0);
  EXPECT_EQ(run({"profile", "--gamma", "1", "--bogus"}).code, 1);
  EXPECT_EQ(run({"nosuchcommand"}).code, 1);
  EXPECT_EQ(run({"profile", "--gamma", "abc"}).code, 1);
}

TEST(Cli, ParamsReportsDerivedQuantities) {
  const Invocation r = run({"params", "--beta-tilde", "3", "--ell", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("gamma = 1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("nu = 0.5"), std::string::npos);
}

TEST(Cli, ParamsRejectsWeakCoupling) {
  const Invocation r = run({"params", "--beta-tilde", "0.25"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("gamma > 1/4"), std::string::npos) << r.err;
  EXPECT_EQ(run({"params", "--gamma", "1", "--beta-tilde", "2"}).code, 1);  // mutually exclusive
}

TEST(Cli, ClassicalFall) {
  EXPECT_NE(run({"params", "--classical-limit", "-1", "--angular-momentum", "0.5"}).out.find("true"), std::string::npos);
  EXPECT_NE(run({"params", "--classical-limit", "-0.1", "--angular-momentum", "1"}).out.find("false"), std::string::npos);
}

TEST(Cli, ProfileToStdout) {
  const Invocation r = run({"profile", "--gamma", "1", "--n", "20"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(first_line(r.out), "xi,re_R,im_R,abs2_R,re_dR,im_dR");
  const CsvTable t = parse(r.out);
  ASSERT_EQ(t.rows(), 20u);
  EXPECT_DOUBLE_EQ(t.column("xi").front(), 0.05);
  EXPECT_DOUBLE_EQ(t.column("xi").back(), 30.0);
  EXPECT_EQ(run({"profile", "--gamma", "1", "--xi-min", "0"}).code, 1);
}

TEST(Cli, ConfigFileAndCommandLinePrecedence) {
  const std::string cfg = tmp("profile.cfg");
  std::ofstream(cfg) << "# profile settings\ngamma = 2\nn = 7\nxi_max = 10\n";
  const Invocation a = run({"profile", "--config", cfg});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(parse(a.out).rows(), 7u);
  EXPECT_DOUBLE_EQ(parse(a.out).column("xi").back(), 10.0);
  const Invocation b = run({"profile", "--config", cfg, "--n", "5"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(parse(b.out).rows(), 5u);
  // gamma = 2 from the file reproduces the direct call.
  EXPECT_EQ(a.out, run({"profile", "--gamma", "2", "--n", "7", "--xi-max", "10"}).out);

  std::ofstream(tmp("bad.cfg")) << "gamma = 1\nnot_an_option = 3\n";
  EXPECT_EQ(run({"profile", "--config", tmp("bad.cfg")}).code, 1);
  EXPECT_EQ(run({"profile", "--config", tmp("missing.cfg")}).code, 1);
}

TEST(Cli, ProfileSweepWritesOneFilePerGamma) {
  const std::string base = tmp("sweep.csv");
  const Invocation r = run({"profile", "--sweep", "gamma=0.5,2", "--n", "10", "--out", base});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"sweep_gamma0.5.csv", "sweep_gamma2.csv"}) {
    ASSERT_TRUE(fs::exists(tmp(name))) << name;
    EXPECT_EQ(parse(slurp(tmp(name))).rows(), 10u);
  }
  EXPECT_EQ(run({"profile", "--sweep", "gamma=0.5,2"}).code, 1);  // needs --out
  EXPECT_EQ(run({"profile", "--sweep", "beta=1", "--out", base}).code, 1);
  EXPECT_EQ(run({"profile", "--sweep", "gamma=0.1", "--out", base}).code, 1);
}

TEST(Cli, CheckPassesAndReportsTable) {
  const Invocation r = run({"check", "--gamma", "1", "--draws", "50"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  EXPECT_NE(r.out.find("kummer_transformation"), std::string::npos);
  EXPECT_EQ(run({"check", "--draws", "0"}).code, 1);
}

TEST(Cli, ObservablesTextCsvAndSweep) {
  const Invocation t = run({"observables", "--gamma", "1", "--t", "-0.25"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("C_r = I1/I0"), std::string::npos);
  EXPECT_NE(t.out.find("<r><p>"), std::string::npos);
  const Invocation c = run({"observables", "--gamma", "1", "--format", "csv"});
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(first_line(c.out), "gamma,I0,I1,I2,C_r,C_p,E_dimless,quad_error");
  EXPECT_NEAR(parse(c.out).column("C_r")[0], 1.0774268017618569, 1e-9);
  const Invocation s = run({"observables", "--sweep", "gamma=0.5,1,2"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(parse(s.out).rows(), 3u);
  EXPECT_EQ(run({"observables", "--gamma", "1", "--xi-max", "20"}).code, 1);
  EXPECT_EQ(run({"observables", "--gamma", "1", "--format", "xml"}).code, 1);
}

TEST(Cli, EvolveFitAndPlot) {
  const std::string rec = tmp("rec.csv");
  const Invocation e = run({"evolve", "--gamma", "1", "--t-end", "-0.3", "--dt", "1e-3",
                     "--record-every", "20", "--out", rec, "--fit"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("fitted exponent nu = 0.49"), std::string::npos) << e.out;
  const CsvTable t = parse(slurp(rec));
  EXPECT_EQ(t.header, (std::vector<std::string>{"t", "norm", "r_mean", "fidelity"}));
  EXPECT_DOUBLE_EQ(t.column("t").front(), -1.0);
  EXPECT_DOUBLE_EQ(t.column("t").back(), -0.3);

  const Invocation f = run({"fit", "--in", rec, "--abs-t-max", "0.8"});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_NE(f.out.find("exponent = 0.49"), std::string::npos) << f.out;
  EXPECT_EQ(run({"fit", "--in", rec, "--y", "nope"}).code, 1);
  EXPECT_EQ(run({"fit", "--in", tmp("absent.csv")}).code, 1);

  const std::string svg = tmp("rec.svg");
  ASSERT_EQ(run({"plot", "--in", rec, "--out", svg}).code, 0);
  const std::string body = slurp(svg);
  EXPECT_EQ(body.rfind("<?xml", 0), 0u);
  EXPECT_NE(body.find("fit: nu = 0.49"), std::string::npos);
  EXPECT_NE(body.find("</svg>"), std::string::npos);
}

TEST(Cli, EvolveGaussianAndValidation) {
  const Invocation g = run({"evolve", "--init", "gaussian", "--n-points", "512", "--r-max", "20", "--t-end", "0.05",
                     "--dt", "0.01", "--record-every", "1"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(parse(g.out).rows(), 6u);
  EXPECT_EQ(run({"evolve", "--init", "gaussian", "--core", "flux"}).code, 1);
  EXPECT_EQ(run({"evolve", "--init", "sideways"}).code, 1);
  EXPECT_EQ(run({"evolve", "--n-points", "10"}).code, 1);
  EXPECT_EQ(run({"evolve", "--dt", "0"}).code, 1);
}

TEST(Cli, EvolveHaltReturnsNumericalCode) {
  const Invocation r = run({"evolve", "--gamma", "1", "--n-points", "1024", "--r-core", "0.35", "--t-end", "-0.01",
                     "--dt", "1e-3", "--record-every", "10"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("r_core"), std::string::npos) << r.err;
  EXPECT_GE(parse(r.out).rows(), 2u);
}

TEST(Cli, PlotProfileFigure) {
  const std::string a = tmp("pa.csv"), svg = tmp("fig.svg");
  ASSERT_EQ(run({"profile", "--gamma", "1", "--n", "50", "--xi-min", "0.01", "--out", a}).code, 0);
  ASSERT_EQ(run({"plot", "--in", a, "--label", "gamma = 1", "--style", "fig1", "--out", svg}).code, 0);
  const std::string body = slurp(svg);
  EXPECT_NE(body.find("gamma = 1"), std::string::npos);
  EXPECT_NE(body.find("<polyline"), std::string::npos);
  EXPECT_EQ(run({"plot", "--in", a, "--style", "record"}).code, 1);
}
