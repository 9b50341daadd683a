// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qloc/commands.hpp"

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int status = -1;
  std::string out;
};

CliRun qloc_cli(const std::string& args) {
  const std::string cmd = std::string(QLOC_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qloc_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

qloc::Table parse_csv(const std::string& text) {
  std::istringstream in(text);
  return qloc::read_csv(in);
}

qloc::Table parse_json(const std::string& text) {
  std::istringstream in(text);
  return qloc::read_json(in);
}

TEST(Table, NumberFormatting) {
  for (double v : {0.0, 1.0, 0.1, 2.0 / 3.0, 1e-300, 6.02214076e23, -3.5}) {
    EXPECT_EQ(qloc::parse_number(qloc::format_number(v)), v);
  }
  EXPECT_EQ(qloc::format_number(0.1), "0.1");
  EXPECT_EQ(qloc::format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isinf(qloc::parse_number("inf")));
  EXPECT_THROW(qloc::parse_number("1.5x"), qloc::FormatError);
}

TEST(Table, CsvAndJsonRoundTrip) {
  qloc::Table t;
  t.meta["command"] = "demo";
  t.meta["seed"] = "18446744073709551615";
  t.columns = {"a", "b"};
  t.rows = {{1.0, 0.1}, {std::numeric_limits<double>::infinity(), -2.5e-7}};
  std::stringstream csv, json;
  qloc::write_csv(csv, t);
  qloc::write_json(json, t);
  const auto c = qloc::read_csv(csv);
  const auto j = qloc::read_json(json);
  EXPECT_EQ(c.rows, t.rows);
  EXPECT_EQ(j.rows, t.rows);
  EXPECT_EQ(c.columns, t.columns);
  EXPECT_EQ(c.meta["seed"], "18446744073709551615");
  std::stringstream again;
  qloc::write_json(again, j);
  std::stringstream first;
  qloc::write_json(first, t);
  EXPECT_EQ(again.str(), first.str());
  std::istringstream bad("{\"meta\": {}, \"columns\": [\"a\"], \"rows\": [[1, 2]]}");
  EXPECT_THROW(qloc::read_json(bad), qloc::FormatError);
}

TEST(ParseGrid, Forms) {
  EXPECT_EQ(qloc::parse_grid("0:1:3"), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(qloc::parse_grid("0.25"), (std::vector<double>{0.25}));
  EXPECT_EQ(qloc::parse_grid("2:9:1"), (std::vector<double>{2.0}));
  EXPECT_EQ(qloc::parse_grid("0:5:51").size(), 51u);
  EXPECT_DOUBLE_EQ(qloc::parse_grid("0:5:51")[1], 0.1);
  EXPECT_THROW(qloc::parse_grid(""), qloc::UsageError);
  EXPECT_THROW(qloc::parse_grid("0:1:0"), qloc::UsageError);
  EXPECT_THROW(qloc::parse_grid("0:1"), qloc::UsageError);
  EXPECT_THROW(qloc::parse_grid("a:1:3"), qloc::UsageError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(qloc_cli("").status, 2);
  EXPECT_EQ(qloc_cli("--help").status, 0);
  EXPECT_EQ(qloc_cli("bounds --grid-dx 0:1:0").status, 2);
  EXPECT_EQ(qloc_cli("bounds --grid-dx ''").status, 2);
  EXPECT_EQ(qloc_cli("bounds --format xml").status, 2);
  EXPECT_EQ(qloc_cli("bounds --psf gaussian:sigma=-1").status, 2);
  EXPECT_EQ(qloc_cli("bounds --bogus 1").status, 2);
  EXPECT_EQ(qloc_cli("mc --scheme radial").status, 2);
  EXPECT_EQ(qloc_cli("mc --runs 0 --grid-dx 1").status, 2);
  EXPECT_EQ(qloc_cli("bounds --psf file:/nonexistent/psf.csv --grid-dx 1").status, 1);
  EXPECT_EQ(qloc_cli("bounds --grid-dx 1 --out /nonexistent/dir/out.csv").status, 1);
}

TEST(Cli, BoundsTable) {
  const CliRun r = qloc_cli("bounds --grid-dx 0:1:3 --grid-dy 0:0.2:3");
  ASSERT_EQ(r.status, 0);
  const auto t = parse_csv(r.out);
  ASSERT_EQ(t.rows.size(), 9u);
  EXPECT_EQ(t.columns, (std::vector<std::string>{"dx_sigma", "dy_sigma", "qcrb_norm", "direct_crb_norm",
                                                 "direct_crb_exact_norm"}));
  const auto& at1 = t.rows[2];
  EXPECT_EQ(at1[0], 1.0);
  EXPECT_EQ(at1[1], 0.0);
  EXPECT_NEAR(at1[2], 1.0, 1e-12);
  EXPECT_NEAR(at1[3], 2.0, 1e-9);
  EXPECT_NEAR(at1[4], 2.9132, 1e-3);
  EXPECT_TRUE(std::isinf(t.rows[0][3]));
  bool has_01 = false;
  for (const auto& row : t.rows) has_01 |= std::abs(row[1] - 0.1) < 1e-12;
  EXPECT_TRUE(has_01);
  EXPECT_NE(r.out.find("# columns: dx_sigma"), std::string::npos);
}

TEST(Cli, FiTables) {
  const CliRun s = qloc_cli("sliver-fi --grid-dx 0:2:5 --grid-dy 0:2:3");
  ASSERT_EQ(s.status, 0);
  const auto t = parse_csv(s.out);
  const std::size_t j11 = t.column("j11_norm"), j22 = t.column("j22_norm");
  for (const auto& row : t.rows) {
    EXPECT_LE(row[j11], 1.0);
    EXPECT_LE(row[j22], 1.0);
    const auto& same_dx = t.rows[static_cast<std::size_t>(row[0] / 0.5)];
    EXPECT_DOUBLE_EQ(row[j11], same_dx[j11]);
  }

  const CliRun origin = qloc_cli("sliver-fi --grid-dx 1e-7 --grid-dy 1e-7");
  ASSERT_EQ(origin.status, 0);
  const auto o = parse_csv(origin.out);
  EXPECT_NEAR(o.rows[0][2], 1.0, 1e-9);
  EXPECT_NEAR(o.rows[0][3], 1.0, 1e-9);

  const CliRun p = qloc_cli("spade-fi --grid-dx 0:5:6 --grid-dy 0:1:2 --psf gaussian:sigma=2.5");
  ASSERT_EQ(p.status, 0);
  for (const auto& row : parse_csv(p.out).rows) {
    EXPECT_EQ(row[2], 1.0);
    EXPECT_EQ(row[3], 1.0);
    EXPECT_EQ(row[4], 0.0);
  }
}

TEST(Cli, SampledPsfFile) {
  const fs::path psf = temp_path("gauss.csv");
  {
    std::ofstream out(psf);
    qloc::write_psf_csv(out, qloc::sample_gaussian(1.0, 8.0, 257));
  }
  const CliRun r = qloc_cli("bounds --grid-dx 1 --psf file:" + psf.string());
  ASSERT_EQ(r.status, 0);
  const auto t = parse_csv(r.out);
  EXPECT_NEAR(t.rows[0][2], 1.0, 1e-4);
  EXPECT_NEAR(t.rows[0][3], 2.0, 1e-2);
  EXPECT_EQ(qloc_cli("spade-fi --grid-dx 1 --psf file:" + psf.string()).status, 2);
  EXPECT_EQ(qloc_cli("mc --grid-dx 1 --runs 10 --psf file:" + psf.string()).status, 2);
}

TEST(Cli, McCsvJsonAgreeAndSeedEchoed) {
  const std::string args = "mc --scheme sliver --grid-dx 0:2:3 --grid-dy 0:1:2 --l 30 --runs 2000 --seed 99";
  const CliRun csv = qloc_cli(args + " --format csv");
  const CliRun json = qloc_cli(args + " --format json");
  ASSERT_EQ(csv.status, 0);
  ASSERT_EQ(json.status, 0);
  const auto a = parse_csv(csv.out);
  const auto b = parse_json(json.out);
  EXPECT_EQ(a.columns, b.columns);
  EXPECT_EQ(a.rows, b.rows);
  EXPECT_EQ(a.meta["seed"], "99");
  EXPECT_EQ(b.meta["seed"], "99");
  EXPECT_NE(csv.out.find("# seed: 99"), std::string::npos);

  std::stringstream reserialized;
  qloc::write_json(reserialized, b);
  EXPECT_EQ(reserialized.str(), json.out);
}

TEST(Cli, McOutputIsDeterministic) {
  const fs::path a = temp_path("a.csv"), b = temp_path("b.csv");
  const std::string args = "mc --scheme spade --grid-dx 0:3:4 --l 50 --runs 3000 --seed 5";
  ASSERT_EQ(qloc_cli(args + " --workers 1 --out " + a.string()).status, 0);
  ASSERT_EQ(qloc_cli(args + " --workers 4 --out " + b.string()).status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

}  // namespace
