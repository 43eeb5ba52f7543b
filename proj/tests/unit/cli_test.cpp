#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "ice/service/service.hpp"
#include "ice/synthetic.hpp"

using namespace ice;
using wire::Json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result ice_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ice");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string tmp_path(const std::string& name) {
  fs::create_directories(ICE_TEST_TMP);
  return (fs::path(ICE_TEST_TMP) / name).string();
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = tmp_path(name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

std::string write_dataset(const std::string& name, const Dataset& ds) {
  std::ostringstream csv;
  write_csv(ds, csv);
  return write_file(name, csv.str());
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted && ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = !quoted;
      } else if (ch == ',' && !quoted) {
        cells.emplace_back();
      } else {
        cells.back() += ch;
      }
    }
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

// The cells the CLI must print for one wire stats object.
std::vector<std::string> wire_cells(const Json& stats) {
  std::vector<std::string> cells = {std::to_string(stats["count"].get<std::size_t>())};
  if (!stats["available"].get<bool>()) {
    cells.resize(stats["cuts"].size() + 5, "-");
    return cells;
  }
  auto text = [](const Json& v) { return wire::format_real(v.get<double>()); };
  cells.push_back(text(stats["min"]));
  for (const auto& v : stats["percentiles"]) cells.push_back(text(v));
  cells.push_back(text(stats["mean"]));
  cells.push_back(text(stats["max"]));
  cells.push_back(text(stats["range"]));
  return cells;
}

const char* kToy =
    "FileSystem,BlockSize,throughput\n"
    "ext2,1024,10\n"
    "ext3,2048,20\n"
    "ext4,1024,30\n"
    "xfs,4096,40\n";

}  // namespace

TEST(CliSummarize, ToyTable) {
  const auto csv = write_file("toy.csv", kToy);
  const auto r = ice_cli({"summarize", "--csv", csv, "--target", "throughput", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0], "parameter,level,enabled,selected,count,min,p5,p25,p50,p75,p95,mean,max,range");
  EXPECT_EQ(rows[1], "FileSystem,ext2,yes,yes,1,10,10,10,10,10,10,10,10,0");
  EXPECT_EQ(rows[5], "BlockSize,1024,yes,yes,2,10,10,10,10,30,30,20,30,20");
  EXPECT_EQ(rows[7], "BlockSize,4096,yes,yes,1,40,40,40,40,40,40,40,40,0");

  const auto text = ice_cli({"summarize", "--csv", csv, "--target", "throughput", "--cuts", "50"});
  ASSERT_EQ(text.code, 0);
  EXPECT_EQ(lines(text.out)[0],
            "parameter   level  enabled  selected  count  min  p50  mean  max  range");
  EXPECT_EQ(lines(text.out)[1],
            "FileSystem  ext2   yes      yes       1      10   10   10    10   0");
}

TEST(CliSummarize, CellsMatchServiceWire) {
  const auto& ds = generate_synthetic(fixture::storage_spec(5400), 4).dataset;
  const auto csv = write_dataset("storage.csv", ds);
  service::Service svc;
  std::ostringstream body;
  write_csv(ds, body);
  const std::string id = svc.create_dataset(body.str(), "throughput")["dataset_id"];
  const std::string sid = svc.create_session({{"dataset_id", id}})["session_id"];

  const auto r = ice_cli({"summarize", "--csv", csv, "--target", "throughput", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  std::size_t row = 1;
  const auto explorer = svc.get_explorer(sid);
  for (const auto& param : explorer["parameters"]) {
    for (const auto& bar : param["levels"]) {
      ASSERT_LT(row, rows.size());
      EXPECT_EQ(rows[row][1], bar["level"]);
      std::vector<std::string> got(rows[row].begin() + 4, rows[row].end());
      EXPECT_EQ(got, wire_cells(bar["stats"])) << "row " << row;
      ++row;
    }
  }
  EXPECT_EQ(row, rows.size());

  const std::string expr = "Workload=dbsrvr;FileSystem=xfs,ext4;Device=hdd";
  const auto view = svc.apply_filter(sid, {{"expression", expr}});
  const auto f = ice_cli({"filter", "--csv", csv, "--target", "throughput", "-e", expr,
                          "--format", "csv"});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto frows = csv_rows(f.out);
  std::vector<std::string> agg(frows[1].begin() + 1, frows[1].end());
  EXPECT_EQ(agg, wire_cells(view["aggregate"]["stats"]));
  row = 3;
  for (const auto& param : view["explorer"]["parameters"]) {
    for (const auto& bar : param["levels"]) {
      std::vector<std::string> got(frows[row].begin() + 4, frows[row].end());
      EXPECT_EQ(got, wire_cells(bar["stats"])) << "row " << row;
      EXPECT_EQ(frows[row][3], bar["selected"].get<bool>() ? "yes" : "no");
      ++row;
    }
  }
}

TEST(CliFilter, EmptySelectionPrintsDashes) {
  const auto csv = write_file("toy.csv", kToy);
  const auto r = ice_cli({"filter", "--csv", csv, "--target", "throughput", "-e",
                          "FileSystem=ext2;BlockSize=4096", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out)[1], "FileSystem=ext2;BlockSize=4096,0,-,-,-,-,-,-,-,-,-");
}

TEST(CliSamplePlan, SmallDatasetUsesEverything) {
  std::mt19937_64 rng(2);
  const auto csv = write_dataset("small.csv", oracle::random_dataset(rng, 4, 2, 6, 19999));
  const auto r = ice_cli({"sample-plan", "--csv", csv, "--target", "y"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = lines(r.out);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0], "fraction 1.0 (full_small_dataset)");
  EXPECT_EQ(out[1], "rows 19999 of 19999");
}

TEST(CliSamplePlan, LadderTrialsAreListed) {
  const auto gen = generate_synthetic(fixture::storage_spec(100000), 1);
  const auto csv = write_dataset("large.csv", gen.dataset);
  const auto r = ice_cli({"sample-plan", "--csv", csv, "--target", "throughput", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = lines(r.out);
  EXPECT_EQ(out[0], "fraction 0.2 (threshold_met)");
  EXPECT_EQ(out[1], "rows 20000 of 100000");
  EXPECT_EQ(out[4].substr(0, 8), "fraction");
  EXPECT_EQ(out.size(), 5u + 4u);
  EXPECT_NE(out.back().find("yes"), std::string::npos);
}

TEST(CliSynth, ExhaustiveOptimizeFindsSidecarOptimum) {
  const auto spec = write_file("spec.txt",
                               "target = throughput\n"
                               "rows = 720\n"
                               "repeat_runs = 2\n"
                               "noise_sd = 0\n"
                               "base = 100\n"
                               "# effects\n"
                               "param.Workload.levels = db, file, mail, web\n"
                               "param.Workload.effects = 8, 0, -2, 3\n"
                               "param.FileSystem.levels = ext2, ext3, ext4, xfs, btrfs\n"
                               "param.FileSystem.effects = -1, 0, 2, 5, 1\n"
                               "param.BlockSize.levels = 1024, 2048, 4096\n"
                               "param.BlockSize.magnitude = 4\n"
                               "param.Device.levels = hdd, ssd, nvme\n"
                               "param.Device.effects = 0, 6, 6\n");
  const auto out = tmp_path("synth.csv");
  auto r = ice_cli({"synth", "--spec", spec, "--seed", "3", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).back(),
            "best Workload=db;FileSystem=xfs;BlockSize=4096;Device=ssd value 123");

  std::ifstream side(out + ".truth.json");
  const auto truth = Json::parse(side);
  EXPECT_EQ(truth["rows"], 720);
  EXPECT_EQ(truth["importance_ranking"][0], "Workload");
  std::string best;
  for (const auto& [k, v] : truth["best_configuration"].items()) {
    best += (best.empty() ? "" : ";") + k + "=" + v.get<std::string>();
  }

  r = ice_cli({"optimize", "--csv", out, "--target", "throughput", "--algorithm", "exhaustive"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto o = lines(r.out);
  EXPECT_EQ(o.back(), "best " + best + " value " +
                          wire::format_real(truth["best_value"].get<double>()));
  EXPECT_EQ(o[o.size() - 3], "algorithm exhaustive objective maximize_mean evaluations 180");

  r = ice_cli({"optimize", "--csv", out, "--target", "throughput", "--algorithm", "annealing",
               "--budget", "30", "--seed", "1", "--format", "csv", "--every", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = lines(r.out);
  EXPECT_EQ(a[0], "step,configuration,value,accepted,best_so_far,optimum");
  EXPECT_EQ(a.size(), 1u + 30u + 1u + 3u);
  EXPECT_EQ(a[a.size() - 2], "optimum 123");
}

TEST(CliImportance, RankingAndRecoveryTables) {
  const auto gen = generate_synthetic(fixture::storage_spec(5400, 5), 8);
  const auto csv = write_dataset("imp.csv", gen.dataset);
  const auto r = ice_cli({"importance", "--csv", csv, "--target", "throughput",
                          "--fractions", "0.05,1", "--repeats", "20", "--format", "csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto out = lines(r.out);
  EXPECT_EQ(out[0], "rank,parameter,score");
  EXPECT_EQ(out[1].substr(0, 11), "1,Workload,");
  EXPECT_EQ(out[8], "fraction,rows,top1,top2,top3");
  EXPECT_EQ(out[9].substr(0, 9), "0.05,270,");
  EXPECT_EQ(out[10], "1.0,5400,1,1,1");
}

TEST(CliProvenance, StepsAndRollback) {
  const auto gen = generate_synthetic(fixture::storage_spec(5400), 4);
  const auto csv = write_dataset("prov.csv", gen.dataset);
  std::vector<std::string> args = {"provenance", "--csv", csv, "--target", "throughput",
                                   "--format", "csv"};
  for (const auto& s : fixture::walkthrough_steps()) {
    args.push_back("--step");
    args.push_back(s);
  }
  args.insert(args.end(), {"--step", "@4", "--step", "IOScheduler=noop"});
  const auto r = ice_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1u + 7u);
  EXPECT_EQ(rows[1][1], "All data");
  EXPECT_EQ(rows[2][1], "Workload:dbsrvr");
  EXPECT_EQ(rows[6][5], "4");
  EXPECT_EQ(rows[6][3], rows[4][3]);
  EXPECT_EQ(rows[6][4], rows[4][4]);
  EXPECT_EQ(rows[7][1], "IOScheduler:noop");
}

TEST(CliErrors, SingleLineAndNonzeroExit) {
  const auto csv = write_file("toy.csv", kToy);
  auto expect_error = [](const Result& r, int code, const std::string& prefix) {
    EXPECT_EQ(r.code, code);
    EXPECT_TRUE(r.out.empty()) << r.out;
    EXPECT_EQ(r.err.rfind(prefix, 0), 0u) << r.err;
    EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  };
  expect_error(ice_cli({"summarize", "--csv", csv, "--target", "latency"}), 1, "error[invalid_data]");
  expect_error(ice_cli({"filter", "--csv", csv, "--target", "throughput", "-e", "Colour=red"}), 1,
               "error[unknown_name]");
  expect_error(ice_cli({"filter", "--csv", csv, "--target", "throughput", "-e", "FileSystem"}), 1,
               "error[");
  expect_error(ice_cli({"summarize", "--csv", tmp_path("missing.csv"), "--target", "t"}), 2,
               "error[usage]");
  expect_error(ice_cli({"summarize", "--target", "t"}), 2, "error[usage]");
  expect_error(ice_cli({"frobnicate"}), 2, "error[usage]");
  expect_error(ice_cli({"optimize", "--csv", csv, "--target", "throughput", "--algorithm", "genetic"}),
               2, "error[usage]");
  expect_error(ice_cli({"optimize", "--csv", csv, "--target", "throughput", "--filter", "FileSystem="}),
               1, "error[search_failed]");
  expect_error(ice_cli({"summarize", "--csv", csv, "--target", "throughput", "--cuts", "0"}), 1,
               "error[invalid_argument]");

  const auto bad = write_file("bad.csv", "A,t\nx,1\ny,\"2\nx,3\n");
  const auto r = ice_cli({"summarize", "--csv", bad, "--target", "t"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  const auto help = ice_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("summarize"), std::string::npos);
}
