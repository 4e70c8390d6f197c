#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "ribound/cli.hpp"
#include "ribound/stats.hpp"

using namespace ribound;
using nlohmann::json;

namespace {

const std::string kData = std::string(RIBOUND_SOURCE_DIR) + "/data/";

std::string temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("ribound_test_" + name);
  std::ofstream(path) << content;
  return path.string();
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json without_runtime(const std::string& text) {
  json j = json::parse(text);
  j.erase("runtime");
  return j;
}

}  // namespace

TEST_CASE("ingest the bundled illustration") {
  const Dataset d = cli::ingest_csv(kData + "example16.csv");
  CHECK(d.size() == 16);
  CHECK(d.n_treated() == 8);
  CHECK(d.outcomes() == fixtures::kExample16Y);
  CHECK(diff_means(d.assignment(), Schedule::make(d.outcomes(), d.outcomes())) == doctest::Approx(1.13).epsilon(0.005));
}

TEST_CASE("ingest errors") {
  CHECK_ERRC(cli::ingest_csv(temp_file("header.csv", "id,w,y\n")), Errc::DegenerateDesign);
  CHECK_ERRC(cli::ingest_csv(temp_file("yesno.csv", "id,w,y\na,yes,1\nb,no,2\n")), Errc::ParseError);
  CHECK_ERRC(cli::ingest_csv(temp_file("num.csv", "id,w,y\na,1,abc\nb,0,2\n")), Errc::ParseError);
  CHECK_ERRC(cli::ingest_csv(temp_file("cols.csv", "id,w\na,1\n")), Errc::ParseError);
  CHECK_ERRC(cli::ingest_csv(temp_file("ragged.csv", "id,w,y\na,1\n")), Errc::ParseError);
  CHECK_ERRC(cli::ingest_csv("/nonexistent/file.csv"), Errc::FileNotFound);
  try {
    cli::ingest_csv(temp_file("where.csv", "id,w,y\na,1,1\nb,2,2\n"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    CHECK(std::string(e.what()).find("column 'w'") != std::string::npos);
  }
}

TEST_CASE("ingest blocks and column mapping") {
  const std::string blank = temp_file("blank.csv", "id,treat,out,block\na,1,1.5,\nb,0,2,\n");
  cli::ColumnMapping m;
  m.w = "treat";
  m.y = "out";
  const Dataset d = cli::ingest_csv(blank, m);
  CHECK_FALSE(d.has_blocks());
  CHECK(d[0].y == 1.5);
  const Dataset p = cli::ingest_csv(kData + "paired8.csv");
  CHECK(p.has_blocks());
  CHECK(p.blocks().size() == 8);
  CHECK(Design::from_dataset(p).enumeration_size() == 256u);
  CHECK_ERRC(cli::ingest_csv(temp_file("mixed.csv", "id,w,y,block\na,1,1,x\nb,0,2,\n")), Errc::MissingBlock);
  const std::string quoted = temp_file("quoted.csv", "id,w,y\n\"unit, one\",1,1\n\"two\",0,2\n");
  CHECK(cli::ingest_csv(quoted)[0].id == "unit, one");
}

TEST_CASE("test subcommand reproduces the illustration p-value") {
  const auto r = run_cli({"test", "--input", kData + "example16.csv", "--stat", "diff-means", "--null", "0",
                          "--direction", "non-superiority", "--mode", "exact"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema_version"] == cli::kSchemaVersion);
  CHECK(j["command"] == "test");
  CHECK(j["result"]["p_value"]["count"] == 522);
  CHECK(fixtures::three_decimals(j["result"]["p"].get<double>()) == 0.040);
  CHECK(j["config"]["statistic"] == "diff-means");
  CHECK(j.contains("version"));
  CHECK(j["runtime"].contains("timing_ms"));
}

TEST_CASE("per-unit null column and baseline variants") {
  for (const auto& [variant, count] :
       std::vector<std::pair<std::string, int>>{{"both", 349}, {"control-baseline", 451}, {"treated-baseline", 327}}) {
    const auto r = run_cli({"test", "--input", kData + "example16.csv", "--null-col", "tau_bound", "--impute", variant});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["result"]["p_value"]["count"] == count);
  }
}

TEST_CASE("non-EI statistic is refused for bounded nulls") {
  const auto r = run_cli({"test", "--input", kData + "example16.csv", "--stat", "welch-t", "--direction", "non-superiority"});
  CHECK(r.code == cli::kComputation);
  CHECK(r.err.find("NonEIStatistic") != std::string::npos);
  const auto sharp = run_cli({"test", "--input", kData + "example16.csv", "--stat", "welch-t", "--tail", "upper"});
  CHECK(sharp.code == 0);
}

TEST_CASE("exit codes") {
  CHECK(run_cli({}).code == cli::kUsage);
  CHECK(run_cli({"frobnicate"}).code == cli::kUsage);
  CHECK(run_cli({"test", "--input", kData + "example16.csv", "--draws", "10"}).code == cli::kUsage);
  CHECK(run_cli({"test", "--input", kData + "example16.csv", "--alpha", "2"}).code == cli::kUsage);
  CHECK(run_cli({"test", "--input", kData + "example16.csv", "--stat", "bogus"}).code == cli::kUsage);
  CHECK(run_cli({"test", "--input", kData + "missing.csv"}).code == cli::kData);
  CHECK(run_cli({"test", "--input", kData + "example16.csv", "--cap", "100"}).code == cli::kComputation);
  CHECK(run_cli({"test", "--input", kData + "example16.csv", "--design", "paired"}).code == cli::kData);
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("help documents an example for every subcommand") {
  for (const std::string sub : {"test", "ci", "simultaneous", "monotonicity", "sim", "oracle"}) {
    const auto r = run_cli({sub, "--help"});
    CHECK(r.code == 0);
    CHECK_MESSAGE(r.out.find("ribound " + sub) != std::string::npos, sub);
  }
}

TEST_CASE("output is byte-identical apart from runtime and independent of threads") {
  const std::vector<std::string> base = {"test", "--input", kData + "example16.csv", "--mode", "mc", "--draws", "5000",
                                         "--seed", "3", "--stat", "stephenson:4"};
  auto a = base, b = base;
  a.insert(a.end(), {"--threads", "1"});
  b.insert(b.end(), {"--threads", "4"});
  const auto r1 = run_cli(a), r2 = run_cli(a), r3 = run_cli(b);
  REQUIRE(r1.code == 0);
  CHECK(without_runtime(r1.out).dump() == without_runtime(r2.out).dump());
  CHECK(without_runtime(r1.out).dump() == without_runtime(r3.out).dump());
}

TEST_CASE("ci subcommand on the paired fixture") {
  const auto r = run_cli({"ci", "--input", kData + "paired8.csv", "--target", "max", "--alpha", "0.10", "--stat",
                          "stephenson:6", "--mode", "exact"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["result"]["bound"].is_number());
  CHECK(j["result"]["trace"]["grid"].size() == 101);
  CHECK(j["result"]["outer"] == "inf");
  CHECK(j["config"]["design"] == "paired(n=16, blocks=8)");
  const auto ranged = run_cli({"ci", "--input", kData + "paired8.csv", "--range-lo", "0", "--range-hi", "100"});
  REQUIRE(ranged.code == 0);
  CHECK(json::parse(ranged.out)["result"]["outer"] == 100.0 - 27.0);
}

TEST_CASE("simultaneous, monotonicity, export, sim and oracle subcommands") {
  const auto s = run_cli({"simultaneous", "--input", kData + "paired8.csv"});
  REQUIRE(s.code == 0);
  CHECK(json::parse(s.out)["result"]["p_up"]["total"] == 256);

  const auto m = run_cli({"monotonicity", "--input", kData + "example16.csv", "--instrument", "increases"});
  REQUIRE(m.code == 0);
  CHECK(json::parse(m.out)["result"]["hypothesis"] == "non-inferiority");

  const std::string dist = (std::filesystem::temp_directory_path() / "ribound_dist.csv").string();
  REQUIRE(run_cli({"test", "--input", kData + "example16.csv", "--stat", "rank-sum", "--export-dist", dist}).code == 0);
  std::ifstream f(dist);
  std::string header;
  std::getline(f, header);
  CHECK(header == "value,count");
  long total = 0;
  std::string line;
  while (std::getline(f, line)) total += std::stol(line.substr(line.find(',') + 1));
  CHECK(total == 12870);

  const std::string scen = temp_file("scen.txt", "kind = conservativeness\nreplications = 20\nseed = 4\n");
  const auto sim = run_cli({"sim", "--scenario", scen});
  REQUIRE(sim.code == 0);
  CHECK(json::parse(sim.out)["result"]["entries"][0]["replications"] == 20);
  CHECK(run_cli({"sim"}).code == cli::kUsage);

  const auto o = run_cli({"oracle", "--check", "ei", "--stat", "welch-t", "--trials", "100"});
  REQUIRE(o.code == 0);
  const json oj = json::parse(o.out);
  CHECK(oj["result"]["violations"].get<int>() > 0);
  CHECK(oj["result"]["witness"].is_object());
  const auto st = run_cli({"oracle", "--check", "stephenson", "--trials", "30"});
  CHECK(json::parse(st.out)["result"]["agree"] == true);
}
