#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace std;
namespace fs = std::filesystem;

namespace {

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run_cli(const std::string& args) {
  fs::path out = fs::temp_directory_path() / "preagg_cli_out.txt";
  std::string command = std::string(PREAGG_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
  int raw = std::system(command.c_str());
  CommandResult result;
  result.status = WEXITSTATUS(raw);
  std::ifstream in(out);
  std::stringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

}  // namespace

TEST_CASE("cli end to end: gen, ingest, summarize, query") {
  fs::path dir = fs::temp_directory_path() / "preagg_cli_e2e";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string data = (dir / "data.csv").string();
  std::string seg = (dir / "seg").string();
  std::string sum = (dir / "sum").string();

  auto gen = run_cli("gen --kind uniform --n 20000 --out " + data + " --seed 5");
  CHECK(gen.status == 0);

  auto ingest = run_cli("ingest --input " + data + " --store " + seg +
                        " --mode interval --function rank --tg 625 --kt 32 --seed 5");
  CHECK(ingest.status == 0);
  CHECK(ingest.output.find("32 segments") != std::string::npos);

  auto summarize =
      run_cli("summarize --store " + seg + " --out " + sum + " --method coop --s 16 --seed 5");
  CHECK(summarize.status == 0);
  CHECK(summarize.output.find("coop-quant") != std::string::npos);

  // p99 over the first 16 segments of U[0,1) data should land near 0.99
  auto query = run_cli("query --store " + sum +
                       " --type interval --function quantile --q 0.99 --t0 0 --t1 10000 "
                       "--accumulator exact --machine");
  CHECK(query.status == 0);
  auto pos = query.output.find("\"value\":\"");
  REQUIRE(pos != std::string::npos);
  double value = std::stod(query.output.substr(pos + 9));
  // truth is ~0.99; 16 summaries of size 16 leave h = 625/16 per segment
  CHECK(std::abs(value - 0.99) < 0.05);

  // frequency/rank point query path
  auto rank = run_cli("query --store " + sum +
                      " --type interval --function rank --x 0.5 --t0 0 --t1 10000 --machine");
  CHECK(rank.status == 0);
  CHECK(rank.output.find("\"estimate\":") != std::string::npos);

  fs::remove_all(dir);
}

TEST_CASE("cli reports a missing store") {
  auto result = run_cli("query --store /nonexistent/store --type interval --function rank "
                        "--x 1 --t0 0 --t1 10");
  CHECK(result.status != 0);
  CHECK(result.output.find("store not found") != std::string::npos);
}

TEST_CASE("cli rejects an infeasible cube budget") {
  fs::path dir = fs::temp_directory_path() / "preagg_cli_budget";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string data = (dir / "cube.csv").string();
  {
    std::ofstream out(data);
    out << "value,d0\n";
    for (int i = 0; i < 100; ++i) out << i << "," << (i % 5) << "\n";
  }
  std::string seg = (dir / "seg").string();
  auto ingest = run_cli("ingest --input " + data + " --store " + seg +
                        " --mode cube --function frequency --dims d0");
  CHECK(ingest.status == 0);
  auto summarize = run_cli("summarize --store " + seg + " --out " + (dir / "sum").string() +
                           " --method sb --s-total 3 --s-min 1 --seed 2");
  CHECK(summarize.status != 0);
  CHECK(summarize.output.find("infeasible budget") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli cube summarize and filtered query") {
  fs::path dir = fs::temp_directory_path() / "preagg_cli_cube";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::string data = (dir / "cube.csv").string();
  {
    std::ofstream out(data);
    out << "value,region,kind\n";
    for (int i = 0; i < 2000; ++i) {
      out << (i % 17) << "," << (i % 3 == 0 ? "east" : "west") << ","
          << (i % 2 == 0 ? "tcp" : "udp") << "\n";
    }
  }
  std::string seg = (dir / "seg").string();
  std::string sum = (dir / "sum").string();
  CHECK(run_cli("ingest --input " + data + " --store " + seg +
                " --mode cube --function frequency --dims region,kind")
            .status == 0);
  CHECK(run_cli("summarize --store " + seg + " --out " + sum +
                " --method sb --s-total 40 --s-min 4 --seed 3 --report " +
                (dir / "alloc.csv").string())
            .status == 0);
  CHECK(fs::exists(dir / "alloc.csv"));

  auto query = run_cli("query --store " + sum +
                       " --type cube --function frequency --filter region=east --x 0 --machine");
  CHECK(query.status == 0);
  CHECK(query.output.find("\"estimate\":") != std::string::npos);

  auto bad = run_cli("query --store " + sum +
                     " --type cube --function frequency --filter nowhere=1 --x 0");
  CHECK(bad.status != 0);
  CHECK(bad.output.find("unknown dimension") != std::string::npos);
  fs::remove_all(dir);
}
