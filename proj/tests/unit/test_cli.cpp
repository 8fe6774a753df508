#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = LIOCELL_SOURCE_DIR;

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun cli(const std::string& args, const std::string& env = "") {
  std::string cmd = env + " " + std::string(LIOCELL_CLI) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string program(const std::string& name) { return (kRoot / "programs" / name).string(); }

fs::path scratch(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("liocell_cli_" + name);
  std::ofstream(p) << text;
  return p;
}

bool is_label(const json& j) { return j.is_string() && !j.get<std::string>().empty(); }

// The run --json schema: {outcome, lcur, value, steps, mu_fi:[...], mu_fs:[...]}.
void expect_run_schema(const json& j) {
  ASSERT_TRUE(j.is_object());
  ASSERT_TRUE(j.contains("outcome") && j["outcome"].is_string());
  const std::string o = j["outcome"];
  EXPECT_TRUE(o == "Value" || o == "Diverged" || o == "MonitorError" || o == "FuelExhausted");
  EXPECT_TRUE(is_label(j["lcur"]));
  EXPECT_TRUE(o == "Value" ? j["value"].is_string() : j["value"].is_null());
  EXPECT_TRUE(j["steps"].is_number_unsigned());
  ASSERT_TRUE(j["mu_fi"].is_array());
  ASSERT_TRUE(j["mu_fs"].is_array());
  for (const auto& c : j["mu_fi"]) {
    EXPECT_EQ(c["addr"].get<std::string>().rfind("fi:", 0), 0u);
    EXPECT_TRUE(is_label(c["label"]));
    EXPECT_TRUE(c["value"].is_string());
  }
  for (const auto& c : j["mu_fs"]) {
    EXPECT_EQ(c["addr"].get<std::string>().rfind("fs:", 0), 0u);
    EXPECT_TRUE(is_label(c["label"]));
    EXPECT_TRUE(is_label(c["label_on_label"]));
    EXPECT_TRUE(c["value"].is_string());
  }
  if (o == "MonitorError") {
    EXPECT_TRUE(j["error"]["kind"].is_string());
    EXPECT_TRUE(j["error"]["rule"].is_string());
  }
}

}  // namespace

TEST(Cli, RunPermissiveness) {
  CliRun r = cli("run " + program("permissiveness.lio"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "Value () lcur=H");
}

TEST(Cli, JsonSchemaOnEveryOutcomeKind) {
  CliRun ok = cli("run --json " + program("permissiveness.lio"));
  EXPECT_EQ(ok.code, 0);
  expect_run_schema(json::parse(ok.out));
  EXPECT_EQ(json::parse(ok.out)["mu_fs"][0]["addr"], "fs:1");

  auto err = scratch("err.lio", "(do (x <- (label H (bool true))) (v <- (unlabel (var x))) (label L (var v)))");
  CliRun e = cli("run --json --calculus fi " + err.string());
  EXPECT_EQ(e.code, 1);
  expect_run_schema(json::parse(e.out));
  EXPECT_EQ(json::parse(e.out)["outcome"], "MonitorError");

  CliRun d = cli("run --json " + program("attacks/intro.lio"));
  EXPECT_EQ(d.code, 1);
  expect_run_schema(json::parse(d.out));
  EXPECT_EQ(json::parse(d.out)["outcome"], "Diverged");

  CliRun f = cli("run --json " + program("permissiveness.lio"), "LIOCELL_FUEL=3");
  EXPECT_EQ(f.code, 1);
  expect_run_schema(json::parse(f.out));
  EXPECT_EQ(json::parse(f.out)["outcome"], "FuelExhausted");
}

TEST(Cli, ExitCodesForCorpusPrograms) {
  EXPECT_EQ(cli("run " + program("permissiveness.lio")).code, 0);
  for (const char* a : {"intro", "labelof", "nolabelof"}) {
    std::string f = program(std::string("attacks/") + a + ".lio");
    CliRun naive = cli("run --mode naive " + f);
    EXPECT_EQ(naive.code, 0) << a;
    EXPECT_EQ(naive.out.substr(0, naive.out.find('\n')), "Value True lcur=L") << a;
    EXPECT_EQ(cli("run " + f).code, 1) << a;
  }
  CliRun fork = cli("run --mode naive " + program("attacks/fork.lio"));
  EXPECT_EQ(fork.code, 0);
  EXPECT_NE(fork.out.find("thread 0 done True lcur=L"), std::string::npos);
}

TEST(Cli, UsageAndParseErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("run /nonexistent/file.lio").code, 2);
  EXPECT_EQ(cli("run " + scratch("bad.lio", "(return").string()).code, 2);
  EXPECT_EQ(cli("run --mode naive --calculus fi " + program("permissiveness.lio")).code, 2);
  EXPECT_EQ(cli("run --lattice " + program("lattices/broken_no_join.lat") + " " +
                program("permissiveness.lio"))
                .code,
            2);
  EXPECT_EQ(cli("check-ni --level H --trials 1").code, 2);
}

TEST(Cli, TraceTypecheckEmbed) {
  CliRun t = cli("trace " + program("permissiveness.lio"));
  EXPECT_EQ(t.code, 0);
  EXPECT_EQ(t.out.rfind("step=1 rule=newRef-FS lcur=L term=", 0), 0u);
  EXPECT_NE(t.out.find("rule=writeRef-FS "), std::string::npos);

  CliRun ty = cli("typecheck " + program("permissiveness.lio"));
  EXPECT_EQ(ty.code, 0);
  EXPECT_EQ(ty.out, "(LIO ())\n");
  EXPECT_EQ(cli("typecheck " + scratch("ill.lio", "(if (unit) (return (unit)) (return (unit)))").string())
                .code,
            1);

  CliRun e = cli("embed --json " + program("permissiveness.lio"));
  EXPECT_EQ(e.code, 0);
  json j = json::parse(e.out);
  EXPECT_TRUE(j["lcur"].is_string());
  EXPECT_TRUE(j["mu_fi"].is_array());
  EXPECT_EQ(j["program"].get<std::string>().find("fs "), std::string::npos);
}

TEST(Cli, AttacksAndCompare) {
  CliRun naive = cli("attacks --mode naive");
  EXPECT_EQ(naive.code, 3);
  std::size_t leaks = 0;
  for (std::size_t p = 0; (p = naive.out.find(" LEAK ", p)) != std::string::npos; ++p) ++leaks;
  EXPECT_EQ(leaks, 4u);
  EXPECT_EQ(cli("attacks --mode secure").code, 0);
  EXPECT_EQ(cli("attacks").code, 0);

  CliRun c = cli("compare --json " + program("label_change_policies.imp"));
  EXPECT_EQ(c.code, 0);
  json rows = json::parse(c.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1]["pu"], "Reject");
  EXPECT_EQ(rows[2]["pu"], "Accept [1]");
  EXPECT_EQ(rows[3]["fs_au"], "Accept [1]");
}

TEST(Cli, CheckNi) {
  CliRun secure = cli("check-ni --trials 40 --seed 5");
  EXPECT_EQ(secure.code, 0);
  json j = json::parse(secure.out);
  EXPECT_EQ(j["counterexamples"], 0);
  EXPECT_EQ(j["pass"].get<int>() + j["inconclusive"].get<int>(), 40);

  CliRun naive = cli("check-ni --mode naive --templates --trials 40");
  EXPECT_EQ(naive.code, 3);
  json n = json::parse(naive.out);
  EXPECT_GT(n["counterexamples"].get<int>(), 0);
  EXPECT_TRUE(n["examples"][0]["shrunk"].is_string());

  EXPECT_EQ(cli("check-ni --property tsni --trials 20").code, 0);
}
