#include "t2v/cli.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Output {
  int status;
  std::string out;
};

Output run(const std::string& args) {
  const auto cmd = fmt::format("\"{}\" {} 2>/dev/null", T2V_BINARY, args);
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p);
  std::string out;
  std::array<char, 4096> buf{};
  while (const auto n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  char name[] = "t2v";
  char* argv[] = {name, nullptr};
  CHECK(t2v::cli::run(1, argv) == 2);
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("ztest --hits1 1 --n1 2 --hits2 1 --n2 2 --bogus").status == 2);
  CHECK(run("embed-soc --matrix /nonexistent --subreddits /nonexistent --out x").status == 2);
  CHECK(run("--help").status == 0);
}

TEST_CASE("runtime errors exit with 1") { CHECK(run("ztest --hits1 5 --n1 3 --hits2 1 --n2 2").status == 1); }

TEST_CASE("ztest prints the pooled statistic") {
  const auto r = run("ztest --hits1 90 --n1 100 --hits2 50 --n2 100");
  CHECK(r.status == 0);
  CHECK(r.out.find("z=6.172134") != std::string::npos);
  CHECK(r.out.find("significant=true") != std::string::npos);
}

TEST_CASE("config files fill options and flags win") {
  const auto dir = fs::temp_directory_path() / "t2v_cli_config";
  fs::create_directories(dir);
  const auto cfg = dir / "run.toml";
  std::ofstream(cfg) << "[ztest]\nhits1 = 10\nn1 = 100\nhits2 = 50\nn2 = 100\n";
  const auto from_file = run(fmt::format("--config {} ztest", cfg.string()));
  CHECK(from_file.status == 0);
  CHECK(from_file.out.find("z=-6.") != std::string::npos);
  const auto overridden = run(fmt::format("--config {} ztest --hits1 90", cfg.string()));
  CHECK(overridden.out.find("z=6.172134") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("the bundled mini-dataset is what the generator writes") {
  const auto dir = fs::temp_directory_path() / "t2v_mini_regen";
  fs::remove_all(dir);
  REQUIRE(std::system(fmt::format("\"{}\" --out {} > /dev/null", T2V_MAKE_MINI, dir.string()).c_str()) == 0);
  std::size_t files = 0, bytes = 0;
  for (const auto& e : fs::directory_iterator(T2V_MINI_DIR)) {
    CHECK_MESSAGE(slurp(e.path()) == slurp(dir / e.path().filename()), e.path().filename().string());
    ++files;
    bytes += fs::file_size(e.path());
  }
  CHECK(files == 11);
  CHECK(bytes <= 1000000);
  fs::remove_all(dir);
}
