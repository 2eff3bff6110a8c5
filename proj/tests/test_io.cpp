#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mixest/error.hpp"
#include "mixest/io.hpp"

using namespace mixest;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mixest_test_io";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("sample files") {
  const auto p = scratch("ok.txt");
  std::ofstream(p) << "# header\n1.5\n\n  -2e-3 \n3\n";
  CHECK(read_sample(p).values == std::vector<double>{1.5, -2e-3, 3.0});

  const auto bad = scratch("bad.txt");
  std::ofstream(bad) << "1\n2\nabc\n";
  try {
    read_sample(bad);
    FAIL("expected an error");
  } catch (const InputError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.txt:3") != std::string::npos);
  }
  try {
    read_sample(scratch("missing.txt"));
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("missing.txt") != std::string::npos);
  }
  const auto empty = scratch("empty.txt");
  std::ofstream(empty) << "# nothing\n";
  CHECK_THROWS_AS(read_sample(empty), InputError);
}

TEST_CASE("doubles round-trip through text") {
  for (double v : {0.1, 1.0 / 3.0, -1e-300, 6.02214076e23}) CHECK(std::stod(format_double(v)) == v);
  Sample s{{0.1, 2.0 / 3.0, -7.25}, 0};
  const auto p = scratch("round.txt");
  write_file_atomic(p, format_sample(s));
  CHECK(read_sample(p).values == s.values);
}

TEST_CASE("measure JSON") {
  const MixingMeasure g({{0.0, 1.0}, {2.0, 0.5}}, {0.25, 0.75});
  CHECK(measure_from_json(to_json(g)) == g);
  const auto loose = Json::parse(R"({"atoms": [[1.0], [0.0]], "weights": [0.3, 0.7000001]})");
  const auto c = measure_from_json(loose);
  CHECK(c.atom(0)[0] == 0.0);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms": [[1.0]]})")), InputError);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms": [[1.0]], "weights": [0.5]})")), InputError);
}

TEST_CASE("atomic writes replace files whole") {
  const auto p = scratch("atomic.txt");
  write_file_atomic(p, "first\n");
  write_file_atomic(p, "second\n");
  std::ifstream in(p);
  std::string all((std::istreambuf_iterator<char>(in)), {});
  CHECK(all == "second\n");
  for (const auto& e : fs::directory_iterator(p.parent_path()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
  // Parent "directory" is a regular file.
  CHECK_THROWS(write_file_atomic(p / "y.txt", "z"));
}

TEST_CASE("grid export") {
  const QuadratureGrid g(0.0, 1.0, 257);
  const auto csv = grid_csv(g);
  CHECK(csv.rfind("x,weight\n0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 258);
}
