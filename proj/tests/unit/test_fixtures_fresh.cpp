#include <doctest.h>

#include "microcorpus.hpp"

using namespace tbgen;
using namespace tbgen::testing;
namespace fs = std::filesystem;

namespace tbgen::testing {
int record_microcorpus_fixtures(const fs::path& out);
}

namespace {

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_text_file(e.path());
  }
  return files;
}

}  // namespace

TEST_SUITE("fixtures") {

TEST_CASE("shipped micro-corpus fixtures match a fresh recording") {
  TempDir dir;
  int n = record_microcorpus_fixtures(dir.path());
  auto fresh = tree(dir.path());
  auto shipped = tree(microcorpus_fixture_dir());
  CHECK(n > 0);
  REQUIRE(fresh.size() == shipped.size());
  for (const auto& [name, text] : fresh) {
    INFO(name);
    REQUIRE(shipped.count(name) == 1);
    CHECK(shipped.at(name) == text);
  }
}

}
