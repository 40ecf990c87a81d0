#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "namdkit/error.hpp"
#include "namdkit/io/fetch.hpp"

using namespace namdkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("namdkit-fetch-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("fetch") {
  TEST_CASE("ID syntax") {
    CHECK(is_valid_pdb_id("1ubq"));
    CHECK(is_valid_pdb_id("1UBQ"));
    CHECK(is_valid_pdb_id("4HHB"));
    CHECK_FALSE(is_valid_pdb_id("zz"));
    CHECK_FALSE(is_valid_pdb_id("ubq1"));
    CHECK_FALSE(is_valid_pdb_id("1ub-"));
    CHECK_FALSE(is_valid_pdb_id("1ubqx"));
    CHECK(pdb_download_url("1ubq") == "https://files.rcsb.org/download/1UBQ.pdb");
  }

  TEST_CASE("invalid ID is rejected before any transport call") {
    TempDir dir;
    int calls = 0;
    HttpTransport t = [&](const std::string&) {
      ++calls;
      return HttpResponse{200, ""};
    };
    CHECK_THROWS_AS(fetch_structure("zz", dir.path, t), DomainError);
    CHECK(calls == 0);
  }

  TEST_CASE("cache hit makes no network call") {
    TempDir dir;
    const auto body = fixtures::peptide_pdb(2);
    std::ofstream(dir.path / "1ubq.pdb", std::ios::binary) << body;
    int calls = 0;
    HttpTransport t = [&](const std::string&) -> HttpResponse {
      ++calls;
      throw FetchError("network disabled");
    };
    const auto s = fetch_structure("1UBQ", dir.path, t);
    CHECK(calls == 0);
    CHECK(s.size() == 12);
    CHECK(s.source_label == "1UBQ");
  }

  TEST_CASE("downloaded body is cached byte for byte") {
    TempDir dir;
    const auto body = fixtures::peptide_pdb(3) + "\r\nREMARK trailing bytes \x01\n";
    std::string requested;
    HttpTransport t = [&](const std::string& url) {
      requested = url;
      return HttpResponse{200, body};
    };
    const auto s = fetch_structure("1l2y", dir.path, t);
    CHECK(requested == "https://files.rcsb.org/download/1L2Y.pdb");
    CHECK(slurp(dir.path / "1l2y.pdb") == body);
    CHECK(s.size() == 18);
    int calls = 0;
    HttpTransport counting = [&](const std::string&) {
      ++calls;
      return HttpResponse{500, ""};
    };
    (void)fetch_structure("1L2Y", dir.path, counting);
    CHECK(calls == 0);
  }

  TEST_CASE("HTTP errors") {
    TempDir dir;
    HttpTransport missing = [](const std::string&) { return HttpResponse{404, "not found"}; };
    CHECK_THROWS_AS(fetch_structure("9zzz", dir.path, missing), NotFoundError);
    HttpTransport broken = [](const std::string&) { return HttpResponse{503, ""}; };
    CHECK_THROWS_AS(fetch_structure("9zzz", dir.path, broken), FetchError);
    HttpTransport offline = [](const std::string& url) -> HttpResponse { throw FetchError("GET " + url + " failed"); };
    try {
      (void)fetch_structure("9zzz", dir.path, offline);
      FAIL("expected FetchError");
    } catch (const FetchError& e) {
      CHECK(std::string(e.what()).find("https://files.rcsb.org/download/9ZZZ.pdb") != std::string::npos);
    }
    CHECK_FALSE(fs::exists(dir.path / "9zzz.pdb"));
  }
}
