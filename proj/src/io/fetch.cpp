#include "namdkit/io/fetch.hpp"

#include <cctype>
#include <fstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "namdkit/error.hpp"
#include "../util.hpp"

namespace namdkit {
namespace {

constexpr std::string_view kArchiveHost = "https://files.rcsb.org";

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

bool is_valid_pdb_id(std::string_view id) {
  if (id.size() != 4 || !std::isdigit(static_cast<unsigned char>(id[0]))) return false;
  for (char c : id)
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string pdb_download_url(std::string_view id) {
  return std::string(kArchiveHost) + "/download/" + upper(id) + ".pdb";
}

std::filesystem::path pdb_cache_path(const std::filesystem::path& cache_dir, std::string_view id) {
  return cache_dir / (lower(id) + ".pdb");
}

HttpTransport https_transport() {
  return [](const std::string& url) -> HttpResponse {
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    const std::string host = url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
    httplib::Client client(host);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(path);
    if (!res) throw FetchError("GET " + url + " failed: " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
  };
}

std::filesystem::path fetch_to_cache(std::string_view pdb_id, const std::filesystem::path& cache_dir,
                                     const HttpTransport& transport) {
  if (!is_valid_pdb_id(pdb_id))
    throw DomainError("invalid PDB ID '" + std::string(pdb_id) + "': expected a digit followed by 3 alphanumerics");
  const auto path = pdb_cache_path(cache_dir, pdb_id);
  if (std::filesystem::exists(path)) return path;

  const auto url = pdb_download_url(pdb_id);
  HttpResponse response;
  try {
    response = transport(url);
  } catch (const FetchError&) {
    throw;
  } catch (const std::exception& e) {
    throw FetchError("GET " + url + " failed: " + e.what());
  }
  if (response.status == 404) throw NotFoundError("PDB entry not found: " + url);
  if (response.status != 200)
    throw FetchError("GET " + url + " returned HTTP " + std::to_string(response.status));

  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  // write to a temporary name first so a partial download never looks cached
  const auto tmp = path.string() + ".part";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot write cache file " + tmp);
    out.write(response.body.data(), static_cast<std::streamsize>(response.body.size()));
    if (!out) throw IoError("cannot write cache file " + tmp);
  }
  std::filesystem::rename(tmp, path);
  return path;
}

Structure fetch_structure(std::string_view pdb_id, const std::filesystem::path& cache_dir,
                          const HttpTransport& transport) {
  const auto path = fetch_to_cache(pdb_id, cache_dir, transport);
  auto s = read_pdb_file(path.string());
  s.source_label = upper(pdb_id);
  return s;
}

}  // namespace namdkit
