#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

#include "namdkit/io/pdb.hpp"

namespace namdkit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Performs one GET. Throws FetchError on transport failure.
using HttpTransport = std::function<HttpResponse(const std::string& url)>;

/// Default HTTPS transport backed by cpp-httplib.
HttpTransport https_transport();

bool is_valid_pdb_id(std::string_view id);
std::string pdb_download_url(std::string_view id);
std::filesystem::path pdb_cache_path(const std::filesystem::path& cache_dir, std::string_view id);

/// Returns the cached `<id>.pdb` if present (no transport call), otherwise
/// downloads it, stores the body verbatim in the cache and parses it.
Structure fetch_structure(std::string_view pdb_id, const std::filesystem::path& cache_dir,
                          const HttpTransport& transport = https_transport());

/// Same as fetch_structure but returns the cache file path instead of parsing.
std::filesystem::path fetch_to_cache(std::string_view pdb_id, const std::filesystem::path& cache_dir,
                                     const HttpTransport& transport = https_transport());

}  // namespace namdkit
