#include "util.hpp"

#include <fstream>
#include <sstream>

#include "namdkit/error.hpp"

namespace namdkit::detail {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace namdkit::detail
