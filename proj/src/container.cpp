#include "mbe/container.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mbe/errors.hpp"
#include "mbe/matrix_io.hpp"

namespace mbe {

namespace {
constexpr char kMagic[4] = {'M', 'B', 'E', 'C'};
constexpr std::uint16_t kVersion = 1;
}  // namespace

const Eigen::MatrixXd& Container::at(const std::string& name) const {
  for (const auto& [n, m] : entries)
    if (n == name) return m;
  throw data_error("container entry not found: " + name);
}

bool Container::has(const std::string& name) const {
  for (const auto& [n, m] : entries)
    if (n == name) return true;
  return false;
}

void Container::add(std::string name, Eigen::MatrixXd value) {
  entries.emplace_back(std::move(name), std::move(value));
}

void write_container(const Container& c, const std::filesystem::path& path) {
  // Serialize blobs first so the index can carry exact offsets.
  std::ostringstream payload(std::ios::binary);
  nlohmann::json index;
  index["entries"] = nlohmann::json::array();
  for (const auto& [name, m] : c.entries) {
    index["entries"].push_back({{"name", name}, {"offset", static_cast<std::uint64_t>(payload.tellp())}});
    write_matrix_stream(m, payload);
  }
  index["meta"] = c.meta.is_null() ? nlohmann::json::object() : c.meta;
  const std::string index_bytes = index.dump();
  const std::string payload_bytes = payload.str();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out.write(kMagic, 4);
  const std::uint16_t version = kVersion;
  const std::uint16_t reserved = 0;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&reserved), sizeof(reserved));
  const std::uint64_t index_len = index_bytes.size();
  out.write(reinterpret_cast<const char*>(&index_len), sizeof(index_len));
  out.write(index_bytes.data(), static_cast<std::streamsize>(index_bytes.size()));
  out.write(payload_bytes.data(), static_cast<std::streamsize>(payload_bytes.size()));
  out.flush();
  if (!out) throw io_error("write failed for " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw format_error("bad magic, not a container file: " + path.string());
  std::uint16_t version = 0, reserved = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&reserved), sizeof(reserved));
  if (!in || version != kVersion)
    throw format_error("unsupported container version " + std::to_string(version));
  std::uint64_t index_len = 0;
  in.read(reinterpret_cast<char*>(&index_len), sizeof(index_len));
  if (!in) throw format_error("truncated container header");
  std::string index_bytes(index_len, '\0');
  in.read(index_bytes.data(), static_cast<std::streamsize>(index_len));
  if (!in) throw format_error("truncated container index");

  nlohmann::json index;
  try {
    index = nlohmann::json::parse(index_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw format_error(std::string("container index is not valid JSON: ") + e.what());
  }

  const std::streampos payload_start = in.tellg();
  Container c;
  c.meta = index.value("meta", nlohmann::json::object());
  for (const auto& entry : index.at("entries")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::uint64_t offset = entry.at("offset").get<std::uint64_t>();
    in.seekg(payload_start + static_cast<std::streamoff>(offset));
    c.add(name, read_matrix_stream(in));
  }
  return c;
}

}  // namespace mbe
