#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "scenecat/common.hpp"

namespace scenecat {

// Self-describing binary file: 8-byte magic, little-endian u64 header
// length, UTF-8 header JSON (kind, metadata, section table), then raw
// little-endian payload bytes. Shared by dataset and checkpoint files;
// layout documented in docs/FORMATS.md.
inline constexpr char kContainerMagic[8] = {'S', 'C', 'N', 'C', 'O', 'N', 'T', '1'};

struct Section {
  std::string dtype;  // "f64" | "i64" | "u8"
  std::vector<std::uint64_t> shape;
  std::uint64_t offset = 0;  // into payload
  std::uint64_t bytes = 0;

  std::uint64_t element_count() const;
};

class ContainerWriter {
 public:
  explicit ContainerWriter(std::string kind) : kind_(std::move(kind)) {}

  void set_meta(nlohmann::json meta) { meta_ = std::move(meta); }

  void add_f64(const std::string& name, const double* data, std::vector<std::uint64_t> shape);
  void add_i64(const std::string& name, const std::int64_t* data,
               std::vector<std::uint64_t> shape);
  void add_u8(const std::string& name, const std::uint8_t* data, std::vector<std::uint64_t> shape);

  void add_f64(const std::string& name, const std::vector<double>& v) {
    add_f64(name, v.data(), {v.size()});
  }

  // Assembles and writes the file; throws IoError on failure.
  void write(const std::string& path) const;

 private:
  void add_raw(const std::string& name, const char* data, std::size_t bytes, std::string dtype,
               std::vector<std::uint64_t> shape);

  std::string kind_;
  nlohmann::json meta_ = nlohmann::json::object();
  std::map<std::string, Section> sections_;  // ordered → deterministic layout
  std::vector<char> payload_;
};

class ContainerReader {
 public:
  explicit ContainerReader(const std::string& path);

  const std::string& kind() const { return kind_; }
  const nlohmann::json& meta() const { return meta_; }
  bool has(const std::string& name) const { return sections_.count(name) != 0; }
  const Section& section(const std::string& name) const;

  std::vector<double> f64(const std::string& name) const;
  std::vector<std::int64_t> i64(const std::string& name) const;
  std::vector<std::uint8_t> u8(const std::string& name) const;

 private:
  const char* payload_at(const Section& s) const { return payload_.data() + s.offset; }

  std::string path_;
  std::string kind_;
  nlohmann::json meta_;
  std::map<std::string, Section> sections_;
  std::vector<char> payload_;
};

}  // namespace scenecat
