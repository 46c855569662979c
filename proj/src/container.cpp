#include "scenecat/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

namespace scenecat {

static_assert(std::endian::native == std::endian::little,
              "container payloads are raw little-endian");

std::uint64_t Section::element_count() const {
  std::uint64_t n = 1;
  for (std::uint64_t d : shape) n *= d;
  return n;
}

namespace {

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f64" || dtype == "i64") return 8;
  if (dtype == "u8") return 1;
  throw IoError("unknown section dtype '" + dtype + "'");
}

}  // namespace

void ContainerWriter::add_raw(const std::string& name, const char* data, std::size_t bytes,
                              std::string dtype, std::vector<std::uint64_t> shape) {
  if (sections_.count(name)) throw IoError("duplicate container section '" + name + "'");
  Section s;
  s.dtype = std::move(dtype);
  s.shape = std::move(shape);
  s.offset = payload_.size();
  s.bytes = bytes;
  if (s.element_count() * dtype_size(s.dtype) != bytes)
    throw IoError("section '" + name + "': shape does not match byte count");
  payload_.insert(payload_.end(), data, data + bytes);
  sections_.emplace(name, std::move(s));
}

void ContainerWriter::add_f64(const std::string& name, const double* data,
                              std::vector<std::uint64_t> shape) {
  std::uint64_t n = std::accumulate(shape.begin(), shape.end(), std::uint64_t{1},
                                    std::multiplies<>());
  add_raw(name, reinterpret_cast<const char*>(data), n * sizeof(double), "f64", std::move(shape));
}

void ContainerWriter::add_i64(const std::string& name, const std::int64_t* data,
                              std::vector<std::uint64_t> shape) {
  std::uint64_t n = std::accumulate(shape.begin(), shape.end(), std::uint64_t{1},
                                    std::multiplies<>());
  add_raw(name, reinterpret_cast<const char*>(data), n * sizeof(std::int64_t), "i64",
          std::move(shape));
}

void ContainerWriter::add_u8(const std::string& name, const std::uint8_t* data,
                             std::vector<std::uint64_t> shape) {
  std::uint64_t n = std::accumulate(shape.begin(), shape.end(), std::uint64_t{1},
                                    std::multiplies<>());
  add_raw(name, reinterpret_cast<const char*>(data), n, "u8", std::move(shape));
}

void ContainerWriter::write(const std::string& path) const {
  nlohmann::json header;
  header["kind"] = kind_;
  header["meta"] = meta_;
  nlohmann::json sections = nlohmann::json::object();
  for (const auto& [name, s] : sections_) {
    sections[name] = {{"dtype", s.dtype}, {"shape", s.shape}, {"offset", s.offset},
                      {"bytes", s.bytes}};
  }
  header["sections"] = sections;
  const std::string header_text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kContainerMagic, sizeof(kContainerMagic));
  std::uint64_t header_len = header_text.size();
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  out.write(payload_.data(), static_cast<std::streamsize>(payload_.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

ContainerReader::ContainerReader(const std::string& path) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");

  char magic[sizeof(kContainerMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kContainerMagic, sizeof(magic)) != 0)
    throw IoError("'" + path + "' is not a scenecat container (bad magic)");

  std::uint64_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  if (!in) throw IoError("'" + path + "': truncated header length");
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw IoError("'" + path + "': truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("'" + path + "': header is not valid JSON: " + e.what());
  }
  kind_ = header.at("kind").get<std::string>();
  meta_ = header.value("meta", nlohmann::json::object());
  for (const auto& [name, js] : header.at("sections").items()) {
    Section s;
    s.dtype = js.at("dtype").get<std::string>();
    s.shape = js.at("shape").get<std::vector<std::uint64_t>>();
    s.offset = js.at("offset").get<std::uint64_t>();
    s.bytes = js.at("bytes").get<std::uint64_t>();
    sections_.emplace(name, std::move(s));
  }

  payload_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  for (const auto& [name, s] : sections_)
    if (s.offset + s.bytes > payload_.size())
      throw IoError("'" + path + "': section '" + name + "' extends past end of file");
}

const Section& ContainerReader::section(const std::string& name) const {
  auto it = sections_.find(name);
  if (it == sections_.end())
    throw IoError("'" + path_ + "': missing section '" + name + "'");
  return it->second;
}

std::vector<double> ContainerReader::f64(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != "f64") throw IoError("'" + path_ + "': section '" + name + "' is not f64");
  std::vector<double> v(s.element_count());
  std::memcpy(v.data(), payload_at(s), s.bytes);
  return v;
}

std::vector<std::int64_t> ContainerReader::i64(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != "i64") throw IoError("'" + path_ + "': section '" + name + "' is not i64");
  std::vector<std::int64_t> v(s.element_count());
  std::memcpy(v.data(), payload_at(s), s.bytes);
  return v;
}

std::vector<std::uint8_t> ContainerReader::u8(const std::string& name) const {
  const Section& s = section(name);
  if (s.dtype != "u8") throw IoError("'" + path_ + "': section '" + name + "' is not u8");
  std::vector<std::uint8_t> v(s.element_count());
  std::memcpy(v.data(), payload_at(s), s.bytes);
  return v;
}

}  // namespace scenecat
