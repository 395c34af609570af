#include <fstream>
#include <sstream>
#include <unordered_map>

#include "dgs/histogram.hpp"
#include "dgs/io.hpp"

namespace dgs::io {

namespace {

[[noreturn]] void parse_fail(std::string_view source, std::size_t line,
                             const std::string& message, ErrorKind kind = ErrorKind::Parse,
                             std::string subject = {}) {
  throw Error(kind, std::string(source) + ":" + std::to_string(line) + ": " + message,
              std::move(subject), line);
}

}  // namespace

std::vector<ScoreRecord> read_manifest(std::istream& in, std::string_view source) {
  std::vector<ScoreRecord> records;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;

    Json obj;
    try {
      obj = Json::parse(text);
    } catch (const Json::parse_error& e) {
      parse_fail(source, line, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) parse_fail(source, line, "record is not a JSON object");

    ScoreRecord r;
    bool has_id = false, has_class = false, has_difficulty = false;
    for (const auto& [key, value] : obj.items()) {
      if (key == "id") {
        if (!value.is_string()) parse_fail(source, line, "'id' must be a string");
        r.id = value.get<std::string>();
        has_id = true;
      } else if (key == "class") {
        if (!value.is_string()) parse_fail(source, line, "'class' must be a string");
        r.class_label = value.get<std::string>();
        has_class = true;
      } else if (key == "difficulty") {
        if (!value.is_number()) parse_fail(source, line, "'difficulty' must be a number");
        r.difficulty = value.get<double>();
        has_difficulty = true;
      } else if (key == "path") {
        if (!value.is_string()) parse_fail(source, line, "'path' must be a string");
        r.source_path = value.get<std::string>();
      } else {
        r.extra.emplace_back(key, value.dump());
      }
    }
    if (!has_id) parse_fail(source, line, "missing 'id'");
    if (!has_class) parse_fail(source, line, "missing 'class'", ErrorKind::Parse, r.id);
    if (!has_difficulty)
      parse_fail(source, line, "missing 'difficulty'", ErrorKind::Parse, r.id);
    try {
      check_difficulty(r);
    } catch (const Error& e) {
      parse_fail(source, line, e.what(), ErrorKind::OutOfRange, r.id);
    }
    auto [it, inserted] = first_line.emplace(r.id, line);
    if (!inserted)
      parse_fail(source, line,
                 "duplicate id '" + r.id + "' (first seen on line " +
                     std::to_string(it->second) + ")",
                 ErrorKind::DuplicateId, r.id);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ScoreRecord> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open manifest " + path.string(), path.string());
  return read_manifest(in, path.string());
}

std::string manifest_line(const ScoreRecord& record) {
  Json obj;
  obj["id"] = record.id;
  obj["class"] = record.class_label;
  obj["difficulty"] = record.difficulty;
  if (record.source_path) obj["path"] = *record.source_path;
  for (const auto& [key, value] : record.extra) obj[key] = Json::parse(value);
  return obj.dump();
}

void write_manifest(std::ostream& out, std::span<const ScoreRecord> records) {
  for (const auto& r : records) out << manifest_line(r) << '\n';
}

void save_manifest(const std::filesystem::path& path,
                   std::span<const ScoreRecord> records) {
  std::ostringstream out;
  write_manifest(out, records);
  write_file_atomic(path, out.str());
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string(), path.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string(), path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto " + path.string(), path.string());
  }
}

}  // namespace dgs::io
