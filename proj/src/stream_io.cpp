#include "ieg/stream_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ieg/error.hpp"

namespace ieg {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written by memcpy and assume a little-endian host");

std::string format_double(double value, bool fixed) {
  char buffer[64];
  const auto result = fixed ? std::to_chars(buffer, buffer + sizeof buffer, value,
                                            std::chars_format::fixed)
                            : std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

namespace {

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void check_written(const std::ofstream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

CsvReader::CsvReader(const std::filesystem::path& path, std::string_view expected_header)
    : path_(path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string text;
  while (std::getline(in, text)) lines_.push_back(trim(text));
  // Header is the first non-comment line.
  while (cursor_ < lines_.size() && !lines_[cursor_].empty() && lines_[cursor_][0] == '#') {
    comments_.push_back(lines_[cursor_]);
    ++cursor_;
  }
  line_ = cursor_ + 1;
  if (cursor_ >= lines_.size() || lines_[cursor_] != expected_header) {
    fail("expected header '" + std::string(expected_header) + "'");
  }
  columns_ = static_cast<std::size_t>(std::count(expected_header.begin(), expected_header.end(), ',')) + 1;
  ++cursor_;
}

void CsvReader::fail(const std::string& message) const {
  throw IoError(path_.string() + ":" + std::to_string(line_) + ": " + message);
}

bool CsvReader::next(std::vector<double>& row) {
  while (cursor_ < lines_.size()) {
    const std::string& text = lines_[cursor_];
    line_ = cursor_ + 1;
    ++cursor_;
    if (text.empty()) continue;
    if (text[0] == '#') {
      comments_.push_back(text);
      continue;
    }
    row.clear();
    const char* p = text.data();
    const char* end = text.data() + text.size();
    while (true) {
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(p, end, value);
      if (ec != std::errc() || ptr == p) fail("malformed number in '" + text + "'");
      if (!std::isfinite(value)) fail("non-finite value in '" + text + "'");
      row.push_back(value);
      p = ptr;
      if (p == end) break;
      if (*p != ',') fail("unexpected character in '" + text + "'");
      ++p;
    }
    if (row.size() != columns_) {
      fail("expected " + std::to_string(columns_) + " fields, found " + std::to_string(row.size()));
    }
    return true;
  }
  return false;
}

void write_events_csv(const EventStream& stream, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "# width=" << stream.width << " height=" << stream.height
      << " duration=" << format_double(stream.duration, true) << '\n';
  out << "t,x,y,p\n";
  for (const Event& e : stream.events) {
    out << format_double(e.t, true) << ',' << format_double(e.x) << ',' << format_double(e.y)
        << ',' << e.polarity << '\n';
  }
  check_written(out, path);
}

EventStream read_events_csv(const std::filesystem::path& path) {
  CsvReader reader(path, "t,x,y,p");
  EventStream stream;
  bool bounded = false;
  for (const auto& c : reader.comments()) {
    std::istringstream in(c.substr(1));
    std::string token;
    while (in >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = token.substr(0, eq);
      const std::string value = token.substr(eq + 1);
      try {
        if (key == "width") stream.width = std::stoi(value);
        if (key == "height") stream.height = std::stoi(value);
        if (key == "duration") stream.duration = std::stod(value);
      } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed metadata '" + token + "'");
      }
    }
  }
  bounded = stream.width > 0 && stream.height > 0;
  std::vector<double> row;
  double max_x = 0.0;
  double max_y = 0.0;
  while (reader.next(row)) {
    Event e{row[0], row[1], row[2], 0};
    if (row[3] == 1.0) {
      e.polarity = 1;
    } else if (row[3] == -1.0) {
      e.polarity = -1;
    } else {
      reader.fail("polarity must be 1 or -1");
    }
    if (!stream.events.empty() && e.t < stream.events.back().t) reader.fail("events are not sorted by time");
    if (e.x < 0.0 || e.y < 0.0) reader.fail("negative pixel coordinate");
    if (bounded && (e.x >= stream.width || e.y >= stream.height)) {
      reader.fail("event outside the declared " + std::to_string(stream.width) + "x" +
                  std::to_string(stream.height) + " sensor");
    }
    max_x = std::max(max_x, e.x);
    max_y = std::max(max_y, e.y);
    stream.events.push_back(e);
  }
  if (!bounded) {
    stream.width = static_cast<int>(max_x) + 1;
    stream.height = static_cast<int>(max_y) + 1;
  }
  if (stream.duration <= 0.0 && !stream.events.empty()) stream.duration = stream.events.back().t;
  return stream;
}

void write_truth_csv(std::span<const TruthSample> truth, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << "t,tx,ty,r,vx,vy,omega\n";
  for (const TruthSample& s : truth) {
    out << format_double(s.t) << ',' << format_double(s.pose.tx) << ',' << format_double(s.pose.ty)
        << ',' << format_double(s.pose.r) << ',' << format_double(s.velocity.vx) << ','
        << format_double(s.velocity.vy) << ',' << format_double(s.velocity.omega) << '\n';
  }
  check_written(out, path);
}

std::vector<TruthSample> read_truth_csv(const std::filesystem::path& path) {
  CsvReader reader(path, "t,tx,ty,r,vx,vy,omega");
  std::vector<TruthSample> truth;
  std::vector<double> row;
  while (reader.next(row)) {
    if (!truth.empty() && row[0] < truth.back().t) reader.fail("ground truth is not sorted by time");
    truth.push_back({row[0], {row[1], row[2], row[3]}, {row[4], row[5], row[6]}});
  }
  return truth;
}

void write_training_set(std::span<const TrainingSample> samples, const std::filesystem::path& path) {
  auto out = open_output(path, true);
  out.write("IEGD", 4);
  const std::uint32_t version = kTrainingSetVersion;
  const std::uint64_t count = samples.size();
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const TrainingSample& s : samples) {
    double record[7];
    std::copy(s.input.begin(), s.input.end(), record);
    record[6] = s.target;
    out.write(reinterpret_cast<const char*>(record), sizeof record);
  }
  check_written(out, path);
}

std::vector<TrainingSample> read_training_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t count = 0;
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "IEGD", 4) != 0)
    throw IoError(path.string() + ": bad magic at offset 0 (not an IEGD training set)");
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!in) throw IoError(path.string() + ": truncated header at offset 4");
  if (version != kTrainingSetVersion)
    throw IoError(path.string() + ": unsupported training set version " + std::to_string(version));
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!in) throw IoError(path.string() + ": truncated header at offset 8");
  constexpr std::uint64_t kHeader = 16;
  constexpr std::uint64_t kRecord = 7 * sizeof(double);
  const auto size = std::filesystem::file_size(path);
  if (size != kHeader + count * kRecord) {
    throw IoError(path.string() + ": expected " + std::to_string(kHeader + count * kRecord) +
                  " bytes for " + std::to_string(count) + " records, file has " +
                  std::to_string(size));
  }
  std::vector<TrainingSample> samples(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    double record[7];
    in.read(reinterpret_cast<char*>(record), sizeof record);
    if (!in) throw IoError(path.string() + ": truncated record at offset " +
                           std::to_string(kHeader + i * kRecord));
    for (int k = 0; k < 6; ++k) samples[i].input[k] = record[k];
    samples[i].target = record[6];
    for (double v : record) {
      if (!std::isfinite(v)) {
        throw IoError(path.string() + ": non-finite value in record at offset " +
                      std::to_string(kHeader + i * kRecord));
      }
    }
  }
  return samples;
}

}  // namespace ieg
