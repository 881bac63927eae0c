#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ieg/synth.hpp"

namespace ieg {

// Shortest round-trip decimal; `fixed` forbids exponent notation.
std::string format_double(double value, bool fixed = false);

// Comma-separated fields of one CSV line; numeric parse errors name the
// file and line.
class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, std::string_view expected_header);

  // Next data row, false at end of file. Lines starting with '#' are
  // collected as metadata and skipped.
  bool next(std::vector<double>& row);

  std::size_t line() const { return line_; }
  const std::vector<std::string>& comments() const { return comments_; }
  [[noreturn]] void fail(const std::string& message) const;

 private:
  std::filesystem::path path_;
  std::vector<std::string> lines_;
  std::vector<std::string> comments_;
  std::size_t cursor_ = 0;
  std::size_t line_ = 0;
  std::size_t columns_ = 0;
};

// Event CSV: optional "# width=W height=H duration=D" line, header t,x,y,p.
void write_events_csv(const EventStream& stream, const std::filesystem::path& path);
EventStream read_events_csv(const std::filesystem::path& path);

// Ground-truth CSV: t,tx,ty,r,vx,vy,omega.
void write_truth_csv(std::span<const TruthSample> truth, const std::filesystem::path& path);
std::vector<TruthSample> read_truth_csv(const std::filesystem::path& path);

// Training set: "IEGD", u32 version, u64 count, count x 7 little-endian f64.
inline constexpr std::uint32_t kTrainingSetVersion = 1;
void write_training_set(std::span<const TrainingSample> samples, const std::filesystem::path& path);
std::vector<TrainingSample> read_training_set(const std::filesystem::path& path);

}  // namespace ieg
