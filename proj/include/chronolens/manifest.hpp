#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "chronolens/dates.hpp"

namespace chronolens {

enum class Split { train, test };

inline std::string to_string(Split s) {
  return s == Split::train ? "train" : "test";
}

// One dataset record. Dates stay as raw text until the date parser runs;
// label_year / label_bin are filled in by whoever resolves them.
struct Sample {
  std::string id;
  std::string date_text;
  std::optional<int> label_year;
  std::optional<BinIndex> label_bin;
  Split split = Split::train;
  std::string collection_id;
  std::string path;
  bool grayscale = false;
};

// ---------------------------------------------------------------------------
// Manifest file: UTF-8, one record per line, tab-separated `key=value`
// fields. Recognized keys: id (required), date_text, year, split,
// collection, path, gray. Lines that are empty or start with '#' are
// skipped; line numbers in errors are physical.
// ---------------------------------------------------------------------------

namespace detail {

inline MalformedManifest manifest_error(std::size_t line, const std::string& what) {
  return MalformedManifest("line " + std::to_string(line) + ": " + what);
}

inline Sample parse_manifest_line(std::string_view line, std::size_t line_no) {
  Sample s;
  bool have_id = false;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find('\t', start);
    if (end == std::string_view::npos) end = line.size();
    const std::string_view field = line.substr(start, end - start);
    start = end + 1;
    if (field.empty()) {
      if (start > line.size()) break;
      continue;
    }
    const std::size_t eq = field.find('=');
    if (eq == std::string_view::npos) {
      throw manifest_error(line_no, "field without '=': \"" +
                                        std::string(field) + "\"");
    }
    const std::string_view key = field.substr(0, eq);
    const std::string value(field.substr(eq + 1));
    if (key == "id") {
      if (value.empty()) throw manifest_error(line_no, "empty id");
      s.id = value;
      have_id = true;
    } else if (key == "date_text") {
      s.date_text = value;
    } else if (key == "year") {
      try {
        s.label_year = std::stoi(value);
      } catch (const std::exception&) {
        throw manifest_error(line_no, "bad year \"" + value + "\"");
      }
    } else if (key == "split") {
      if (value == "train") {
        s.split = Split::train;
      } else if (value == "test") {
        s.split = Split::test;
      } else {
        throw manifest_error(line_no, "split must be train|test, got \"" +
                                          value + "\"");
      }
    } else if (key == "collection") {
      s.collection_id = value;
    } else if (key == "path") {
      s.path = value;
    } else if (key == "gray") {
      if (value == "1" || value == "true") {
        s.grayscale = true;
      } else if (value == "0" || value == "false") {
        s.grayscale = false;
      } else {
        throw manifest_error(line_no, "gray must be 0|1, got \"" + value + "\"");
      }
    } else {
      throw manifest_error(line_no,
                           "unknown field \"" + std::string(key) + "\"");
    }
    if (end == line.size()) break;
  }
  if (!have_id) throw manifest_error(line_no, "record has no id");
  return s;
}

}  // namespace detail

inline std::vector<Sample> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MalformedManifest("cannot open manifest " + path.string());
  }
  std::vector<Sample> samples;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    Sample s = detail::parse_manifest_line(line, line_no);
    if (!seen.insert(s.id).second) {
      throw DuplicateId("line " + std::to_string(line_no) + ": id \"" + s.id +
                        "\" already seen");
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

inline void save_manifest(const std::filesystem::path& path,
                          const std::vector<Sample>& samples) {
  std::ostringstream out;
  for (const Sample& s : samples) {
    out << "id=" << s.id;
    if (!s.date_text.empty()) out << "\tdate_text=" << s.date_text;
    if (s.label_year) out << "\tyear=" << *s.label_year;
    out << "\tsplit=" << to_string(s.split);
    if (!s.collection_id.empty()) out << "\tcollection=" << s.collection_id;
    if (!s.path.empty()) out << "\tpath=" << s.path;
    if (s.grayscale) out << "\tgray=1";
    out << "\n";
  }
  io::commit_bytes(path, out.str());
}

// Resolves each sample's year label: an explicit `year` field wins, else the
// date text is parsed and quantized. Samples with neither (or with
// unparseable text) are left unlabeled.
inline void resolve_labels(std::vector<Sample>& samples,
                           const TemporalBinning& binning) {
  const YearRange window{binning.span_start(), binning.span_end()};
  for (Sample& s : samples) {
    try {
      if (!s.label_year && !s.date_text.empty()) {
        const YearRange r = parse_date_string(s.date_text, window);
        s.label_year = midpoint_year(r);
      }
      if (s.label_year && binning.contains(*s.label_year)) {
        s.label_bin = quantize({*s.label_year, *s.label_year}, binning);
      }
    } catch (const NoDateFound&) {
    } catch (const OutOfWindow&) {
    }
  }
}

}  // namespace chronolens
