#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "chronolens/common.hpp"

namespace chronolens {

// Inclusive span of calendar years.
struct YearRange {
  int start_year = 0;
  int end_year = 0;

  friend bool operator==(const YearRange&, const YearRange&) = default;
};

inline YearRange default_window() { return {1900, 2009}; }

// Fixed-width quantization of years into decade-style bins. The defaults are
// the 11 decades 1900-2009; cars use origin 1920 with 8 bins.
struct TemporalBinning {
  int origin_year = 1900;
  int bin_width_years = 10;
  int n_bins = 11;

  int span_start() const { return origin_year; }
  int span_end() const { return origin_year + n_bins * bin_width_years - 1; }
  bool contains(int year) const {
    return year >= span_start() && year <= span_end();
  }

  friend bool operator==(const TemporalBinning&, const TemporalBinning&) =
      default;
};

struct BinIndex {
  int value = 0;

  friend bool operator==(const BinIndex&, const BinIndex&) = default;
  friend auto operator<=>(const BinIndex&, const BinIndex&) = default;
};

// Binning that covers [window.start_year, window.end_year] with n_bins equal
// bins. The span must divide evenly.
inline TemporalBinning make_binning(const YearRange& window, int n_bins) {
  const int span = window.end_year - window.start_year + 1;
  if (n_bins < 1 || span <= 0 || span % n_bins != 0) {
    throw ShapeMismatch("window " + std::to_string(window.start_year) + ":" +
                        std::to_string(window.end_year) +
                        " does not divide into " + std::to_string(n_bins) +
                        " equal bins");
  }
  return TemporalBinning{window.start_year, span / n_bins, n_bins};
}

inline std::string to_string(const YearRange& r) {
  if (r.start_year == r.end_year) return std::to_string(r.start_year);
  return std::to_string(r.start_year) + "-" + std::to_string(r.end_year);
}

namespace detail {

struct DigitRun {
  std::size_t pos = 0;
  std::size_t len = 0;
  int value = 0;
};

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline std::optional<DigitRun> next_digit_run(std::string_view text,
                                              std::size_t from) {
  std::size_t i = from;
  while (i < text.size() && !is_digit(text[i])) ++i;
  if (i >= text.size()) return std::nullopt;
  DigitRun run;
  run.pos = i;
  long long value = 0;
  while (i < text.size() && is_digit(text[i])) {
    if (run.len < 9) {  // enough for any year token; longer runs never match
      value = value * 10 + (text[i] - '0');
    }
    ++run.len;
    ++i;
  }
  run.value = static_cast<int>(value);
  return run;
}

// Consumes an optional "'s"/"s" suffix at `pos`; returns chars consumed.
inline std::size_t decade_suffix(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  if (i < text.size() && text[i] == '\'') ++i;
  if (i < text.size() && (text[i] == 's' || text[i] == 'S')) {
    return i + 1 - pos;
  }
  return 0;
}

// Consumes a range separator (hyphen or en dash, one optional space on each
// side) at `pos`; returns chars consumed, 0 if absent.
inline std::size_t range_separator(std::string_view text, std::size_t pos) {
  std::size_t i = pos;
  if (i < text.size() && text[i] == ' ') ++i;
  if (i < text.size() && text[i] == '-') {
    ++i;
  } else if (i + 2 < text.size() &&
             static_cast<unsigned char>(text[i]) == 0xE2 &&
             static_cast<unsigned char>(text[i + 1]) == 0x80 &&
             static_cast<unsigned char>(text[i + 2]) == 0x93) {
    i += 3;  // U+2013 en dash
  } else {
    return 0;
  }
  if (i < text.size() && text[i] == ' ') ++i;
  return i - pos;
}

struct TokenMatch {
  YearRange range;
  std::size_t length = 0;  // matched chars, used for longest-match tie break
  bool two_digit_decade = false;
  int two_digit_value = 0;  // e.g. 90 for "90s"
};

// Grammar rules at one 4-digit run, longest first: range, decade, plain year.
inline std::optional<TokenMatch> match_from_run4(std::string_view text,
                                                 const DigitRun& run) {
  const std::size_t after = run.pos + run.len;
  // "1954-1957", "1954-57", "1950s-1970s"
  std::size_t head_suffix = decade_suffix(text, after);
  const bool head_decade = head_suffix > 0 && run.value % 10 == 0;
  const std::size_t sep_at = after + (head_decade ? head_suffix : 0);
  if (const std::size_t sep = range_separator(text, sep_at)) {
    if (auto second = next_digit_run(text, sep_at + sep);
        second && second->pos == sep_at + sep) {
      int end_year = -1;
      std::size_t end_len = 0;
      if (second->len == 4) {
        end_year = second->value;
        end_len = second->len;
        const std::size_t tail_suffix = decade_suffix(text, second->pos + 4);
        if (tail_suffix > 0 && second->value % 10 == 0) {
          end_year = second->value + 9;
          end_len += tail_suffix;
        }
      } else if (second->len == 2) {
        // Short tail inherits the head's century: "1954-57".
        end_year = (run.value / 100) * 100 + second->value;
        end_len = second->len;
      }
      if (end_year >= run.value && end_len > 0) {
        TokenMatch m;
        m.range = {run.value, end_year};
        m.length = (sep_at - run.pos) + sep + end_len;
        return m;
      }
    }
  }
  if (head_decade) {
    TokenMatch m;
    m.range = {run.value, run.value + 9};
    m.length = run.len + head_suffix;
    return m;
  }
  TokenMatch m;
  m.range = {run.value, run.value};
  m.length = run.len;
  return m;
}

inline std::optional<TokenMatch> match_from_run2(std::string_view text,
                                                 const DigitRun& run) {
  const std::size_t suffix = decade_suffix(text, run.pos + run.len);
  if (suffix == 0 || run.value % 10 != 0) return std::nullopt;
  TokenMatch m;
  m.two_digit_decade = true;
  m.two_digit_value = run.value;
  m.length = run.len + suffix;
  return m;
}

}  // namespace detail

// Extracts the first date token from free-form text and resolves it against
// the window. Recognized forms: "1965", "1920s", "90s", "1954-1957" (hyphen
// or en dash, "1954-57" and "1950s-1970s" variants), anywhere in prose.
// The earliest token wins; at equal positions the longest rule wins. The
// result is clipped to the window; a token lying fully outside it is an
// OutOfWindow error, text with no token at all is NoDateFound.
inline YearRange parse_date_string(std::string_view text,
                                   const YearRange& window = default_window()) {
  std::optional<detail::TokenMatch> match;
  std::size_t scan = 0;
  while (auto run = detail::next_digit_run(text, scan)) {
    if (run->len == 4) {
      match = detail::match_from_run4(text, *run);
    } else if (run->len == 2) {
      match = detail::match_from_run2(text, *run);
    }
    if (match) break;
    scan = run->pos + run->len;
  }
  if (!match) {
    throw NoDateFound("no date token in \"" + std::string(text) + "\"");
  }

  YearRange resolved = match->range;
  if (match->two_digit_decade) {
    // Enumerate the centuries touching the window; prefer the 1900s reading,
    // otherwise the earliest candidate that intersects the window.
    const int first_century = (window.start_year / 100) * 100;
    const int last_century = (window.end_year / 100) * 100;
    std::optional<YearRange> chosen;
    for (int base = first_century; base <= last_century; base += 100) {
      const YearRange candidate{base + match->two_digit_value,
                                base + match->two_digit_value + 9};
      if (candidate.end_year < window.start_year ||
          candidate.start_year > window.end_year) {
        continue;
      }
      if (!chosen || base == 1900) chosen = candidate;
      if (base == 1900) break;
    }
    if (!chosen) {
      throw OutOfWindow("decade '" + std::to_string(match->two_digit_value) +
                        "s' has no reading inside " + to_string(window));
    }
    resolved = *chosen;
  }

  const YearRange clipped{std::max(resolved.start_year, window.start_year),
                          std::min(resolved.end_year, window.end_year)};
  if (clipped.start_year > clipped.end_year) {
    throw OutOfWindow("range " + to_string(resolved) + " lies outside " +
                      to_string(window));
  }
  return clipped;
}

inline int midpoint_year(const YearRange& r) {
  // Floor of the average; years are positive so plain division is the floor.
  return (r.start_year + r.end_year) / 2;
}

// Bin containing the midpoint of the range.
inline BinIndex quantize(const YearRange& range, const TemporalBinning& binning) {
  const int mid = midpoint_year(range);
  if (!binning.contains(mid)) {
    throw OutOfWindow("midpoint " + std::to_string(mid) + " of " +
                      to_string(range) + " outside bins " +
                      std::to_string(binning.span_start()) + ":" +
                      std::to_string(binning.span_end()));
  }
  return BinIndex{(mid - binning.origin_year) / binning.bin_width_years};
}

inline void check_bin(const BinIndex& bin, const TemporalBinning& binning) {
  if (bin.value < 0 || bin.value >= binning.n_bins) {
    throw OutOfWindow("bin " + std::to_string(bin.value) + " not in [0, " +
                      std::to_string(binning.n_bins) + ")");
  }
}

// Midpoint year of a bin; bridges class predictions to year-denominated MAE.
inline int bin_representative_year(const BinIndex& bin,
                                   const TemporalBinning& binning) {
  check_bin(bin, binning);
  return binning.origin_year + bin.value * binning.bin_width_years +
         binning.bin_width_years / 2;
}

inline YearRange bin_span(const BinIndex& bin, const TemporalBinning& binning) {
  check_bin(bin, binning);
  const int start = binning.origin_year + bin.value * binning.bin_width_years;
  return {start, start + binning.bin_width_years - 1};
}

}  // namespace chronolens
