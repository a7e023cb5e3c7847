#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace chronolens {

// ---------------------------------------------------------------------------
// Errors
//
// Every failure mode has its own exception type carrying a stable code string
// (the type name) so CLI layers and tests can match on it. `ErrorKind`
// separates bad input data from internal invariant violations; the CLI maps
// them to distinct exit codes.
// ---------------------------------------------------------------------------

enum class ErrorKind { data, internal };

class Error : public std::runtime_error {
 public:
  Error(std::string code, std::string message, ErrorKind kind = ErrorKind::data)
      : std::runtime_error(code + ": " + message),
        code_(std::move(code)),
        kind_(kind) {}

  const std::string& code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  ErrorKind kind_;
};

#define CHRONOLENS_DEFINE_ERROR(Name)                       \
  struct Name : Error {                                     \
    explicit Name(std::string message)                      \
        : Error(#Name, std::move(message)) {}               \
  }

// date parsing
CHRONOLENS_DEFINE_ERROR(NoDateFound);
CHRONOLENS_DEFINE_ERROR(OutOfWindow);
// ingestion
CHRONOLENS_DEFINE_ERROR(MalformedManifest);
CHRONOLENS_DEFINE_ERROR(DuplicateId);
CHRONOLENS_DEFINE_ERROR(ShapeMismatch);
CHRONOLENS_DEFINE_ERROR(NonFiniteValue);
CHRONOLENS_DEFINE_ERROR(AlreadyGrayscale);
CHRONOLENS_DEFINE_ERROR(VersionMismatch);
CHRONOLENS_DEFINE_ERROR(CorruptFile);
// linear models
CHRONOLENS_DEFINE_ERROR(SingleClass);
CHRONOLENS_DEFINE_ERROR(NonFinite);
CHRONOLENS_DEFINE_ERROR(DimMismatch);
CHRONOLENS_DEFINE_ERROR(LengthMismatch);
CHRONOLENS_DEFINE_ERROR(Empty);
// micro net
CHRONOLENS_DEFINE_ERROR(HeadNotFC);
CHRONOLENS_DEFINE_ERROR(EmptyDataset);
// unit analysis
CHRONOLENS_DEFINE_ERROR(UnitOutOfRange);
CHRONOLENS_DEFINE_ERROR(EmptyHistogram);
CHRONOLENS_DEFINE_ERROR(OccluderTooLarge);
CHRONOLENS_DEFINE_ERROR(PatchTooLarge);
CHRONOLENS_DEFINE_ERROR(UniverseMismatch);
// influence
CHRONOLENS_DEFINE_ERROR(EmptyCollection);
CHRONOLENS_DEFINE_ERROR(Unnormalized);
CHRONOLENS_DEFINE_ERROR(EmptyYear);

#undef CHRONOLENS_DEFINE_ERROR

// ---------------------------------------------------------------------------
// Deterministic random numbers
//
// mt19937_64 supplies the raw stream; the value transforms are spelled out
// here instead of using <random> distributions, whose output is
// implementation-defined. Same seed, same stream of doubles, on any platform.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the spare value is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform index in [0, n). Modulo bias is below 2^-53 for any n used here.
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(next_u64() % n);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    // Fisher-Yates, back to front.
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;  // engine output is pinned by the standard
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Worker pool helpers
// ---------------------------------------------------------------------------

// Worker count: hardware concurrency capped by CHRONOLENS_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("CHRONOLENS_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1 && static_cast<unsigned>(v) < n) n = static_cast<unsigned>(v);
  }
  return n;
}

// Runs fn(chunk) for chunk in [0, n_chunks) on up to worker_count() threads.
// Chunk boundaries are fixed by the caller, so any result merged in chunk
// order is independent of how many threads actually ran.
template <class Fn>
void parallel_chunks(std::size_t n_chunks, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(worker_count(), n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t c = next.fetch_add(1); c < n_chunks;
           c = next.fetch_add(1)) {
        fn(c);
      }
    });
  }
  for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------------------
// Little-endian binary IO and CRC32
// ---------------------------------------------------------------------------

namespace io {

inline void write_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <class T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  std::array<unsigned char, sizeof(T)> buf{};
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xFF);
  }
  write_bytes(out, buf.data(), buf.size());
}

inline void write_f32_le(std::ostream& out, float value) {
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  write_le<std::uint32_t>(out, bits);
}

inline void write_f64_le(std::ostream& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, 8);
  write_le<std::uint64_t>(out, bits);
}

inline bool read_bytes(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  return static_cast<std::size_t>(in.gcount()) == n;
}

template <class T>
bool read_le(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> buf{};
  if (!read_bytes(in, buf.data(), buf.size())) return false;
  using U = std::make_unsigned_t<T>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u |= static_cast<U>(buf[i]) << (8 * i);
  }
  value = static_cast<T>(u);
  return true;
}

inline bool read_f32_le(std::istream& in, float& value) {
  std::uint32_t bits;
  if (!read_le(in, bits)) return false;
  std::memcpy(&value, &bits, 4);
  return true;
}

inline bool read_f64_le(std::istream& in, double& value) {
  std::uint64_t bits;
  if (!read_le(in, bits)) return false;
  std::memcpy(&value, &bits, 8);
  return true;
}

// Lands staged bytes at `path` through a sibling temp file and a rename, so
// readers never observe a partially written file.
inline void commit_bytes(const std::filesystem::path& path,
                         const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw CorruptFile("cannot open " + tmp.string() + " for write");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CorruptFile("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw CorruptFile("rename to " + path.string() + ": " + ec.message());
  }
}

// CRC-32 (IEEE 802.3 polynomial, reflected form).
inline std::uint32_t crc32(const void* data, std::size_t n,
                           std::uint32_t seed = 0) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = seed ^ 0xFFFFFFFFu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    crc = table[(crc ^ p[i]) & 0xFF] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

}  // namespace io

}  // namespace chronolens
