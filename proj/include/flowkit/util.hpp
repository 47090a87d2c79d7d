#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace flowkit {

// ---- text helpers ----------------------------------------------------------

std::string trim(std::string_view s);
std::vector<std::string> split_ws(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);
bool starts_with(std::string_view s, std::string_view prefix);
bool ends_with(std::string_view s, std::string_view suffix);

/// Strip a trailing `# ...` comment that is not inside a double-quoted string.
/// Returns the code part; if `comment` is non-null it receives the trimmed
/// comment text (without the leading '#').
std::string strip_comment(std::string_view line, std::string* comment = nullptr);

bool is_identifier(std::string_view s);

/// Shortest decimal that round-trips to the same double. Integral magnitudes
/// keep a ".0" suffix so the literal re-parses as a REAL, and plain fixed
/// notation is used over a wide exponent range.
std::string format_real(double v);

std::string zero_pad(int value, int width);

// ---- small file helpers ------------------------------------------------------

/// Read a whole file into a string. Throws std::runtime_error on failure.
std::string read_file(const std::string& path);

/// Write a string to a file, replacing any existing content.
void write_file(const std::string& path, std::string_view content);

// ---- hashing ---------------------------------------------------------------

uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ull);
std::string hex64(uint64_t v);

/// CRC-32 (IEEE 802.3, reflected polynomial 0xEDB88320).
uint32_t crc32(const void* data, size_t len, uint32_t seed = 0);

// ---- worker pool ------------------------------------------------------------

/// Fixed-width fork/join helper. Work items are split into contiguous chunks;
/// chunk boundaries depend only on `n`, never on the worker count, so any
/// reduction that combines per-chunk partials in chunk order is bit-stable
/// across worker counts.
class WorkerPool {
public:
    explicit WorkerPool(int workers = 1);

    int workers() const { return workers_; }

    /// Invoke fn(i) for every i in [0, n).
    void parallel_for(long n, const std::function<void(long)>& fn) const;

    /// Invoke fn(begin, end) over a fixed partition of [0, n).
    void parallel_chunks(long n, const std::function<void(long, long)>& fn) const;

    /// Like parallel_chunks but also passes the chunk index, for reductions
    /// that combine per-chunk partials in chunk order.
    void parallel_chunks_indexed(long n,
                                 const std::function<void(long, long, long)>& fn) const;

    /// Number of chunks parallel_chunks will use for n items.
    static long chunk_count(long n) { return n <= 0 ? 0 : (n < 64 ? n : 64); }

    /// Ordered parallel sum of fn(i) over [0, n): per-chunk partials are added
    /// in chunk order, so the result is bit-identical for any worker count.
    double ordered_sum(long n, const std::function<double(long)>& fn) const;

private:
    int workers_;
};

}  // namespace flowkit
