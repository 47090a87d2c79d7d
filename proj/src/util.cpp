#include "flowkit/util.hpp"

#include <atomic>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace flowkit {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view line = text.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            out.emplace_back(line);
            start = i + 1;
        }
    }
    if (!out.empty() && out.back().empty() && !text.empty() && text.back() == '\n') out.pop_back();
    return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string strip_comment(std::string_view line, std::string* comment) {
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') in_string = !in_string;
        if (c == '#' && !in_string) {
            if (comment) *comment = trim(line.substr(i + 1));
            return std::string(line.substr(0, i));
        }
    }
    if (comment) comment->clear();
    return std::string(line);
}

bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

std::string format_real(double v) {
    // Shortest digit string via scientific to_chars, then re-rendered in fixed
    // notation for ordinary magnitudes.
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
    std::string sci(buf, res.ptr);

    bool neg = false;
    std::string_view body = sci;
    if (!body.empty() && body[0] == '-') { neg = true; body.remove_prefix(1); }
    if (body == "inf" || body == "nan") return sci;

    size_t epos = body.find('e');
    std::string digits;
    for (char c : body.substr(0, epos))
        if (c != '.') digits.push_back(c);
    int exp10 = std::atoi(std::string(body.substr(epos + 1)).c_str());

    // All-zero mantissa: value is +-0.
    bool all_zero = digits.find_first_not_of('0') == std::string::npos;
    if (all_zero) return neg ? "-0.0" : "0.0";

    std::string out;
    if (exp10 >= static_cast<int>(digits.size()) - 1 && exp10 <= 16) {
        out = digits + std::string(exp10 - (digits.size() - 1), '0') + ".0";
    } else if (exp10 >= 0 && exp10 <= 16) {
        out = digits.substr(0, exp10 + 1) + "." + digits.substr(exp10 + 1);
    } else if (exp10 < 0 && exp10 >= -6) {
        out = "0." + std::string(-exp10 - 1, '0') + digits;
    } else {
        // Keep scientific form, normalized as d[.ddd]e<exp>.
        out = digits.substr(0, 1);
        if (digits.size() > 1) out += "." + digits.substr(1);
        out += "e";
        if (exp10 < 0) { out += "-"; exp10 = -exp10; }
        std::string e = std::to_string(exp10);
        if (e.size() < 2) e = "0" + e;
        out += e;
    }
    return neg ? "-" + out : out;
}

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s = "0" + s;
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw std::runtime_error("read failed for " + path);
    return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

uint64_t fnv1a64(std::string_view data, uint64_t seed) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

namespace {
std::array<uint32_t, 256> make_crc_table() {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
        uint32_t c = i;
        for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
        t[i] = c;
    }
    return t;
}
}  // namespace

uint32_t crc32(const void* data, size_t len, uint32_t seed) {
    static const std::array<uint32_t, 256> table = make_crc_table();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

WorkerPool::WorkerPool(int workers) : workers_(workers < 1 ? 1 : workers) {}

void WorkerPool::parallel_chunks(long n, const std::function<void(long, long)>& fn) const {
    parallel_chunks_indexed(n, [&](long, long b, long e) { fn(b, e); });
}

void WorkerPool::parallel_chunks_indexed(
    long n, const std::function<void(long, long, long)>& fn) const {
    if (n <= 0) return;
    // Chunk layout depends only on n so per-chunk reductions are stable.
    long nchunks = chunk_count(n);
    long base = n / nchunks, rem = n % nchunks;
    auto chunk_range = [&](long c, long& b, long& e) {
        b = c * base + (c < rem ? c : rem);
        e = b + base + (c < rem ? 1 : 0);
    };
    int nthreads = static_cast<int>(std::min<long>(workers_, nchunks));
    if (nthreads <= 1) {
        for (long c = 0; c < nchunks; ++c) {
            long b, e;
            chunk_range(c, b, e);
            fn(c, b, e);
        }
        return;
    }
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    auto work = [&]() {
        for (;;) {
            long c = next.fetch_add(1);
            if (c >= nchunks) break;
            long b, e;
            chunk_range(c, b, e);
            try {
                fn(c, b, e);
            } catch (...) {
                std::lock_guard<std::mutex> lk(error_mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(nthreads - 1);
    for (int t = 1; t < nthreads; ++t) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

void WorkerPool::parallel_for(long n, const std::function<void(long)>& fn) const {
    parallel_chunks(n, [&](long b, long e) {
        for (long i = b; i < e; ++i) fn(i);
    });
}

double WorkerPool::ordered_sum(long n, const std::function<double(long)>& fn) const {
    if (n <= 0) return 0.0;
    std::vector<double> partial(static_cast<size_t>(chunk_count(n)), 0.0);
    parallel_chunks_indexed(n, [&](long c, long b, long e) {
        double s = 0.0;
        for (long i = b; i < e; ++i) s += fn(i);
        partial[static_cast<size_t>(c)] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

}  // namespace flowkit
