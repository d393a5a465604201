#include "container.hpp"

#include "cola/errors.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace cola::detail {

namespace {

template <typename T>
void put_le(std::string & out, T v) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_f32(std::string & out, float f) {
    put_le(out, std::bit_cast<std::uint32_t>(f));
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le(const char * what) {
        need(sizeof(T), what);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return v;
    }

    std::string_view take(std::size_t n, const char * what) {
        need(n, what);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == bytes_.size(); }
    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    void need(std::size_t n, const char * what) {
        if (bytes_.size() - pos_ < n) {
            throw FormatError(std::string("truncated container while reading ") + what);
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

} // namespace

std::string encode_container(const std::vector<std::uint32_t> & dims,
                             std::size_t n,
                             const std::function<std::string_view(std::size_t)> & id_of,
                             const std::function<const float *(std::size_t)> & payload_of,
                             const std::function<std::size_t(std::size_t)> & payload_len) {
    if (n > std::numeric_limits<std::uint32_t>::max() || dims.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("container too large");
    }
    std::string out;
    out.append(k_magic, 4);
    put_le(out, k_version);
    put_le(out, static_cast<std::uint32_t>(n));
    put_le(out, static_cast<std::uint32_t>(dims.size()));
    for (auto d : dims) {
        put_le(out, d);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::string_view id = id_of(i);
        if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw FormatError("record id longer than 65535 bytes");
        }
        put_le(out, static_cast<std::uint16_t>(id.size()));
        out.append(id);
        const float * p = payload_of(i);
        const std::size_t len = payload_len(i);
        out.reserve(out.size() + 4 * len);
        for (std::size_t j = 0; j < len; ++j) {
            put_f32(out, p[j]);
        }
    }
    return out;
}

Container decode_container(std::string_view bytes,
                           const std::function<std::size_t(const std::vector<std::uint32_t> &, std::uint32_t,
                                                           std::size_t)> & payload_len) {
    Reader r(bytes);
    const auto magic = r.take(4, "magic");
    if (std::memcmp(magic.data(), k_magic, 4) != 0) {
        throw FormatError("bad magic: expected \"COLA\"");
    }
    const auto version = r.get_le<std::uint32_t>("version");
    if (version != k_version) {
        throw FormatError("unsupported container version " + std::to_string(version));
    }
    const auto n = r.get_le<std::uint32_t>("record count");
    const auto L = r.get_le<std::uint32_t>("dimension count");
    if (static_cast<std::uint64_t>(L) * 4 > r.remaining()) {
        throw FormatError("dimension table exceeds file size");
    }
    Container c;
    c.dims.reserve(L);
    for (std::uint32_t l = 0; l < L; ++l) {
        c.dims.push_back(r.get_le<std::uint32_t>("dimension"));
    }
    c.records.reserve(std::min<std::size_t>(n, r.remaining() / 2 + 1));
    for (std::size_t i = 0; i < n; ++i) {
        ContainerRecord rec;
        const auto id_len = r.get_le<std::uint16_t>("id length");
        rec.id = std::string(r.take(id_len, "id"));
        const std::size_t len = payload_len(c.dims, n, i);
        if (len > r.remaining() / 4) {
            throw FormatError("record " + std::to_string(i) + " payload exceeds file size (shape mismatch)");
        }
        rec.payload.resize(len);
        for (std::size_t j = 0; j < len; ++j) {
            rec.payload[j] = std::bit_cast<float>(r.get_le<std::uint32_t>("payload"));
        }
        c.records.push_back(std::move(rec));
    }
    if (!r.at_end()) {
        throw FormatError("trailing bytes after last record (shape mismatch)");
    }
    return c;
}

} // namespace cola::detail
