#include "fep/serialize.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace fep {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

constexpr char kMagic[8] = {'F', 'E', 'P', 'E', 'N', 'S', '1', '\0'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("ensemble file truncated");
    return v;
}

} // namespace

std::string base64_encode(const uint8_t* data, size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (size_t i = 0; i < len; i += 3) {
        uint32_t v = data[i] << 16;
        if (i + 1 < len) v |= data[i + 1] << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(kAlphabet[(v >> 18) & 63]);
        out.push_back(kAlphabet[(v >> 12) & 63]);
        out.push_back(i + 1 < len ? kAlphabet[(v >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kAlphabet[v & 63] : '=');
    }
    return out;
}

std::vector<uint8_t> base64_decode(const std::string& text) {
    auto value = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        if (c == '=') return -1;
        throw std::invalid_argument("base64: bad character");
    };
    if (text.size() % 4 != 0) throw std::invalid_argument("base64: bad length");
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (size_t i = 0; i < text.size(); i += 4) {
        int a = value(text[i]), b = value(text[i + 1]);
        int c = value(text[i + 2]), d = value(text[i + 3]);
        if (a < 0 || b < 0) throw std::invalid_argument("base64: bad padding");
        uint32_t v = (static_cast<uint32_t>(a) << 18) | (static_cast<uint32_t>(b) << 12);
        out.push_back(static_cast<uint8_t>(v >> 16));
        if (c >= 0) {
            v |= static_cast<uint32_t>(c) << 6;
            out.push_back(static_cast<uint8_t>((v >> 8) & 0xFF));
        }
        if (d >= 0) {
            v |= static_cast<uint32_t>(d);
            out.push_back(static_cast<uint8_t>(v & 0xFF));
        }
    }
    return out;
}

std::string bits_to_base64(const BitArray& bits) {
    size_t nbytes = (bits.size() + 7) / 8;
    std::vector<uint8_t> bytes(nbytes, 0);
    std::memcpy(bytes.data(), bits.words(), nbytes);
    return base64_encode(bytes.data(), bytes.size());
}

BitArray bits_from_base64(const std::string& text, uint64_t nbits) {
    std::vector<uint8_t> bytes = base64_decode(text);
    if (bytes.size() != (nbits + 7) / 8) throw std::invalid_argument("bit payload size mismatch");
    BitArray out(nbits);
    std::memcpy(out.words(), bytes.data(), bytes.size());
    uint64_t w = out.word_count();
    out.words()[w - 1] &= out.tail_mask();
    return out;
}

std::string window_record(const WindowSample& w) {
    nlohmann::json j;
    j["delta"] = w.delta;
    j["L"] = w.length;
    j["left_context"] = w.left_context ? 1 : 0;
    j["occupancy"] = bits_to_base64(w.occupancy);
    if (w.first_renewal_position) j["first_renewal_position"] = *w.first_renewal_position;
    else j["first_renewal_position"] = nullptr;
    return j.dump();
}

WindowSample window_from_record(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    WindowSample w;
    w.delta = j.at("delta").get<double>();
    w.length = j.at("L").get<uint64_t>();
    w.left_context = j.at("left_context").get<int>() != 0;
    w.occupancy = bits_from_base64(j.at("occupancy").get<std::string>(), w.length);
    w.renewal_flags = BitArray(w.length);
    scan_renewal_flags(w.occupancy, w.left_context, w.renewal_flags);
    if (!j.at("first_renewal_position").is_null())
        w.first_renewal_position = j.at("first_renewal_position").get<uint64_t>();
    return w;
}

void save_ensemble(const FrozenEnsemble& ens, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os.write(kMagic, sizeof kMagic);
    put(os, kVersion);
    put(os, ens.N);
    put(os, ens.rho);
    put(os, static_cast<uint8_t>(ens.rule));
    put(os, static_cast<uint32_t>(ens.replicas.size()));
    put(os, ens.master_seed);
    const size_t words = (ens.N + 63) / 64;
    for (const auto& r : ens.replicas) {
        put(os, r.replica);
        put(os, static_cast<uint8_t>(r.status));
        put(os, r.events);
        put(os, r.freeze_time);
        os.write(reinterpret_cast<const char*>(r.occ.words()),
                 static_cast<std::streamsize>(words * 8));
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

FrozenEnsemble load_ensemble(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not an ensemble file: " + path);
    uint32_t version = take<uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("unsupported ensemble version");
    FrozenEnsemble ens;
    ens.N = take<uint64_t>(is);
    ens.rho = take<double>(is);
    ens.rule = static_cast<UpdateRule>(take<uint8_t>(is));
    uint32_t replicas = take<uint32_t>(is);
    ens.master_seed = take<uint64_t>(is);
    const size_t words = (ens.N + 63) / 64;
    ens.replicas.resize(replicas);
    for (auto& r : ens.replicas) {
        r.replica = take<uint64_t>(is);
        r.status = static_cast<FreezeStatus>(take<uint8_t>(is));
        r.events = take<uint64_t>(is);
        r.freeze_time = take<double>(is);
        r.occ = BitArray(ens.N);
        is.read(reinterpret_cast<char*>(r.occ.words()), static_cast<std::streamsize>(words * 8));
        if (!is) throw std::runtime_error("ensemble file truncated");
    }
    return ens;
}

} // namespace fep
