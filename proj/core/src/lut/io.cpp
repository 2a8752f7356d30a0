#include "fqkit/lut/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <json.hpp>

#include "fqkit/util/error.hpp"

namespace fqkit::lut {

namespace {

using json = nlohmann::json;

json table_json(const LutTable& t) {
    return json{{"t_bit", t.t_bit()},
                {"i_bit", t.i_bit()},
                {"entries", t.entries()},
                {"entry_min", t.entry_min()},
                {"entry_max", t.entry_max()}};
}

LutTable table_of(const json& j) {
    int t_bit = j.at("t_bit").get<int>();
    int i_bit = j.at("i_bit").get<int>();
    auto entries = j.at("entries").get<std::vector<std::int32_t>>();
    if (j.contains("entry_min") || j.contains("entry_max")) {
        return LutTable(t_bit, i_bit, std::move(entries), j.at("entry_min").get<std::int32_t>(),
                        j.at("entry_max").get<std::int32_t>());
    }
    return LutTable(t_bit, i_bit, std::move(entries));
}

void put_maps(json& j, const AffineMap& in, const AffineMap& out) {
    j["in_scale"] = in.scale;
    j["in_zero_point"] = in.zero_point;
    j["out_scale"] = out.scale;
    j["out_zero_point"] = out.zero_point;
}

AffineMap map_of(const json& j, const char* scale, const char* zp, int bits) {
    return AffineMap{bits, j.at(scale).get<double>(), j.value(zp, 0.0)};
}

template <typename Fn>
auto parse(std::string_view text, const char* what, Fn&& fn) {
    try {
        return fn(json::parse(text));
    } catch (const json::exception& e) {
        throw Error(std::string("bad ") + what + " json: " + e.what());
    }
}

// little-endian writer / reader

class ByteWriter {
public:
    template <typename T>
    void put(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        out_.append(reinterpret_cast<const char*>(b), sizeof(T));
    }
    void raw(std::string_view s) { out_.append(s); }
    std::string take() { return std::move(out_); }

private:
    std::string out_;
};

class ByteReader {
public:
    explicit ByteReader(std::string_view in) : in_(in) {}
    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > in_.size()) throw Error("truncated table binary");
        unsigned char b[sizeof(T)];
        std::memcpy(b, in_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
    std::string_view raw(std::size_t n) {
        if (pos_ + n > in_.size()) throw Error("truncated table binary");
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

constexpr std::string_view kMagic = "FQLT";
constexpr std::uint16_t kVersion = 1;

std::string dump(const AffineMap& in, const AffineMap& out, std::initializer_list<const LutTable*> tables) {
    ByteWriter w;
    w.raw(kMagic);
    w.put<std::uint16_t>(kVersion);
    w.put<std::uint16_t>(static_cast<std::uint16_t>(tables.size()));
    w.put<double>(in.scale);
    w.put<double>(in.zero_point);
    w.put<double>(out.scale);
    w.put<double>(out.zero_point);
    for (const LutTable* t : tables) {
        w.put<std::uint8_t>(static_cast<std::uint8_t>(t->t_bit()));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(t->i_bit()));
        w.put<std::uint16_t>(0);
        w.put<std::int32_t>(t->entry_min());
        w.put<std::int32_t>(t->entry_max());
        w.put<std::uint32_t>(static_cast<std::uint32_t>(t->entries().size()));
        for (auto e : t->entries()) w.put<std::int32_t>(e);
    }
    return w.take();
}

}  // namespace

std::string to_json(const LutTable& table) { return table_json(table).dump(); }

std::string to_json(const DulutPair& pair) {
    json j;
    j["table1"] = table_json(pair.table1());
    j["table2"] = table_json(pair.table2());
    put_maps(j, pair.input(), pair.output());
    return j.dump();
}

std::string to_json(const LinearLut& lut) {
    json j;
    j["table"] = table_json(lut.table);
    put_maps(j, lut.input, lut.output);
    return j.dump();
}

LutTable table_from_json(std::string_view text) {
    return parse(text, "table", [](const json& j) { return table_of(j); });
}

DulutPair pair_from_json(std::string_view text) {
    return parse(text, "pair", [](const json& j) {
        LutTable t1 = table_of(j.at("table1"));
        LutTable t2 = table_of(j.at("table2"));
        int bits = t1.i_bit();
        return DulutPair(std::move(t1), std::move(t2), map_of(j, "in_scale", "in_zero_point", bits),
                         map_of(j, "out_scale", "out_zero_point", bits));
    });
}

LinearLut linear_from_json(std::string_view text) {
    return parse(text, "table", [](const json& j) {
        LutTable t = table_of(j.at("table"));
        int bits = t.i_bit();
        return LinearLut{std::move(t), map_of(j, "in_scale", "in_zero_point", bits),
                         map_of(j, "out_scale", "out_zero_point", bits)};
    });
}

std::string to_binary(const DulutPair& pair) {
    return dump(pair.input(), pair.output(), {&pair.table1(), &pair.table2()});
}

std::string to_binary(const LinearLut& lut) { return dump(lut.input, lut.output, {&lut.table}); }

BinaryArtifact from_binary(std::string_view bytes) {
    ByteReader r(bytes);
    if (r.raw(kMagic.size()) != kMagic) throw Error("not a table binary (bad magic)");
    if (r.get<std::uint16_t>() != kVersion) throw Error("unsupported table binary version");
    auto count = r.get<std::uint16_t>();
    if (count != 1 && count != 2) throw Error("table binary must hold 1 or 2 tables");
    BinaryArtifact a;
    a.input.scale = r.get<double>();
    a.input.zero_point = r.get<double>();
    a.output.scale = r.get<double>();
    a.output.zero_point = r.get<double>();
    for (int i = 0; i < count; ++i) {
        int t_bit = r.get<std::uint8_t>();
        int i_bit = r.get<std::uint8_t>();
        r.get<std::uint16_t>();
        auto emin = r.get<std::int32_t>();
        auto emax = r.get<std::int32_t>();
        auto n = r.get<std::uint32_t>();
        std::vector<std::int32_t> e(n);
        for (auto& v : e) v = r.get<std::int32_t>();
        a.tables.emplace_back(t_bit, i_bit, std::move(e), emin, emax);
    }
    if (!r.done()) throw Error("trailing bytes in table binary");
    a.input.bits = a.tables.front().i_bit();
    a.output.bits = a.tables.back().i_bit();
    return a;
}

}  // namespace fqkit::lut
