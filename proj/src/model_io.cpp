// SPDX-License-Identifier: Apache-2.0

#include "flowdmd/model_io.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "flowdmd/errors.hpp"

namespace flowdmd {

namespace {

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void raw(const char* data, std::size_t size) { out_.write(data, static_cast<std::streamsize>(size)); }

    template <typename UInt>
    void le(UInt v) {
        char bytes[sizeof(UInt)];
        for (std::size_t i = 0; i < sizeof(UInt); ++i) {
            bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
        }
        raw(bytes, sizeof bytes);
    }

    void tag(std::string_view t) { raw(t.data(), 4); }
    void u64(std::uint64_t v) { le(v); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        le(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void cplx(const Complex* data, std::size_t count) {
        u64(count);
        for (std::size_t i = 0; i < count; ++i) {
            f64(data[i].real());
            f64(data[i].imag());
        }
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void raw(char* data, std::size_t size) {
        if (!in_.read(data, static_cast<std::streamsize>(size))) {
            throw FormatError("model file truncated");
        }
    }

    template <typename UInt>
    UInt le() {
        unsigned char bytes[sizeof(UInt)];
        raw(reinterpret_cast<char*>(bytes), sizeof bytes);
        UInt v = 0;
        for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
        return v;
    }

    void tag(std::string_view expected) {
        char got[4];
        raw(got, 4);
        if (std::string_view(got, 4) != expected) {
            throw FormatError("model file: expected field '" + std::string(expected) + "', found '" +
                              std::string(got, 4) + "'");
        }
    }
    std::uint64_t u64() { return le<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
    std::string str() {
        const auto len = le<std::uint32_t>();
        if (len > (1u << 20)) throw FormatError("model file: implausible string length");
        std::string s(len, '\0');
        raw(s.data(), len);
        return s;
    }
    void cplx(Complex* data, std::size_t expected) {
        const auto count = u64();
        if (count != expected) {
            throw FormatError("model file: array has " + std::to_string(count) + " entries, expected " +
                              std::to_string(expected));
        }
        for (std::size_t i = 0; i < count; ++i) {
            const double re = f64();
            const double im = f64();
            data[i] = Complex(re, im);
        }
    }

private:
    std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const DmdModel& model) {
    Writer w(out);
    w.raw(kModelMagic.data(), kModelMagic.size());
    w.le(kModelFormatVersion);
    w.tag("NDIM"); w.u64(model.n);
    w.tag("RANK"); w.u64(model.r);
    w.tag("DT  "); w.f64(model.dt);
    w.tag("T0  "); w.str(model.t0_label.iso());
    w.tag("RREQ"); w.u64(model.requested_rank);
    w.tag("RSVD"); w.u64(model.svd_rank);
    w.tag("DROP"); w.u64(model.dropped_modes);
    w.tag("MTRN"); w.u64(model.training_snapshots);
    w.tag("PLCS"); w.u64(model.places.size());
    for (const auto& id : model.places.ids()) w.str(id);
    w.tag("LAMB"); w.cplx(model.discrete_eigs.data(), static_cast<std::size_t>(model.discrete_eigs.size()));
    w.tag("OMEG"); w.cplx(model.cont_eigs.data(), static_cast<std::size_t>(model.cont_eigs.size()));
    w.tag("AMPL"); w.cplx(model.amplitudes.data(), static_cast<std::size_t>(model.amplitudes.size()));
    w.tag("MODE"); w.cplx(model.modes.data(), static_cast<std::size_t>(model.modes.size()));
    if (!out) throw FormatError("model write failed");
}

void save_model(const std::filesystem::path& path, const DmdModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError(path.string() + ": cannot open for writing");
    save_model(out, model);
}

DmdModel load_model(std::istream& in) {
    Reader rd(in);
    std::array<char, 8> magic{};
    rd.raw(magic.data(), magic.size());
    if (magic != kModelMagic) throw FormatError("not a flowdmd model file (bad magic)");
    const auto version = rd.le<std::uint32_t>();
    if (version != kModelFormatVersion) {
        throw FormatError("unsupported model format version " + std::to_string(version));
    }

    DmdModel model;
    rd.tag("NDIM"); model.n = rd.u64();
    rd.tag("RANK"); model.r = rd.u64();
    if (model.r > model.n || model.n > (std::uint64_t{1} << 32)) {
        throw FormatError("model file: implausible dimensions");
    }
    rd.tag("DT  "); model.dt = rd.f64();
    rd.tag("T0  ");
    const std::string t0 = rd.str();
    const auto d = Date::parse(t0);
    if (!d) throw FormatError("model file: bad t0 label '" + t0 + "'");
    model.t0_label = *d;
    rd.tag("RREQ"); model.requested_rank = rd.u64();
    rd.tag("RSVD"); model.svd_rank = rd.u64();
    rd.tag("DROP"); model.dropped_modes = rd.u64();
    rd.tag("MTRN"); model.training_snapshots = rd.u64();
    rd.tag("PLCS");
    const auto count = rd.u64();
    if (count > model.n) throw FormatError("model file: implausible place count");
    std::vector<std::string> ids;
    for (std::uint64_t i = 0; i < count; ++i) ids.push_back(rd.str());
    model.places = PlaceIndex(ids);
    if (model.places.ids() != ids) throw FormatError("model file: place list not sorted and distinct");

    const auto r = static_cast<Eigen::Index>(model.r);
    model.discrete_eigs.resize(r);
    model.cont_eigs.resize(r);
    model.amplitudes.resize(r);
    model.modes.resize(static_cast<Eigen::Index>(model.n), r);
    rd.tag("LAMB"); rd.cplx(model.discrete_eigs.data(), model.r);
    rd.tag("OMEG"); rd.cplx(model.cont_eigs.data(), model.r);
    rd.tag("AMPL"); rd.cplx(model.amplitudes.data(), model.r);
    rd.tag("MODE"); rd.cplx(model.modes.data(), model.n * model.r);
    return model;
}

DmdModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError(path.string() + ": cannot open for reading");
    try {
        return load_model(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace flowdmd
