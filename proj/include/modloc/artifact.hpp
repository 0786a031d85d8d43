#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "modloc/config.hpp"
#include "modloc/errors.hpp"
#include "modloc/localization.hpp"
#include "modloc/spectral_rep.hpp"

namespace modloc {

// Layout: 8-byte magic, u32 format version, u64 header length, JSON header,
// then each listed matrix as row-major (re, im) little-endian doubles.
inline constexpr char kMagic[8] = {'M', 'O', 'D', 'L', 'O', 'C', '\0', '\1'};

struct Container {
    nlohmann::json header;
    std::vector<std::pair<std::string, CMat>> blocks;

    const CMat& block(const std::string& name) const {
        for (const auto& [n, m] : blocks)
            if (n == name) return m;
        throw FormatError("container has no block '" + name + "'");
    }
};

namespace detail {

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated container");
    return v;
}

}  // namespace detail

inline void write_container(const std::string& path, Container c) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [name, m] : c.blocks) list.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
    c.header["blocks"] = list;
    c.header["format_version"] = kFormatVersion;
    const std::string text = c.header.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot write " + path);
    os.write(kMagic, sizeof kMagic);
    detail::put<std::uint32_t>(os, kFormatVersion);
    detail::put<std::uint64_t>(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, m] : c.blocks)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                detail::put<double>(os, m(i, j).real());
                detail::put<double>(os, m(i, j).imag());
            }
    if (!os) throw FormatError("write failed for " + path);
}

inline Container read_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    char magic[8];
    if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw FormatError(path + " is not a modloc container");
    const auto version = detail::get<std::uint32_t>(is);
    if (version != kFormatVersion) throw FormatError("unsupported container version " + std::to_string(version));
    const auto len = detail::get<std::uint64_t>(is);
    std::string text(len, '\0');
    if (!is.read(text.data(), static_cast<std::streamsize>(len))) throw FormatError("truncated header");
    Container c;
    try {
        c.header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("bad header: ") + e.what());
    }
    for (const auto& b : c.header.at("blocks")) {
        CMat m(b.at("rows").get<Eigen::Index>(), b.at("cols").get<Eigen::Index>());
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                const double re = detail::get<double>(is);
                const double im = detail::get<double>(is);
                m(i, j) = {re, im};
            }
        c.blocks.emplace_back(b.at("name").get<std::string>(), std::move(m));
    }
    return c;
}

inline void write_representation(const std::string& path, const GeneratorSet& g,
                                 const nlohmann::json& config = nlohmann::json::object()) {
    Container c;
    c.header = {{"kind", "representation"}, {"k", g.spec.k},         {"beta", g.spec.beta},
                {"M", g.spec.M},            {"quad_order", g.quad_order}, {"asymmetry", g.asymmetry},
                {"variant", to_string(g.variant)}, {"basis", to_string(g.basis)}, {"config", config}};
    c.blocks = {{"H", g.H}, {"D", g.D}, {"C", g.C}};
    write_container(path, std::move(c));
}

inline GeneratorSet read_representation(const std::string& path) {
    const Container c = read_container(path);
    if (c.header.value("kind", "") != "representation") throw FormatError(path + " is not a representation");
    GeneratorSet g;
    g.spec = {c.header.at("k").get<double>(), c.header.at("beta").get<double>(), c.header.at("M").get<int>()};
    g.quad_order = c.header.at("quad_order").get<int>();
    g.asymmetry = c.header.at("asymmetry").get<double>();
    g.variant = c.header.at("variant").get<std::string>() == "plain" ? Variant::Plain : Variant::Tilde;
    g.basis = c.header.at("basis").get<std::string>() == "Z" ? BasisKind::Z : BasisKind::Ztilde;
    g.H = c.block("H");
    g.D = c.block("D");
    g.C = c.block("C");
    if (g.H.rows() != g.spec.M || g.D.rows() != g.spec.M || g.C.rows() != g.spec.M)
        throw FormatError("matrix size does not match M in " + path);
    return g;
}

inline void write_state(const std::string& path, const StateVector& v,
                        const nlohmann::json& config = nlohmann::json::object()) {
    Container c;
    c.header = {{"kind", "state"},   {"representation", to_string(v.rep)}, {"norm2", v.norm2},
                {"loss", v.loss},    {"provenance", v.provenance},          {"config", config}};
    if (v.rep == Representation::ZSpectral)
        c.header["basis"] = {{"k", v.basis.k}, {"beta", v.basis.beta}, {"M", v.basis.M}};
    else
        c.header["grid"] = {{"N", v.grid.N}, {"E_max", v.grid.E_max}};
    c.blocks = {{"coeffs", CMat(v.coeffs)}};
    write_container(path, std::move(c));
}

inline StateVector read_state(const std::string& path) {
    const Container c = read_container(path);
    if (c.header.value("kind", "") != "state") throw FormatError(path + " is not a state");
    StateVector v;
    v.rep = c.header.at("representation").get<std::string>() == "Z-spectral" ? Representation::ZSpectral
                                                                              : Representation::EGrid;
    v.norm2 = c.header.at("norm2").get<double>();
    v.loss = c.header.at("loss").get<double>();
    v.provenance = c.header.at("provenance");
    if (v.rep == Representation::ZSpectral) {
        const auto& b = c.header.at("basis");
        v.basis = {b.at("k").get<double>(), b.at("beta").get<double>(), b.at("M").get<int>()};
    } else {
        const auto& g = c.header.at("grid");
        v.grid = {g.at("N").get<int>(), g.at("E_max").get<double>()};
    }
    v.coeffs = c.block("coeffs").col(0);
    return v;
}

}  // namespace modloc
