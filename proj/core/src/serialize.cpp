#include "rieszlab/serialize.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>

#include <nlohmann/json.hpp>

namespace rieszlab {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {
const char* kB64 = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const unsigned char* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t chunk = data[i] << 16;
        if (i + 1 < len) chunk |= data[i + 1] << 8;
        if (i + 2 < len) chunk |= data[i + 2];
        out.push_back(kB64[(chunk >> 18) & 63]);
        out.push_back(kB64[(chunk >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64[(chunk >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64[chunk & 63] : '=');
    }
    return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<unsigned char> out;
    int buffer = 0, bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = val(c);
        if (v < 0) throw std::invalid_argument("base64_decode: bad character");
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<unsigned char>((buffer >> bits) & 0xff));
        }
    }
    return out;
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string measure_to_json(const Measure& mu) {
    json j;
    if (std::holds_alternative<AtomicMeasure>(mu)) {
        const auto& m = std::get<AtomicMeasure>(mu);
        j["variant"] = "atomic";
        json atoms = json::array();
        for (std::size_t i = 0; i < m.size(); ++i)
            atoms.push_back({m.points[i].x, m.points[i].y, m.weights[i]});
        j["atoms"] = std::move(atoms);
    } else if (std::holds_alternative<CapSumMeasure>(mu)) {
        const auto& m = std::get<CapSumMeasure>(mu);
        j["variant"] = "capsum";
        json caps = json::array();
        for (const Cap& c : m.caps)
            caps.push_back({{"c", {c.support.center.x, c.support.center.y}},
                            {"r", c.support.radius},
                            {"mass", c.mass},
                            {"profile", "std-bump"}});
        j["caps"] = std::move(caps);
    } else {
        const auto& m = std::get<GriddedMeasure>(mu);
        j["variant"] = "gridded";
        const auto samples = m.density.component(0);
        // Little-endian 64-bit floats (x86-64 native layout).
        j["grid"] = {{"L", m.density.spec().half_extent},
                     {"n", m.density.spec().resolution},
                     {"data", base64_encode(reinterpret_cast<const unsigned char*>(samples.data()),
                                            samples.size() * sizeof(double))}};
    }
    return j.dump(2);
}

Measure measure_from_json(const std::string& text) {
    const json j = json::parse(text);
    const std::string variant = j.at("variant");
    if (variant == "atomic") {
        AtomicMeasure m;
        for (const auto& row : j.at("atoms")) {
            m.points.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
            m.weights.push_back(row.at(2).get<double>());
        }
        return m;
    }
    if (variant == "capsum") {
        CapSumMeasure m;
        for (const auto& c : j.at("caps")) {
            m.caps.push_back({Disk({c.at("c").at(0).get<double>(), c.at("c").at(1).get<double>()},
                                   c.at("r").get<double>()),
                              c.at("mass").get<double>()});
        }
        return m;
    }
    if (variant == "gridded") {
        const auto& g = j.at("grid");
        GridSpec spec(g.at("L").get<double>(), g.at("n").get<int>());
        GridField f(spec, 1);
        const std::vector<unsigned char> bytes = base64_decode(g.at("data").get<std::string>());
        if (bytes.size() != f.cells() * sizeof(double))
            throw std::invalid_argument("measure_from_json: grid data size mismatch");
        std::memcpy(f.component(0).data(), bytes.data(), bytes.size());
        return GriddedMeasure{std::move(f)};
    }
    throw std::invalid_argument("measure_from_json: unknown variant " + variant);
}

std::string top_cover_to_json(const TopCover& cover) {
    json arr = json::array();
    for (const TopCoverEntry& e : cover.entries)
        arr.push_back({{"c", {e.disk.center.x, e.disk.center.y}},
                       {"r", e.disk.radius},
                       {"tilde_mass", e.tilde_mass}});
    return arr.dump(2);
}

std::string structure_to_json(const CantorStructure& st) {
    json j;
    j["levels"] = st.params.levels;
    j["s"] = st.params.s;
    json cells = json::array();
    for (const CantorCell& c : st.cells) {
        json jc;
        jc["id"] = c.id;
        jc["level"] = c.level;
        jc["parent"] = c.parent;
        jc["children"] = c.children;
        jc["m"] = c.m_j;
        jc["H"] = c.h_j;
        jc["atoms"] = c.atoms.size();
        jc["survivors"] = c.survivors.size();
        if (c.level > 0) {
            jc["birth_disk"] = {{"c", {c.birth_disk.center.x, c.birth_disk.center.y}},
                                {"r", c.birth_disk.radius}};
            jc["omega_tilde"] = {{"c", {c.omega_tilde.center.x, c.omega_tilde.center.y}},
                                 {"r", c.omega_tilde.radius}};
        }
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    return j.dump(2);
}

std::string report_to_json(const EstimateReport& rep) {
    json j;
    j["name"] = rep.name;
    j["lhs"] = rep.measured_lhs;
    j["rhs"] = rep.bound_rhs;
    j["constant"] = rep.empirical_constant;
    j["pass"] = rep.pass;
    if (!rep.note.empty()) j["note"] = rep.note;
    json meta = json::object();
    for (const auto& [k, v] : rep.metadata) meta[k] = v;
    j["params"] = std::move(meta);
    return j.dump(2);
}

std::string report_to_csv_row(const EstimateReport& rep) {
    std::string params;
    for (const auto& [k, v] : rep.metadata) {
        if (!params.empty()) params += ';';
        params += k + "=" + format_double(v);
    }
    return rep.name + "," + format_double(rep.measured_lhs) + "," +
           format_double(rep.bound_rhs) + "," + format_double(rep.empirical_constant) + "," +
           (rep.pass ? "1" : "0") + "," + params;
}

} // namespace rieszlab
