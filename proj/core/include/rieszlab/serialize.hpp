#ifndef RIESZLAB_SERIALIZE_HPP
#define RIESZLAB_SERIALIZE_HPP

#include <string>
#include <vector>

#include "rieszlab/cantor.hpp"
#include "rieszlab/measure.hpp"
#include "rieszlab/report.hpp"
#include "rieszlab/topcover.hpp"

namespace rieszlab {

/// Measure <-> JSON:
///   {"variant":"atomic","atoms":[[x,y,w],...]}
///   {"variant":"capsum","caps":[{"c":[x,y],"r":r,"mass":m,"profile":"std-bump"},...]}
///   {"variant":"gridded","grid":{"L":L,"n":n,"data":"<base64 LE f64>"}}
std::string measure_to_json(const Measure& mu);
Measure measure_from_json(const std::string& text);

/// Covers serialize to [{"c":[x,y],"r":...,"tilde_mass":...},...].
std::string top_cover_to_json(const TopCover& cover);

/// Cantor structure as a JSON tree mirroring the cell hierarchy.
std::string structure_to_json(const CantorStructure& st);

std::string report_to_json(const EstimateReport& rep);
/// CSV row: name,lhs,rhs,constant,pass,params. `params` is a ;-joined
/// key=value run of the metadata.
std::string report_to_csv_row(const EstimateReport& rep);
inline const char* report_csv_header() { return "name,lhs,rhs,constant,pass,params"; }

std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

/// Deterministic shortest-roundtrip float formatting used by every writer.
std::string format_double(double v);

/// FNV-1a hash of a string, hex-encoded; used as the config fingerprint in
/// artifact headers.
std::string fnv1a_hex(const std::string& text);

} // namespace rieszlab

#endif
