#pragma once

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "secopt/errors.hpp"
#include "secopt/protocol.hpp"

namespace secopt {

// Line-oriented transcript format:
//
//   # secopt-transcript v1 config_hash=<16 hex> S=<int> delta_adv=<real> view=full|public
//   t,x,phase,s,informative      (full)
//   t,x,phase,s                  (public)
//
// Reals are written with 17 significant digits and read back exactly.

inline void write_transcript(std::ostream& os, const Transcript& tr, bool public_only) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# secopt-transcript v1 config_hash=%016" PRIx64 " S=%d delta_adv=%.17g view=%s\n",
                tr.config_hash, tr.S, tr.delta_adv, public_only ? "public" : "full");
  os << buf;
  for (const auto& e : tr.entries) {
    if (public_only) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%lld,%d\n", static_cast<long long>(e.t), e.x,
                    static_cast<long long>(e.phase), e.subinterval);
    } else {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%lld,%d,%d\n", static_cast<long long>(e.t), e.x,
                    static_cast<long long>(e.phase), e.subinterval, e.informative ? 1 : 0);
    }
    os << buf;
  }
}

struct StoredTranscript {
  std::uint64_t config_hash = 0;
  int S = 0;
  double delta_adv = 0.0;
  bool public_only = true;
  /// Informative flags are left false for public files.
  std::vector<TranscriptEntry> entries;

  PublicView public_view() const {
    std::vector<double> points;
    points.reserve(entries.size());
    for (const auto& e : entries) points.push_back(e.x);
    return PublicView(std::move(points));
  }
};

inline StoredTranscript read_transcript(std::istream& is) {
  StoredTranscript out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# secopt-transcript v1 ", 0) != 0) {
    throw InputError("transcript: missing '# secopt-transcript v1' header");
  }
  std::istringstream header(line.substr(23));
  std::string field;
  bool have_hash = false, have_s = false, have_d = false, have_view = false;
  while (header >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw InputError("transcript: malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "config_hash") {
      out.config_hash = std::strtoull(value.c_str(), nullptr, 16);
      have_hash = true;
    } else if (key == "S") {
      out.S = std::atoi(value.c_str());
      have_s = true;
    } else if (key == "delta_adv") {
      out.delta_adv = std::strtod(value.c_str(), nullptr);
      have_d = true;
    } else if (key == "view") {
      if (value != "public" && value != "full") throw InputError("transcript: view must be public or full");
      out.public_only = value == "public";
      have_view = true;
    }
  }
  if (!(have_hash && have_s && have_d && have_view)) throw InputError("transcript: incomplete header");

  const std::size_t fields = out.public_only ? 4 : 5;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(part);
    if (parts.size() != fields) {
      throw InputError("transcript: line " + std::to_string(lineno) + " has " + std::to_string(parts.size()) +
                       " fields, expected " + std::to_string(fields));
    }
    TranscriptEntry e;
    char* end = nullptr;
    e.t = std::strtoll(parts[0].c_str(), &end, 10);
    e.x = std::strtod(parts[1].c_str(), &end);
    if (end == parts[1].c_str()) throw InputError("transcript: bad point on line " + std::to_string(lineno));
    e.phase = std::strtoll(parts[2].c_str(), nullptr, 10);
    e.subinterval = std::atoi(parts[3].c_str());
    if (!out.public_only) e.informative = parts[4] == "1";
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace secopt
